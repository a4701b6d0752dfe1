#include "skewerg/report.hpp"

#include <charconv>
#include <cmath>

namespace skewerg::report {
namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json trace(const std::vector<TraceEntry>& t) {
  json out = json::array();
  for (const TraceEntry& e : t) out.push_back({{"level", e.level}, {"cutoff", e.cutoff}, {"value", number_or_null(e.value)}});
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void flatten_into(const json& node, const std::string& pointer, CsvTable& table) {
  if (node.is_object()) {
    for (const auto& [key, value] : node.items()) flatten_into(value, pointer + "/" + key, table);
  } else if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) flatten_into(node[i], pointer + "/" + std::to_string(i), table);
  } else if (node.is_number_float()) {
    table.add({pointer, number(node.get<double>())});
  } else if (node.is_string()) {
    table.add({pointer, node.get<std::string>()});
  } else {
    table.add({pointer, node.dump()});
  }
}

}  // namespace

std::string number(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cells[i]);
    }
    out += "\r\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

CsvTable flatten(const json& doc) {
  CsvTable t{{"key", "value"}, {}};
  flatten_into(doc, "", t);
  return t;
}

json matrix(const Eigen::MatrixXd& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(number_or_null(m(i, j)));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

json to_json(const CovarianceSequence& c) { return {{"max_lag", c.max_lag()}, {"lags", c.lags}}; }

json to_json(const SzegoResult& r) {
  return {{"sigma2", r.sigma2},
          {"log_integral", number_or_null(r.log_integral)},
          {"degenerate", r.degenerate},
          {"reason", r.reason},
          {"trace", trace(r.trace)}};
}

json to_json(const QuasiMarkovResult& r) {
  return {{"verdict", to_string(r.verdict)},
          {"reciprocal_integral", r.reciprocal_integral ? json(*r.reciprocal_integral) : json(nullptr)},
          {"reason", r.reason},
          {"trace", trace(r.trace)}};
}

json to_json(const OffWhiteResult& r) {
  return {{"verdict", to_string(r.verdict)},
          {"cutoffs", r.cutoffs},
          {"seminorms", r.seminorms},
          {"grid_size", r.grid_size},
          {"reason", r.reason}};
}

json to_json(const NoiseClassification& c) {
  return {{"ergodic", c.ergodic},
          {"sigma2", c.sigma2 ? json(*c.sigma2) : json(nullptr)},
          {"degenerate", c.degenerate},
          {"quasi_markov", to_string(c.quasi_markov)},
          {"off_white", to_string(c.off_white)},
          {"notes", c.notes},
          {"diagnostics",
           {{"szego", to_json(c.szego)},
            {"quasi_markov", to_json(c.quasi_markov_detail)},
            {"off_white", to_json(c.off_white_detail)}}}};
}

json to_json(const PredictionSolution& s) {
  return {{"order", s.order},
          {"coefficients", s.coefficients},
          {"innovation_variance", s.innovation_variance},
          {"reflection_coefficients", s.reflection_coefficients}};
}

json to_json(const InterpolationSolution& s) {
  return {{"window", s.window}, {"before", s.before}, {"after", s.after}, {"error_variance", s.error_variance}};
}

json to_json(const ConditionalLaw& law) {
  return {{"mean_operator", matrix(law.mean_operator)},
          {"conditional_covariance", matrix(law.conditional_covariance)},
          {"rank", law.rank}};
}

json to_json(const SubcouplingSpec& s) {
  return {{"x", s.x},       {"y", s.y},         {"radius", s.radius}, {"shift", s.shift},
          {"mean", s.mean}, {"sigma", s.sigma}, {"mass", s.mass},     {"restricted_mass", s.restricted_mass}};
}

json to_json(const EmpiricalMeasure& m) {
  json cp = json::array();
  for (const KsCheckpoint& c : m.checkpoints) cp.push_back({{"n", c.n}, {"ks", c.ks}});
  return {{"samples", m.samples}, {"mean", m.mean},     {"variance", m.variance},
          {"edges", m.edges},     {"mass", m.mass},     {"checkpoints", cp}};
}

json to_json(const BlockLaw& b) { return {{"k", b.k}, {"probabilities", b.probabilities}}; }

json to_json(const PairedEnsemble& p) {
  json t = json::array();
  for (std::size_t n = 0; n < p.by_time.size(); ++n) {
    t.push_back({{"time", n}, {"mean", p.by_time[n].mean}, {"min", p.by_time[n].min}, {"max", p.by_time[n].max}});
  }
  return {{"horizon", p.horizon}, {"n_paths", p.n_paths}, {"distance_by_time", t}};
}

json to_json(const MalliavinReport& r) {
  json pts = json::array();
  for (const MalliavinPoint& p : r.points) {
    pts.push_back({{"x", p.x},
                   {"w", p.w},
                   {"m", matrix(p.m)},
                   {"determinant", p.determinant},
                   {"smallest_singular_value", p.smallest_singular_value},
                   {"singular", p.singular},
                   {"gradient_error", p.gradient_error ? json(*p.gradient_error) : json(nullptr)}});
  }
  return {{"method", r.method}, {"fd_step", r.fd_step}, {"any_singular", r.any_singular}, {"points", pts}};
}

json to_json(const StrongFellerReport& r) {
  json pairs = json::array();
  for (const StrongFellerPair& p : r.pairs) {
    pairs.push_back({{"x", p.x},
                     {"y", p.y},
                     {"distance", p.distance},
                     {"tv", p.estimate.tv},
                     {"ci_low", p.estimate.ci_low},
                     {"ci_high", p.estimate.ci_high}});
  }
  return {{"horizon", r.horizon},
          {"n_samples", r.n_samples},
          {"bins_per_dimension", r.bins_per_dimension},
          {"observable", to_string(r.observable)},
          {"lipschitz", r.lipschitz},
          {"pairs", pairs}};
}

json to_json(const IrreducibilityReport& r) {
  json rows = json::array();
  for (const IrreducibilityRow& row : r.rows) {
    rows.push_back({{"start", row.start},
                    {"target", {row.target.lo, row.target.hi}},
                    {"hits", row.hits},
                    {"frequency", row.frequency},
                    {"upper_bound", row.upper_bound ? json(*row.upper_bound) : json(nullptr)}});
  }
  return {{"steps", r.steps}, {"n_samples", r.n_samples}, {"rows", rows}};
}

json to_json(const UltraFellerPoint& p) {
  return {{"x", p.x}, {"c", p.c}, {"tv", p.tv}, {"tv_half", p.tv_half}, {"pf_half", p.pf_half}};
}

}  // namespace skewerg::report
