#include "skewerg/runner.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <variant>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "skewerg/diagnostics.hpp"
#include "skewerg/error.hpp"
#include "skewerg/noise.hpp"
#include "skewerg/report.hpp"
#include "skewerg/skew.hpp"
#include "skewerg/spectral.hpp"
#include "skewerg/toeplitz.hpp"
#include "skewerg/verify.hpp"

namespace skewerg {
namespace {

using nlohmann::json;
using report::CsvTable;
using report::number;
using report::to_json;

constexpr Command kCommands[] = {Command::classify, Command::predict,  Command::simulate,
                                 Command::couple,   Command::diagnose, Command::verify_paper};

[[noreturn]] void reject(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

// Recursive merge: keys must exist in `base`, leaves keep their JSON kind
// (any number for numbers; null leaves accept anything).
void merge_strict(json& base, const json& patch, const std::string& path) {
  if (!patch.is_object()) reject(path.empty() ? "/" : path, "expected an object");
  for (const auto& [key, value] : patch.items()) {
    const std::string here = path + "/" + key;
    if (!base.contains(key)) reject(here, "unknown key");
    json& slot = base[key];
    if (slot.is_object()) {
      merge_strict(slot, value, here);
      continue;
    }
    const bool same = slot.is_null() || (slot.is_number() && value.is_number()) ||
                      (slot.is_string() && value.is_string()) || (slot.is_boolean() && value.is_boolean()) ||
                      (slot.is_array() && value.is_array());
    if (!same) reject(here, std::string("expected ") + slot.type_name() + ", got " + value.type_name());
    slot = value;
  }
}

// ---- typed access -------------------------------------------------------

const json& at(const json& node, const char* key, const std::string& path) {
  if (!node.is_object() || !node.contains(key)) reject(path + "/" + key, "missing");
  return node.at(key);
}

double real(const json& node, const char* key, const std::string& path) {
  const json& v = at(node, key, path);
  if (!v.is_number()) reject(path + "/" + key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) reject(path + "/" + key, "expected a finite number");
  return d;
}

std::size_t count(const json& node, const char* key, const std::string& path, std::size_t min = 0) {
  const json& v = at(node, key, path);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    reject(path + "/" + key, "expected a non-negative integer");
  }
  const auto n = v.get<std::uint64_t>();
  if (n < min) reject(path + "/" + key, "must be at least " + std::to_string(min));
  return static_cast<std::size_t>(n);
}

std::string text(const json& node, const char* key, const std::string& path) {
  const json& v = at(node, key, path);
  if (!v.is_string()) reject(path + "/" + key, "expected a string");
  return v.get<std::string>();
}

bool flag(const json& node, const char* key, const std::string& path) {
  const json& v = at(node, key, path);
  if (!v.is_boolean()) reject(path + "/" + key, "expected true or false");
  return v.get<bool>();
}

std::vector<double> reals(const json& v, const std::string& path) {
  if (!v.is_array()) reject(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
      reject(path + "/" + std::to_string(i), "expected a finite number");
    }
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::vector<double> reals(const json& node, const char* key, const std::string& path) {
  return reals(at(node, key, path), path + "/" + key);
}

Interval interval(const json& v, const std::string& path) {
  const std::vector<double> p = reals(v, path);
  if (p.size() != 2 || !(p[0] < p[1])) reject(path, "expected [lo, hi] with lo < hi");
  return {p[0], p[1]};
}

void keys_only(const json& node, std::initializer_list<const char*> keys, const std::string& path) {
  if (!node.is_object()) reject(path, "expected an object");
  for (const auto& [key, value] : node.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) reject(path + "/" + key, "unknown key");
  }
}

// Input errors raised by module constructors count as validation errors.
template <class F>
auto checked(const std::string& path, F&& make) {
  try {
    return make();
  } catch (const Error& e) {
    if (is_numeric(e.kind())) throw;
    reject(path, e.what());
  }
}

// ---- typed configuration -------------------------------------------------

struct ModelConfig {
  SpectralModel model = SpectralModel::white();
  std::string tag;
};

ModelConfig parse_model(const json& m) {
  const std::string p = "/model";
  const std::string family = text(m, "family", p);
  ModelConfig out;
  if (family == "white") {
    const double c = real(m, "c", p);
    out.model = checked(p + "/c", [&] { return SpectralModel::white(c); });
    out.tag = "white(c=" + number(c) + ")";
  } else if (family == "ar1") {
    const double a = real(m, "alpha", p);
    out.model = checked(p + "/alpha", [&] { return SpectralModel::ar1(a); });
    out.tag = "ar1(alpha=" + number(a) + ")";
  } else if (family == "ma1") {
    out.model = SpectralModel::ma1();
    out.tag = "ma1";
  } else if (family == "power_law") {
    const double b = real(m, "beta", p);
    out.model = checked(p + "/beta", [&] { return SpectralModel::power_law(b); });
    out.tag = "power_law(beta=" + number(b) + ")";
  } else if (family == "custom") {
    std::vector<double> samples = reals(m, "samples", p);
    std::vector<double> singular = reals(m, "singular_points", p);
    out.model = checked(p + "/samples", [&] { return SpectralModel::custom(samples, singular); });
    out.tag = "custom(" + std::to_string(samples.size()) + " samples)";
  } else {
    reject(p + "/family", "expected one of white, ar1, ma1, power_law, custom");
  }
  return out;
}

struct SystemConfig {
  SkewSystem system;
  std::string tag;
  std::optional<ModelConfig> model;  // Gaussian noise only
};

UpdateMap parse_map(const json& m, const std::string& p) {
  const std::string kind = text(m, "kind", p);
  if (kind == "linear") return UpdateMap::linear(real(m, "a", p), real(m, "b", p));
  if (kind == "doubling") return UpdateMap::doubling(real(m, "b", p));
  if (kind == "sine") return UpdateMap::sine(real(m, "a", p), real(m, "b", p));
  if (kind == "binary_example") return UpdateMap::binary_example();
  if (kind == "custom_table") {
    const json& t = at(m, "table", p);
    std::vector<std::vector<int>> table;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::string row = p + "/table/" + std::to_string(i);
      if (!t[i].is_array()) reject(row, "expected an array of integers");
      std::vector<int> r;
      for (const json& v : t[i]) {
        if (!v.is_number_integer()) reject(row, "expected an array of integers");
        r.push_back(v.get<int>());
      }
      table.push_back(std::move(r));
    }
    return checked(p + "/table", [&] { return UpdateMap::custom_table(std::move(table)); });
  }
  reject(p + "/kind", "expected one of linear, doubling, sine, binary_example, custom_table");
}

SystemConfig parse_system(const json& config) {
  const std::string p = "/system";
  const json& s = config.at("system");
  const UpdateMap update = parse_map(at(s, "map", p), p + "/map");
  const std::size_t dim = count(s, "state_dim", p, 1);
  const std::string noise = text(s, "noise", p);
  SystemConfig out;
  if (noise == "gaussian") {
    out.model = parse_model(config.at("model"));
    const std::size_t window = count(s, "window", p, 1);
    out.system = checked(p, [&] { return SkewSystem::gaussian(update, out.model->model, window, dim); });
    out.tag = std::string(to_string(update.kind)) + " driven by " + out.model->tag;
  } else if (noise == "bernoulli") {
    const double prob = real(s, "p", p);
    if (!(prob > 0.0 && prob < 1.0)) reject(p + "/p", "expected a probability in (0, 1)");
    out.system = SkewSystem::bernoulli(update, prob, dim);
    out.tag = std::string(to_string(update.kind)) + " driven by bernoulli(p=" + number(prob) + ")";
  } else {
    reject(p + "/noise", "expected gaussian or bernoulli");
  }
  return out;
}

std::vector<double> state(const json& node, const char* key, const std::string& path, const SkewSystem& sys) {
  std::vector<double> x = reals(node, key, path);
  if (x.size() != sys.state_dim) reject(path + "/" + key, "expected " + std::to_string(sys.state_dim) + " coordinates");
  return x;
}

std::string file_text(const CsvTable& t) { return t.str(); }

// ---- commands ------------------------------------------------------------

struct Outcome {
  json result;
  std::vector<OutputFile> data;
};

using Task = std::function<Outcome()>;

Task prepare_classify(const json& config) {
  const ModelConfig m = parse_model(config.at("model"));
  const json& c = config.at("classify");
  const std::size_t max_lag = count(c, "max_lag", "/classify");
  std::vector<std::size_t> cutoffs;
  for (double v : reals(c, "fourier_cutoffs", "/classify")) {
    if (v < 1 || v != std::floor(v)) reject("/classify/fourier_cutoffs", "expected positive integers");
    cutoffs.push_back(static_cast<std::size_t>(v));
  }
  return [m, max_lag, cutoffs] {
    const CovarianceSequence cov = covariance_from_spectrum(m.model, max_lag);
    const NoiseClassification cl = classify(m.model, cutoffs);
    json interp = nullptr;
    if (cl.quasi_markov == Verdict::yes && cl.quasi_markov_detail.reciprocal_integral) {
      interp = 1.0 / *cl.quasi_markov_detail.reciprocal_integral;
    } else if (cl.quasi_markov == Verdict::no) {
      interp = 0.0;
    }
    Outcome o;
    o.result = {{"model", m.tag},
                {"covariance", to_json(cov)},
                {"classification", to_json(cl)},
                {"interpolation_variance", interp}};
    CsvTable lags{{"lag", "covariance"}, {}};
    for (std::size_t n = 0; n < cov.lags.size(); ++n) lags.add({std::to_string(n), number(cov[n])});
    CsvTable seminorms{{"cutoff", "seminorm"}, {}};
    const OffWhiteResult& ow = cl.off_white_detail;
    for (std::size_t i = 0; i < ow.cutoffs.size() && i < ow.seminorms.size(); ++i) {
      seminorms.add({std::to_string(ow.cutoffs[i]), number(ow.seminorms[i])});
    }
    CsvTable traces{{"test", "level", "cutoff", "value"}, {}};
    for (const TraceEntry& e : cl.szego.trace) {
      traces.add({"szego", std::to_string(e.level), number(e.cutoff), number(e.value)});
    }
    for (const TraceEntry& e : cl.quasi_markov_detail.trace) {
      traces.add({"quasi_markov", std::to_string(e.level), number(e.cutoff), number(e.value)});
    }
    o.data = {{"covariance.csv", file_text(lags)}, {"seminorms.csv", file_text(seminorms)},
              {"traces.csv", file_text(traces)}};
    return o;
  };
}

Task prepare_predict(const json& config) {
  const ModelConfig m = parse_model(config.at("model"));
  const json& c = config.at("predict");
  const std::size_t order = count(c, "order", "/predict", 1);
  const std::size_t window = count(c, "interpolation_window", "/predict", 1);
  return [m, order, window] {
    const CovarianceSequence cov = covariance_from_spectrum(m.model, std::max(order, 2 * window));
    const PredictionSolution pred = levinson(cov, order);
    const InterpolationSolution interp = interpolate_two_sided(cov, window);
    const SzegoResult szego = szego_variance(m.model);
    Outcome o;
    json p = to_json(pred);
    p["variance_by_order"] = pred.variance_by_order;
    o.result = {{"model", m.tag},
                {"prediction", p},
                {"interpolation", to_json(interp)},
                {"szego_variance", szego.sigma2},
                {"innovation_gap", pred.innovation_variance - szego.sigma2}};
    CsvTable orders{{"order", "innovation_variance", "reflection_coefficient"}, {}};
    for (std::size_t k = 0; k < pred.variance_by_order.size(); ++k) {
      orders.add({std::to_string(k), number(pred.variance_by_order[k]),
                  k == 0 ? "" : number(pred.reflection_coefficients[k - 1])});
    }
    CsvTable coeffs{{"offset", "coefficient"}, {}};
    for (std::size_t j = window; j >= 1; --j) coeffs.add({"-" + std::to_string(j), number(interp.before[j - 1])});
    for (std::size_t j = 1; j <= window; ++j) coeffs.add({std::to_string(j), number(interp.after[j - 1])});
    o.data = {{"prediction.csv", file_text(orders)}, {"interpolation.csv", file_text(coeffs)}};
    return o;
  };
}

// Stationary law of x for x' = a x + b w driven by white or AR(1) noise.
Cdf linear_reference(const SystemConfig& s) {
  const UpdateMap& u = s.system.update;
  if (u.kind != MapKind::linear || !s.model || std::abs(u.a) >= 0.95) return {};
  const Family f = s.model->model.family();
  if (f != Family::white && f != Family::ar1) return {};
  const std::size_t k = 800;
  const CovarianceSequence cov = covariance_from_spectrum(s.model->model, k);
  double var = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      var += std::pow(u.a, static_cast<double>(i + j)) * cov[i > j ? i - j : j - i];
    }
  }
  const double sd = std::abs(u.b) * std::sqrt(var);
  if (!(sd > 0.0)) return {};
  return [sd](double x) { return normal_cdf(x / sd); };
}

std::string seed_stream_note(Command c, std::uint64_t seed) {
  return "root " + std::to_string(seed) + ", command stream " + std::to_string(static_cast<int>(c));
}

Task prepare_simulate(const json& config, const SeedStream& seeds) {
  const SystemConfig s = parse_system(config);
  const json& c = config.at("simulate");
  const std::string p = "/simulate";
  const std::vector<double> x0 = state(c, "x0", p, s.system);
  const std::size_t horizon = count(c, "horizon", p, 1);
  const std::size_t n_paths = count(c, "n_paths", p, 1);
  const std::size_t bins = count(c, "bins", p, 1);
  return [s, x0, horizon, n_paths, bins, seeds] {
    const TrajectoryEnsemble ens = simulate_ensemble(s.system, x0, horizon, n_paths, seeds.stream(0));
    const EmpiricalMeasure measure =
        krylov_bogoliubov_ensemble(s.system, x0, horizon, n_paths, bins, seeds.stream(1), linear_reference(s));
    const std::size_t d = s.system.state_dim;
    json finals = json::array();
    CsvTable traj{{"path", "time"}, {}};
    for (std::size_t i = 0; i < d; ++i) traj.header.push_back("x" + std::to_string(i + 1));
    for (std::size_t i = 0; i < d; ++i) traj.header.push_back("w" + std::to_string(i + 1));
    for (std::size_t k = 0; k < ens.paths.size(); ++k) {
      const Trajectory& t = ens.paths[k];
      finals.push_back(t.states.back());
      for (std::size_t n = 0; n < t.states.size(); ++n) {
        std::vector<std::string> row{std::to_string(k), std::to_string(n)};
        for (double v : t.states[n]) row.push_back(number(v));
        for (std::size_t i = 0; i < d; ++i) row.push_back(n == 0 ? "" : number(t.noise[n - 1][i]));
        traj.add(std::move(row));
      }
    }
    CsvTable hist{{"lo", "hi", "mass"}, {}};
    for (std::size_t b = 0; b < measure.mass.size(); ++b) {
      hist.add({number(measure.edges[b]), number(measure.edges[b + 1]), number(measure.mass[b])});
    }
    Outcome o;
    o.result = {{"system", s.tag},
                {"horizon", horizon},
                {"n_paths", n_paths},
                {"path_seeds", ens.seeds},
                {"final_states", finals},
                {"invariant_measure", to_json(measure)}};
    o.data = {{"trajectories.csv", file_text(traj)}, {"invariant_measure.csv", file_text(hist)}};
    return o;
  };
}

Task prepare_couple(const json& config, const SeedStream& seeds) {
  const SystemConfig s = parse_system(config);
  const json& c = config.at("couple");
  const std::string p = "/couple";
  const std::vector<double> x0 = state(c, "x0", p, s.system);
  const std::vector<double> y0 = state(c, "y0", p, s.system);
  const std::size_t horizon = count(c, "horizon", p, 1);
  const std::size_t n_paths = count(c, "n_paths", p, 1);
  const json& sc = at(c, "subcoupling", p);
  const std::string q = p + "/subcoupling";
  keys_only(sc, {"enabled", "u", "v", "n_samples", "restricted"}, q);
  const bool with_sub = flag(sc, "enabled", q);
  const Interval u = interval(at(sc, "u", q), q + "/u");
  const Interval v = interval(at(sc, "v", q), q + "/v");
  const std::size_t n_sub = count(sc, "n_samples", q);
  const bool restricted = flag(sc, "restricted", q);
  if (with_sub && !std::holds_alternative<GaussianNoise>(s.system.noise)) {
    reject(q + "/enabled", "subcoupling needs Gaussian noise");
  }
  return [s, x0, y0, horizon, n_paths, with_sub, u, v, n_sub, restricted, seeds] {
    const PairedEnsemble pe = two_point_motion(s.system, x0, y0, horizon, n_paths, seeds.stream(0));
    Outcome o;
    o.result = {{"system", s.tag}, {"two_point_motion", to_json(pe)}, {"subcoupling", nullptr}};
    CsvTable dist{{"time", "mean", "min", "max"}, {}};
    for (std::size_t n = 0; n < pe.by_time.size(); ++n) {
      dist.add({std::to_string(n), number(pe.by_time[n].mean), number(pe.by_time[n].min), number(pe.by_time[n].max)});
    }
    o.data.push_back({"two_point_motion.csv", file_text(dist)});
    if (with_sub) {
      const GaussianNoise& g = std::get<GaussianNoise>(s.system.noise);
      Engine past_rng = seeds.stream(1).engine(0);
      const NoisePath past = initial_noise(s.system, past_rng)[0];
      const SubcouplingSpec spec = subcoupling(g.kernel, past, u, v);
      Engine draw_rng = seeds.stream(1).engine(1);
      const auto pairs = sample_subcoupling(spec, n_sub, restricted, draw_rng);
      json sub = to_json(spec);
      sub["noise_past"] = past.values;
      sub["tv_gaussian"] = tv_gaussian(spec.x, spec.y, g.kernel.sigma2);
      sub["n_samples"] = n_sub;
      sub["restricted"] = restricted;
      o.result["subcoupling"] = sub;
      CsvTable draws{{"z", "z_shifted"}, {}};
      for (const auto& [a, b] : pairs) draws.add({number(a), number(b)});
      o.data.push_back({"subcoupling.csv", file_text(draws)});
    }
    return o;
  };
}

Task prepare_diagnose(const json& config, const SeedStream& seeds) {
  const SystemConfig s = parse_system(config);
  const json& c = config.at("diagnose");
  const std::string p = "/diagnose";

  const json& mj = at(c, "malliavin", p);
  const std::string mp = p + "/malliavin";
  keys_only(mj, {"enabled", "probes", "fd_step"}, mp);
  const bool with_malliavin = flag(mj, "enabled", mp);
  const double fd_step = real(mj, "fd_step", mp);
  if (!(fd_step > 0.0)) reject(mp + "/fd_step", "must be positive");
  std::vector<MalliavinProbe> probes;
  const json& pj = at(mj, "probes", mp);
  if (!pj.is_array()) reject(mp + "/probes", "expected an array");
  for (std::size_t i = 0; i < pj.size(); ++i) {
    const std::string here = mp + "/probes/" + std::to_string(i);
    keys_only(pj[i], {"x", "w"}, here);
    probes.push_back({state(pj[i], "x", here, s.system), state(pj[i], "w", here, s.system)});
  }
  if (with_malliavin && !s.system.update.differentiable()) {
    reject(mp + "/enabled", "the update map is not differentiable in the noise");
  }

  const json& sj = at(c, "strong_feller", p);
  const std::string sp = p + "/strong_feller";
  keys_only(sj, {"enabled", "pairs", "horizon", "n_samples", "bins", "bootstrap", "observable"}, sp);
  const bool with_sf = flag(sj, "enabled", sp);
  StrongFellerOptions sf;
  sf.horizon = count(sj, "horizon", sp, 1);
  sf.n_samples = count(sj, "n_samples", sp, 2);
  sf.bins = count(sj, "bins", sp);
  sf.bootstrap = count(sj, "bootstrap", sp);
  const std::string obs = text(sj, "observable", sp);
  if (obs == "state") {
    sf.observable = Observable::state;
  } else if (obs == "state_and_noise") {
    sf.observable = Observable::state_and_noise;
  } else {
    reject(sp + "/observable", "expected state or state_and_noise");
  }
  std::vector<std::pair<std::vector<double>, std::vector<double>>> pairs;
  const json& prj = at(sj, "pairs", sp);
  if (!prj.is_array()) reject(sp + "/pairs", "expected an array");
  for (std::size_t i = 0; i < prj.size(); ++i) {
    const std::string here = sp + "/pairs/" + std::to_string(i);
    keys_only(prj[i], {"x", "y"}, here);
    pairs.emplace_back(state(prj[i], "x", here, s.system), state(prj[i], "y", here, s.system));
  }
  if (with_sf && s.system.state_dim > 3) reject(sp + "/enabled", "histogram estimates need at most 3 state dimensions");

  const json& ij = at(c, "irreducibility", p);
  const std::string ip = p + "/irreducibility";
  keys_only(ij, {"enabled", "starts", "targets", "steps", "n_samples"}, ip);
  const bool with_irr = flag(ij, "enabled", ip);
  std::vector<std::vector<double>> starts;
  const json& stj = at(ij, "starts", ip);
  if (!stj.is_array()) reject(ip + "/starts", "expected an array");
  for (std::size_t i = 0; i < stj.size(); ++i) {
    const std::string here = ip + "/starts/" + std::to_string(i);
    starts.push_back(reals(stj[i], here));
    if (starts.back().size() != s.system.state_dim) reject(here, "wrong state dimension");
  }
  std::vector<Interval> targets;
  const json& tj = at(ij, "targets", ip);
  if (!tj.is_array()) reject(ip + "/targets", "expected an array");
  for (std::size_t i = 0; i < tj.size(); ++i) targets.push_back(interval(tj[i], ip + "/targets/" + std::to_string(i)));
  const std::size_t steps = count(ij, "steps", ip, 1);
  const std::size_t irr_samples = count(ij, "n_samples", ip, 1);

  const json& uj = at(c, "ultrafeller", p);
  const std::string up = p + "/ultrafeller";
  keys_only(uj, {"enabled", "x"}, up);
  const bool with_uf = flag(uj, "enabled", up);
  const std::vector<double> xs = reals(uj, "x", up);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0 && xs[i] <= 1.0)) reject(up + "/x/" + std::to_string(i), "expected x in (0, 1]");
  }

  return [=] {
    Outcome o;
    o.result = {{"system", s.tag},
                {"malliavin", nullptr},
                {"strong_feller", nullptr},
                {"irreducibility", nullptr},
                {"ultrafeller", nullptr}};
    if (with_malliavin) {
      const MalliavinReport r = malliavin_check(s.system.update, probes, fd_step);
      o.result["malliavin"] = to_json(r);
      CsvTable t{{"probe", "determinant", "smallest_singular_value", "singular", "gradient_error"}, {}};
      for (std::size_t i = 0; i < r.points.size(); ++i) {
        const MalliavinPoint& pt = r.points[i];
        t.add({std::to_string(i), number(pt.determinant), number(pt.smallest_singular_value),
               pt.singular ? "true" : "false", pt.gradient_error ? number(*pt.gradient_error) : ""});
      }
      o.data.push_back({"malliavin.csv", file_text(t)});
    }
    if (with_sf) {
      const StrongFellerReport r = strong_feller_probe(s.system, pairs, sf, seeds.stream(0));
      o.result["strong_feller"] = to_json(r);
      CsvTable t{{"x", "tv", "ci_low", "ci_high"}, {}};
      for (const StrongFellerPair& pr : r.pairs) {
        t.add({number(pr.distance), number(pr.estimate.tv), number(pr.estimate.ci_low), number(pr.estimate.ci_high)});
      }
      o.data.push_back({"strong_feller_tv.csv", file_text(t)});
    }
    if (with_irr) {
      const IrreducibilityReport r = irreducibility_probe(s.system, starts, targets, steps, irr_samples, seeds.stream(1));
      o.result["irreducibility"] = to_json(r);
      CsvTable t{{"start", "target_lo", "target_hi", "hits", "frequency", "upper_bound"}, {}};
      for (const IrreducibilityRow& row : r.rows) {
        std::string start;
        for (std::size_t i = 0; i < row.start.size(); ++i) start += (i ? " " : "") + number(row.start[i]);
        t.add({start, number(row.target.lo), number(row.target.hi), std::to_string(row.hits), number(row.frequency),
               row.upper_bound ? number(*row.upper_bound) : ""});
      }
      o.data.push_back({"irreducibility.csv", file_text(t)});
    }
    if (with_uf) {
      const std::vector<UltraFellerPoint> pts = ultrafeller_counterexample_tv(xs);
      json arr = json::array();
      CsvTable t{{"x", "tv", "ci_low", "ci_high"}, {}};
      for (const UltraFellerPoint& pt : pts) {
        arr.push_back(to_json(pt));
        t.add({number(pt.x), number(pt.tv), number(pt.tv), number(pt.tv)});
      }
      o.result["ultrafeller"] = {{"limit", 2.0 / std::numbers::pi}, {"points", arr}};
      o.data.push_back({"ultrafeller_tv.csv", file_text(t)});
    }
    return o;
  };
}

Task prepare_verify(std::uint64_t seed) {
  return [seed] {
    const std::vector<VerificationRow> rows = verify_paper(seed);
    Outcome o;
    json arr = json::array();
    CsvTable t{{"id", "reference", "expected", "observed", "pass"}, {}};
    std::size_t passed = 0;
    for (const VerificationRow& r : rows) {
      arr.push_back({{"id", r.id}, {"reference", r.reference}, {"expected", r.expected}, {"observed", r.observed},
                     {"pass", r.pass}});
      t.add({r.id, r.reference, r.expected, r.observed, r.pass ? "pass" : "FAIL"});
      passed += r.pass;
    }
    o.result = {{"passed", passed}, {"total", rows.size()}, {"rows", arr}};
    o.data.push_back({"verification.csv", file_text(t)});
    return o;
  };
}

std::vector<std::string> sections_for(Command c) {
  switch (c) {
    case Command::classify: return {"model", "classify"};
    case Command::predict: return {"model", "predict"};
    case Command::simulate: return {"model", "system", "simulate"};
    case Command::couple: return {"model", "system", "couple"};
    case Command::diagnose: return {"model", "system", "diagnose"};
    case Command::verify_paper: return {};
  }
  return {};
}

std::string format_of(const json& resolved) { return resolved.at("format").get<std::string>(); }

std::string write_outputs(const std::filesystem::path& dir, const RunOutput& output, const std::string& report_text,
                          const json& resolved) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) return "cannot create " + dir.string() + ": " + ec.message();
  const std::string report_name = format_of(resolved) == "csv" ? "report.csv" : "report.json";
  auto write = [&dir](const std::string& name, const std::string& content) -> bool {
    std::ofstream f(dir / name, std::ios::binary);
    f << content;
    return static_cast<bool>(f);
  };
  for (const OutputFile& file : output.data) {
    if (!write(file.name, file.content)) return "cannot write " + (dir / file.name).string();
  }
  if (!write(report_name, report_text)) return "cannot write " + (dir / report_name).string();
  return "";
}

}  // namespace

std::string_view to_string(Command c) {
  switch (c) {
    case Command::classify: return "classify";
    case Command::predict: return "predict";
    case Command::simulate: return "simulate";
    case Command::couple: return "couple";
    case Command::diagnose: return "diagnose";
    case Command::verify_paper: return "verify-paper";
  }
  return "unknown";
}

std::optional<Command> parse_command(std::string_view name) {
  for (Command c : kCommands) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

json default_config() {
  const json x0 = json::array({0.0});
  return {
      {"command", nullptr},
      {"seed", 0u},
      {"format", "json"},
      {"out", nullptr},
      {"model",
       {{"family", "ar1"},
        {"alpha", 0.5},
        {"beta", 0.75},
        {"c", 1.0},
        {"samples", json::array()},
        {"singular_points", json::array()}}},
      {"classify", {{"max_lag", 8u}, {"fourier_cutoffs", json::array()}}},
      {"predict", {{"order", 20u}, {"interpolation_window", 50u}}},
      {"system",
       {{"map", {{"kind", "linear"}, {"a", 0.5}, {"b", 1.0}, {"table", json::array()}}},
        {"noise", "gaussian"},
        {"p", 0.5},
        {"window", 8u},
        {"state_dim", 1u}}},
      {"simulate", {{"x0", x0}, {"horizon", 1000u}, {"n_paths", 4u}, {"bins", 40u}}},
      {"couple",
       {{"x0", x0},
        {"y0", json::array({1.0})},
        {"horizon", 50u},
        {"n_paths", 100u},
        {"subcoupling",
         {{"enabled", true},
          {"u", json::array({-0.5, 0.5})},
          {"v", json::array({0.5, 1.5})},
          {"n_samples", 1000u},
          {"restricted", true}}}}},
      {"diagnose",
       {{"malliavin",
         {{"enabled", true},
          {"probes", json::array({{{"x", x0}, {"w", x0}}, {{"x", json::array({1.0})}, {"w", json::array({1.5})}}})},
          {"fd_step", 1e-5}}},
        {"strong_feller",
         {{"enabled", true},
          {"pairs",
           json::array({{{"x", x0}, {"y", json::array({0.05})}},
                        {{"x", x0}, {"y", json::array({0.1})}},
                        {{"x", x0}, {"y", json::array({0.2})}},
                        {{"x", x0}, {"y", json::array({0.4})}}})},
          {"horizon", 1u},
          {"n_samples", 20000u},
          {"bins", 0u},
          {"bootstrap", 200u},
          {"observable", "state"}}},
        {"irreducibility",
         {{"enabled", true},
          {"starts", json::array({x0, json::array({2.0})})},
          {"targets", json::array({json::array({-1.0, 1.0}), json::array({3.0, 4.0})})},
          {"steps", 1u},
          {"n_samples", 10000u}}},
        {"ultrafeller", {{"enabled", true}, {"x", json::array({1.0, 0.1, 0.01, 0.001})}}}}},
  };
}

json resolve_config(Command command, const json& file, const json& overrides) {
  json merged = default_config();
  if (!file.is_null()) merge_strict(merged, file, "");
  if (!overrides.is_null()) merge_strict(merged, overrides, "");
  const json& cmd = merged.at("command");
  if (!cmd.is_null() && (!cmd.is_string() || cmd.get<std::string>() != to_string(command))) {
    reject("/command", "config is for '" + (cmd.is_string() ? cmd.get<std::string>() : cmd.dump()) + "', not '" +
                           std::string(to_string(command)) + "'");
  }
  const json& seed = merged.at("seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
    reject("/seed", "expected an unsigned 64-bit integer");
  }
  const std::string format = merged.at("format").is_string() ? merged.at("format").get<std::string>() : "";
  if (format != "json" && format != "csv") reject("/format", "expected json or csv");
  if (!merged.at("out").is_null() && !merged.at("out").is_string()) reject("/out", "expected a directory path");

  json resolved = {{"command", to_string(command)},
                   {"seed", seed.get<std::uint64_t>()},
                   {"format", format},
                   {"out", merged.at("out")}};
  for (const std::string& section : sections_for(command)) resolved[section] = merged.at(section);
  return resolved;
}

RunOutput execute(Command command, const json& resolved) {
  const std::uint64_t seed = resolved.at("seed").get<std::uint64_t>();
  const SeedStream seeds = SeedStream(seed).stream(static_cast<std::uint64_t>(command));
  RunOutput out;
  out.report = {{"command", to_string(command)},
                {"status", "ok"},
                {"failed_rule", nullptr},
                {"seed_streams", seed_stream_note(command, seed)},
                {"config", resolved},
                {"result", nullptr}};
  Task task;
  try {
    switch (command) {
      case Command::classify: task = prepare_classify(resolved); break;
      case Command::predict: task = prepare_predict(resolved); break;
      case Command::simulate: task = prepare_simulate(resolved, seeds); break;
      case Command::couple: task = prepare_couple(resolved, seeds); break;
      case Command::diagnose: task = prepare_diagnose(resolved, seeds); break;
      case Command::verify_paper: task = prepare_verify(seed); break;
    }
    Outcome o = task();
    out.report["result"] = std::move(o.result);
    out.data = std::move(o.data);
    if (command == Command::verify_paper) {
      const json& r = out.report["result"];
      if (r.at("passed") != r.at("total")) {
        json failed = json::array();
        for (const json& row : r.at("rows")) {
          if (!row.at("pass").get<bool>()) failed.push_back(row.at("id"));
        }
        out.exit_code = kExitNumeric;
        out.report["status"] = "numeric_failure";
        out.report["failed_rule"] = {{"rule", "verification"}, {"failed_checks", failed}};
      }
    }
  } catch (const Error& e) {
    if (!is_numeric(e.kind())) throw ConfigError(e.what());
    out.exit_code = kExitNumeric;
    out.report["status"] = "numeric_failure";
    out.report["failed_rule"] = {{"rule", to_string(e.kind())}, {"message", e.what()}};
    out.report["result"] = nullptr;
    out.data.clear();
  }
  return out;
}

std::string render_report(const RunOutput& output, const json& resolved) {
  if (format_of(resolved) == "csv") return report::flatten(output.report).str();
  return output.report.dump(2) + "\n";
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Skew-product noise experiments", "skewerg"};
  app.require_subcommand(1, 1);

  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
  std::optional<std::string> family;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> scale;

  const auto describe = [](Command c) -> std::string {
    switch (c) {
      case Command::classify: return "covariances, innovation variance and noise classification";
      case Command::predict: return "one-sided prediction and two-sided interpolation";
      case Command::simulate: return "trajectories and the Krylov-Bogoliubov average";
      case Command::couple: return "two-point motion and the Gaussian subcoupling";
      case Command::diagnose: return "Malliavin, strong Feller, irreducibility and ultra-Feller probes";
      case Command::verify_paper: return "built-in reference checks";
    }
    return {};
  };
  for (Command c : kCommands) {
    CLI::App* sub = app.add_subcommand(std::string(to_string(c)), describe(c));
    sub->add_option("--config", config_path, "JSON experiment configuration");
    sub->add_option("--seed", seed, "root seed (unsigned 64-bit)");
    sub->add_option("--out", out_dir, "output directory (default: report on stdout)");
    sub->add_option("--format", format, "report format")->check(CLI::IsMember({"json", "csv"}));
    if (c != Command::verify_paper) {
      sub->add_option("--family", family, "white, ar1, ma1, power_law or custom");
      sub->add_option("--alpha", alpha, "ar1 coefficient");
      sub->add_option("--beta", beta, "power_law exponent");
      sub->add_option("--c", scale, "white noise variance");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitValidation;
  }

  const Command command = *parse_command(app.get_subcommands().front()->get_name());
  json resolved;
  RunOutput output;
  try {
    json file = nullptr;
    if (config_path) {
      std::ifstream in(*config_path, std::ios::binary);
      if (!in) throw ConfigError(*config_path + ": cannot read config");
      try {
        file = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError(*config_path + ": " + e.what());
      }
    }
    json overrides = json::object();
    if (seed) overrides["seed"] = *seed;
    if (format) overrides["format"] = *format;
    if (out_dir) overrides["out"] = *out_dir;
    if (family) overrides["model"]["family"] = *family;
    if (alpha) overrides["model"]["alpha"] = *alpha;
    if (beta) overrides["model"]["beta"] = *beta;
    if (scale) overrides["model"]["c"] = *scale;
    resolved = resolve_config(command, file, overrides);
    if (resolved.at("out").is_string()) {
      const std::filesystem::path dir = resolved.at("out").get<std::string>();
      if (std::filesystem::exists(dir) && !std::filesystem::is_directory(dir)) {
        throw ConfigError("/out: " + dir.string() + " exists and is not a directory");
      }
    }
    output = execute(command, resolved);
  } catch (const ConfigError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  }

  const std::string text = render_report(output, resolved);
  if (resolved.at("out").is_string()) {
    const std::string problem = write_outputs(resolved.at("out").get<std::string>(), output, text, resolved);
    if (!problem.empty()) {
      err << "output error: " << problem << "\n";
      return kExitValidation;
    }
  } else if (command == Command::verify_paper && format_of(resolved) == "csv") {
    out << output.data.front().content;
  } else {
    out << text;
  }
  if (command == Command::verify_paper) {
    const json& r = output.report.at("result");
    err << r.at("passed").get<std::size_t>() << "/" << r.at("total").get<std::size_t>() << " checks passed\n";
  }
  if (output.exit_code == kExitNumeric && command != Command::verify_paper) {
    err << "numeric failure: " << output.report["failed_rule"]["message"].get<std::string>() << "\n";
  }
  return output.exit_code;
}

}  // namespace skewerg
