#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "skewerg/diagnostics.hpp"
#include "skewerg/gaussian.hpp"
#include "skewerg/noise.hpp"
#include "skewerg/runner.hpp"
#include "skewerg/skew.hpp"
#include "skewerg/spectral.hpp"
#include "skewerg/toeplitz.hpp"

using namespace skewerg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double max_entry(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

Outcome ma1_classification() {
  const CovarianceSequence c = covariance_from_spectrum(SpectralModel::ma1(), 8, CovarianceMethod::quadrature);
  double err = 0.0;
  for (std::size_t n = 0; n <= 8; ++n) err = std::max(err, std::abs(c[n] - (n == 0 ? 2.0 : n == 1 ? 1.0 : 0.0)));
  const NoiseClassification k = classify(SpectralModel::ma1());
  const bool pass = err < 1e-10 && k.quasi_markov == Verdict::no && k.sigma2 && std::abs(*k.sigma2 - 1.0) < 1e-4;
  return {pass, "max|C_n - exact| " + fmt("%.2e", err) + ", quasi_markov " + std::string(to_string(k.quasi_markov)) +
                    ", sigma2 " + fmt("%.8f", k.sigma2.value_or(NAN))};
}

Outcome w0_recovery() {
  const std::size_t n = 10000, paths = 500;
  const SeedStream seeds(20240);
  double sq = 0.0;
  for (std::size_t p = 0; p < paths; ++p) {
    Engine rng = seeds.engine(p);
    const Ma1Path path = sample_ma1_path(n, rng);
    const double r = w0_recovery_partial_sum(path, n) - path.w_at(0);
    sq += r * r;
  }
  const double mse = sq / static_cast<double>(paths);
  return {mse >= 1.5e-4 && mse <= 2.5e-4, "mean squared residual " + fmt("%.4e", mse) + " (theory 2e-4)"};
}

Outcome ultrafeller() {
  const UltraFellerPoint p = ultrafeller_point(1e-3);
  const double gap = std::abs(p.tv - 2.0 / std::numbers::pi);
  const double pf = std::abs(p.pf_half - 0.5);
  return {gap < 0.01 && pf < 0.02, "TV " + fmt("%.6f", p.tv) + ", |TV - 2/pi| " + fmt("%.2e", gap) + ", |Pf - 1/2| " + fmt("%.2e", pf)};
}

Outcome binary_blocks() {
  double worst_uniform = 0.0;
  for (InvariantSet s : {InvariantSet::aligned, InvariantSet::anti}) {
    const BlockLaw law = binary_example_blocks(0.5, s, 8);
    double tv = 0.0;
    for (double q : law.probabilities) tv += 0.5 * std::abs(q - 1.0 / 256.0);
    worst_uniform = std::max(worst_uniform, tv);
  }
  const double tv = total_variation(binary_example_blocks(0.3, InvariantSet::aligned, 8),
                                    binary_example_blocks(0.3, InvariantSet::anti, 8));
  return {worst_uniform < 1e-12 && tv > 0.05, "p=1/2 TV to uniform " + fmt("%.1e", worst_uniform) + ", p=0.3 aligned/anti TV " + fmt("%.4f", tv)};
}

Outcome szego_levinson() {
  double worst = 0.0, worst_exact = 0.0;
  for (double a : {0.3, 0.5, 0.9}) {
    const SpectralModel m = SpectralModel::ar1(a);
    const double lev = levinson(covariance_from_spectrum(m, 400), 400).innovation_variance;
    const double s = szego_variance(m).sigma2;
    worst = std::max(worst, std::abs(lev - s));
    worst_exact = std::max(worst_exact, std::abs(s - (1.0 - a * a)));
  }
  return {worst < 1e-6 && worst_exact < 1e-6, "max|levinson - szego| " + fmt("%.2e", worst) + ", max|szego - (1 - a^2)| " + fmt("%.2e", worst_exact)};
}

Outcome interpolation() {
  const double ar = interpolate_two_sided(covariance_from_spectrum(SpectralModel::ar1(0.5), 1001), 500).error_variance;
  const CovarianceSequence ma = covariance_from_spectrum(SpectralModel::ma1(), 1001);
  bool decreasing = true;
  double previous = 2.0, last = 0.0;
  for (std::size_t n : {50, 100, 200, 500}) {
    last = interpolate_two_sided(ma, n).error_variance;
    decreasing = decreasing && last < previous;
    previous = last;
  }
  return {std::abs(ar - 0.6) < 1e-4 && last < 0.01 && decreasing,
          "ar1(0.5) " + fmt("%.8f", ar) + ", ma1 N=500 " + fmt("%.5f", last) + (decreasing ? ", decreasing" : ", not decreasing")};
}

Outcome disintegration() {
  oracle::Gen g(7);
  const std::size_t n = 100000;
  double worst_ratio = 0.0, worst_z = 0.0, worst_tower = 0.0, worst_reduction = 0.0;
  int over = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t dim = g.index(3, 8);
    const Eigen::MatrixXd q = g.pd_matrix(dim);
    const std::vector<std::size_t> p = g.permutation(dim);
    const std::size_t k1 = g.index(1, dim - 2);
    const std::size_t k2 = g.index(k1 + 1, dim - 1);
    const std::vector<std::size_t> i1(p.begin(), p.begin() + static_cast<long>(k1));
    const std::vector<std::size_t> i2(p.begin() + static_cast<long>(k1), p.end());
    const std::vector<std::size_t> second(p.begin() + static_cast<long>(k1), p.begin() + static_cast<long>(k2));
    const std::vector<std::size_t> rest(p.begin() + static_cast<long>(k2), p.end());
    std::vector<std::size_t> both = i1;
    both.insert(both.end(), second.begin(), second.end());

    const GaussianSplitting split(q, i1, i2);
    const ConditionalLaw law = condition(split);
    const Eigen::MatrixXd a = disintegration_sample(split, law, n, g.rng);
    const Eigen::MatrixXd b = direct_sample(q, n, g.rng);
    const double tol = 4.0 * max_entry(q) / std::sqrt(static_cast<double>(n));
    const Eigen::MatrixXd cov_gap = empirical_covariance(a) - empirical_covariance(b);
    worst_ratio = std::max(worst_ratio, max_entry(cov_gap) / tol);
    if (max_entry(cov_gap) >= tol) ++over;
    for (Eigen::Index r = 0; r < q.rows(); ++r) {
      for (Eigen::Index c = 0; c < q.cols(); ++c) {
        const double sd = std::sqrt(2.0 * (q(r, r) * q(c, c) + q(r, c) * q(r, c)) / static_cast<double>(n));
        worst_z = std::max(worst_z, std::abs(cov_gap(r, c)) / sd);
      }
    }

    const ConditionalLaw staged = condition_in_stages(split, second);
    const ConditionalLaw direct = condition(GaussianSplitting(q, both, rest));
    worst_tower = std::max({worst_tower, max_entry(staged.mean_operator - direct.mean_operator),
                            max_entry(staged.conditional_covariance - direct.conditional_covariance)});
    const Eigen::MatrixXd gap = split.block(i2, i2) - law.conditional_covariance;
    worst_reduction = std::min(worst_reduction, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gap).eigenvalues().minCoeff());
  }
  return {worst_ratio < 1.0 && worst_tower < 1e-9 && worst_reduction >= -1e-9,
          "max covariance gap / tolerance " + fmt("%.3f", worst_ratio) + " (" + std::to_string(over) +
              "/50 splittings over), max entry z-score " + fmt("%.2f", worst_z) + ", tower " + fmt("%.1e", worst_tower) +
              ", min eigenvalue of Q22 - cond_cov " + fmt("%.1e", worst_reduction)};
}

Outcome coupling() {
  double identity = 0.0, oracle_gap = 0.0;
  for (double sigma : {0.2, 0.5, 1.0, 2.0}) {
    for (double d : {0.0, 0.1, 0.5, 1.0, 3.0, 6.0}) {
      const SubcouplingSpec s = subcoupling(0.0, sigma * sigma, {-1.0, 1.0}, {d - 1.0, d + 1.0});
      identity = std::max(identity, std::abs(s.mass + tv_gaussian(0.0, d, sigma * sigma) - 1.0));
      oracle_gap = std::max(oracle_gap, std::abs(s.mass - oracle::min_overlap(d, sigma, 1e-4 * sigma)));
    }
  }
  return {identity < 1e-12 && oracle_gap < 1e-6, "max|mass + tv - 1| " + fmt("%.1e", identity) + ", max|mass - oracle| " + fmt("%.1e", oracle_gap)};
}

Outcome off_white() {
  std::vector<std::size_t> base, doubled;
  for (int k = 4; k <= 16; ++k) {
    base.push_back(std::size_t{1} << k);
    doubled.push_back(std::size_t{1} << (k + 1));
  }
  const OffWhiteResult ar = off_white_test(SpectralModel::ar1(0.5), base);
  const double n = static_cast<double>(ar.seminorms.size());
  const double rel = std::abs(ar.seminorms.back() - ar.seminorms[ar.seminorms.size() - 2]) / ar.seminorms.back();
  const double limit = -2.0 * std::log(0.75);
  bool pass = ar.verdict == Verdict::yes && rel < 1e-4 && std::abs(ar.seminorms.back() - limit) < 1e-6 && n > 0;
  std::string detail = "ar1 " + std::string(to_string(ar.verdict)) + " (seminorm " + fmt("%.8f", ar.seminorms.back()) + ")";
  for (const SpectralModel& m : {SpectralModel::ar1(0.5), SpectralModel::power_law(0.75), SpectralModel::ma1()}) {
    const Verdict a = off_white_test(m, base).verdict, b = off_white_test(m, doubled).verdict;
    const Verdict want = m.family() == Family::ar1 ? Verdict::yes : Verdict::no;
    pass = pass && a == want && b == want;
    if (m.family() != Family::ar1) detail += ", " + std::string(to_string(m.family())) + " " + std::string(to_string(a));
    if (a != b) detail += " (changes under doubled cutoffs)";
  }
  return {pass, detail + ", stable under doubled cutoffs to 2^17"};
}

std::string cli_stdout(std::vector<std::string> args, int& code) {
  args.insert(args.begin(), "skewerg");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return out.str();
}

Outcome properties() {
  oracle::Gen g(10);
  std::size_t psd_fail = 0;
  for (int i = 0; i < 40; ++i) {
    const SpectralModel m = g.model();
    const std::size_t n = g.index(1, 64);
    const CovarianceSequence c = covariance_from_spectrum(m, n);
    const Eigen::MatrixXd t = oracle::toeplitz(c.lags, n + 1);
    if (Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(t).eigenvalues().minCoeff() < -1e-8 * c[0]) ++psd_fail;
  }

  double lev_err = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t order = g.index(1, 64);
    const std::vector<double> c = g.ar_mixture(order);
    const PredictionSolution lev = levinson(CovarianceSequence{c}, order);
    const oracle::DensePrediction dense = oracle::dense_prediction(c, order);
    const double scale = std::max(1.0, dense.a.cwiseAbs().maxCoeff());
    for (std::size_t j = 0; j < order; ++j) {
      lev_err = std::max(lev_err, std::abs(lev.coefficients[j] - dense.a(static_cast<Eigen::Index>(j))) / scale);
    }
  }

  double grad_err = 0.0;
  std::vector<MalliavinProbe> probes;
  for (int i = 0; i < 30; ++i) probes.push_back({{g.uniform(-3.0, 3.0)}, {g.uniform(-3.0, 3.0)}});
  for (const UpdateMap& m : {UpdateMap::linear(0.5, 1.3), UpdateMap::sine(0.9, 1.0), UpdateMap::sine(0.1, 4.0)}) {
    for (const MalliavinPoint& p : malliavin_check(m, probes).points) grad_err = std::max(grad_err, p.gradient_error.value_or(1.0));
  }

  const auto cfg = std::filesystem::current_path() / "acceptance_diagnose.json";
  std::ofstream(cfg) << nlohmann::json{{"diagnose",
                                        {{"strong_feller", {{"n_samples", 4000}, {"bootstrap", 20}}},
                                         {"irreducibility", {{"n_samples", 2000}}}}}}
                            .dump();
  std::size_t replay_fail = 0;
  const std::vector<std::vector<std::string>> commands = {
      {"classify", "--family", "power_law", "--beta", "0.75"},
      {"predict", "--family", "ma1"},
      {"simulate", "--seed", "11"},
      {"couple", "--seed", "12"},
      {"diagnose", "--config", cfg.string(), "--seed", "13"},
      {"verify-paper", "--seed", "14"},
  };
  for (const auto& c : commands) {
    int a = -1, b = -1;
    const std::string first = cli_stdout(c, a), second = cli_stdout(c, b);
    if (a != 0 || b != 0 || first != second || first.empty()) ++replay_fail;
  }

  return {psd_fail == 0 && lev_err < 1e-10 && grad_err < 1e-6 && replay_fail == 0,
          "PSD failures " + std::to_string(psd_fail) + "/40, levinson " + fmt("%.1e", lev_err) + ", gradient " +
              fmt("%.1e", grad_err) + ", replay mismatches " + std::to_string(replay_fail) + "/6"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    double budget;  // seconds, 0 when none
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, 10.0, ma1_classification}, {2, 60.0, w0_recovery},    {3, 30.0, ultrafeller}, {4, 5.0, binary_blocks},
      {5, 5.0, szego_levinson},      {6, 30.0, interpolation}, {7, 60.0, disintegration}, {8, 0.0, coupling},
      {9, 0.0, off_white},           {10, 0.0, properties},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget == 0.0 || secs < c.budget;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("criterion %2d: %s  %.2fs%s  %s%s\n", c.id, pass ? "PASS" : "FAIL", secs,
                c.budget > 0.0 ? (" (limit " + fmt("%.0f", c.budget) + "s)").c_str() : "", o.detail.c_str(),
                in_time ? "" : "  [over time]");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
