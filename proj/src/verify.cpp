#include "skewerg/verify.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "skewerg/diagnostics.hpp"
#include "skewerg/noise.hpp"
#include "skewerg/report.hpp"
#include "skewerg/skew.hpp"
#include "skewerg/spectral.hpp"
#include "skewerg/toeplitz.hpp"

namespace skewerg {
namespace {

using report::number;

struct Outcome {
  std::string observed;
  bool pass;
};

VerificationRow run_check(std::string id, std::string reference, std::string expected,
                          const std::function<Outcome()>& check) {
  VerificationRow row{std::move(id), std::move(reference), std::move(expected), "", false};
  try {
    const Outcome o = check();
    row.observed = o.observed;
    row.pass = o.pass;
  } catch (const std::exception& e) {
    row.observed = std::string("error: ") + e.what();
  }
  return row;
}

std::string list(const std::vector<double>& v, std::size_t n) {
  std::string s = "(";
  for (std::size_t i = 0; i < n && i < v.size(); ++i) s += (i ? ", " : "") + number(v[i]);
  return s + ")";
}

}  // namespace

std::vector<VerificationRow> verify_paper(std::uint64_t seed) {
  const SeedStream seeds(seed);
  std::vector<VerificationRow> rows;
  const SpectralModel ma1 = SpectralModel::ma1();
  const SpectralModel ar1 = SpectralModel::ar1(0.5);
  const SpectralModel power = SpectralModel::power_law(0.75);

  rows.push_back(run_check("ma1_covariance", "MA(1) covariance table", "C = (2, 1, 0, 0) within 1e-10", [&] {
    const auto c = covariance_from_spectrum(ma1, 3, CovarianceMethod::quadrature);
    const bool ok = std::abs(c[0] - 2) < 1e-10 && std::abs(c[1] - 1) < 1e-10 && std::abs(c[2]) < 1e-10 &&
                    std::abs(c[3]) < 1e-10;
    return Outcome{list(c.lags, 4), ok};
  }));

  const NoiseClassification ma1_class = classify(ma1);
  rows.push_back(run_check("ma1_quasi_markov", "MA(1): 1/f has a non-integrable singularity at pi", "no", [&] {
    return Outcome{std::string(to_string(ma1_class.quasi_markov)), ma1_class.quasi_markov == Verdict::no};
  }));
  rows.push_back(run_check("ma1_sigma2", "MA(1) innovation variance", "1 within 1e-4", [&] {
    const double s = ma1_class.sigma2.value_or(NAN);
    return Outcome{number(s), std::abs(s - 1.0) < 1e-4};
  }));
  rows.push_back(run_check("ma1_off_white", "MA(1) log-density not in H^1/2", "no", [&] {
    return Outcome{std::string(to_string(ma1_class.off_white)), ma1_class.off_white == Verdict::no};
  }));

  rows.push_back(run_check("ma1_interpolation_variance", "MA(1): W_0 determined by the W_n, n != 0",
                           "interpolation variance 0", [&] {
                             const double v = interpolation_variance(ma1);
                             return Outcome{number(v), v == 0.0};
                           }));
  rows.push_back(run_check("ma1_classification", "MA(1) classification", "ergodic yes, quasi_markov no, off_white no", [&] {
    const bool ok = ma1_class.ergodic && ma1_class.quasi_markov == Verdict::no && ma1_class.off_white == Verdict::no;
    return Outcome{std::string(ma1_class.ergodic ? "ergodic yes" : "ergodic no") + ", quasi_markov " +
                       std::string(to_string(ma1_class.quasi_markov)) + ", off_white " +
                       std::string(to_string(ma1_class.off_white)),
                   ok};
  }));

  rows.push_back(run_check("ma1_interpolation", "MA(1): W_0 determined by the W_n, n != 0",
                           "error variance < 0.01 at N = 500 and decreasing in N", [&] {
                             const auto c = covariance_from_spectrum(ma1, 1000);
                             double previous = INFINITY;
                             bool decreasing = true;
                             double last = 0.0;
                             for (std::size_t n : {50, 100, 200, 500}) {
                               last = interpolate_two_sided(c, n).error_variance;
                               decreasing = decreasing && last < previous;
                               previous = last;
                             }
                             return Outcome{number(last), decreasing && last < 0.01};
                           }));

  rows.push_back(run_check("ma1_w0_recovery", "MA(1) W_0-recovery identity",
                           "mean squared residual in [1.5e-4, 2.5e-4] (500 paths, N = 1e4)", [&] {
                             const std::size_t n = 10000;
                             double sum = 0.0;
                             double identity_gap = 0.0;
                             for (std::size_t p = 0; p < 500; ++p) {
                               Engine rng = seeds.stream(1).engine(p);
                               const Ma1Path path = sample_ma1_path(n, rng);
                               const double r = w0_recovery_partial_sum(path, n) - path.w_at(0);
                               identity_gap = std::max(identity_gap, std::abs(r - w0_recovery_residual(path, n)));
                               sum += r * r;
                             }
                             const double mse = sum / 500.0;
                             return Outcome{number(mse), mse >= 1.5e-4 && mse <= 2.5e-4 && identity_gap < 1e-9};
                           }));

  rows.push_back(run_check("ar1_covariance", "AR(1) covariance C_n = alpha^n", "C = (1, 0.5, 0.25, 0.125) within 1e-10", [&] {
    const auto c = covariance_from_spectrum(ar1, 3, CovarianceMethod::quadrature);
    bool ok = true;
    for (std::size_t n = 0; n <= 3; ++n) ok = ok && std::abs(c[n] - std::pow(0.5, static_cast<double>(n))) < 1e-10;
    return Outcome{list(c.lags, 4), ok};
  }));

  const NoiseClassification power_class = classify(power);
  rows.push_back(run_check("power_law_off_white", "power-law moving average, beta = 0.75, is not off-white", "no", [&] {
    return Outcome{std::string(to_string(power_class.off_white)), power_class.off_white == Verdict::no};
  }));
  rows.push_back(run_check("power_law_quasi_markov", "power-law moving average is quasi-Markov", "yes", [&] {
    return Outcome{std::string(to_string(power_class.quasi_markov)), power_class.quasi_markov == Verdict::yes};
  }));

  rows.push_back(run_check("binary_uniform", "binary example, p = 1/2: i.i.d. Bernoulli output",
                           "block law at k = 8 uniform for both invariant sets, TV < 1e-12", [&] {
                             BlockLaw uniform;
                             uniform.k = 8;
                             uniform.probabilities.assign(256, 1.0 / 256.0);
                             const double a = total_variation(binary_example_blocks(0.5, InvariantSet::aligned, 8), uniform);
                             const double b = total_variation(binary_example_blocks(0.5, InvariantSet::anti, 8), uniform);
                             return Outcome{number(std::max(a, b)), std::max(a, b) < 1e-12};
                           }));
  rows.push_back(run_check("binary_two_invariant_measures", "binary example, p = 0.3: two extremal invariant measures",
                           "TV(aligned, anti) at k = 8 > 0.05", [&] {
                             const double tv = total_variation(binary_example_blocks(0.3, InvariantSet::aligned, 8),
                                                               binary_example_blocks(0.3, InvariantSet::anti, 8));
                             return Outcome{number(tv), tv > 0.05};
                           }));
  rows.push_back(run_check("binary_aligned_invariant", "binary example: {x = w_0} is invariant",
                           "x_n = w_n for 1000 steps", [&] {
                             const SkewSystem sys = SkewSystem::bernoulli(UpdateMap::binary_example(), 0.5);
                             Engine rng = seeds.stream(2).engine(0);
                             NoiseState noise = initial_noise(sys, rng);
                             const std::vector<double> x0{noise[0].newest()};
                             const Trajectory t = evolve(sys, x0, noise, 1000, rng);
                             std::size_t mismatches = 0;
                             for (std::size_t n = 1; n <= 1000; ++n) mismatches += t.states[n][0] != t.noise[n - 1][0];
                             return Outcome{std::to_string(mismatches) + " mismatches", mismatches == 0};
                           }));

  rows.push_back(run_check("ultrafeller_tv_limit", "ultra-Feller counterexample: TV limit 2/pi",
                           "|TV(1e-3) - 2/pi| < 0.01", [&] {
                             const UltraFellerPoint p = ultrafeller_point(1e-3);
                             return Outcome{number(p.tv), std::abs(p.tv - 2.0 / std::numbers::pi) < 0.01};
                           }));
  rows.push_back(run_check("ultrafeller_strong_feller", "ultra-Feller counterexample: Pf continuous (Riemann-Lebesgue)",
                           "|Pf(x) - 1/2| <= 3x at x = 1e-1, 1e-2, 1e-3 and < 0.02 at 1e-3", [&] {
                             bool within = true;
                             double gap = 0.0;
                             for (double x : {1e-1, 1e-2, 1e-3}) {
                               gap = std::abs(ultrafeller_point(x).pf_half - 0.5);
                               within = within && gap <= 3.0 * x;
                             }
                             return Outcome{number(gap), within && gap < 0.02};
                           }));

  rows.push_back(run_check("ma1_sample_lag2", "MA(1) covariance vanishes beyond lag 1",
                           "empirical C_2 in 0 +- 0.015 (n = 1e5)", [&] {
                             Engine rng = seeds.stream(3).engine(0);
                             const auto s = sample_stationary(ma1, 100000, rng);
                             const auto& v = s.path.values;
                             double c2 = 0.0;
                             for (std::size_t i = 0; i + 2 < v.size(); ++i) c2 += v[i] * v[i + 2];
                             c2 /= static_cast<double>(v.size() - 2);
                             return Outcome{number(c2), std::abs(c2) < 0.015};
                           }));
  return rows;
}

}  // namespace skewerg
