#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "skewerg/divergence.hpp"

namespace skewerg {

enum class Family { white, ar1, ma1, power_law, custom };

std::string_view to_string(Family f);

struct Atom {
  double location = 0.0;  // radians, in [-pi, pi]
  double mass = 0.0;
};

/// Spectral measure mu = f dx + sum of atoms on [-pi, pi] of a real
/// stationary Gaussian sequence, with the convention
///   C_n = (1/2pi) * integral of e^{inx} mu(dx).
/// Immutable; copies share the density implementation.
class SpectralModel {
 public:
  static SpectralModel white(double c = 1.0);
  /// f(x) = (1 - a^2) / (1 + a^2 - 2a cos x), so C_n = a^|n|.
  static SpectralModel ar1(double alpha);
  /// W_n = xi_n + xi_{n+1}: f(x) = 2(1 + cos x), C = (2, 1, 0, ...).
  static SpectralModel ma1();
  /// X_n = sum_{k>=1} k^-beta xi_{n-k}: f(x) = |Li_beta(e^{ix})|^2, beta > 1/2.
  static SpectralModel power_law(double beta);
  /// Samples f(x_i) on the uniform grid x_i = -pi + 2 pi i / (n - 1),
  /// linearly interpolated. Needs n >= 2.
  static SpectralModel custom(std::vector<double> samples,
                              std::vector<double> singular_points = {});

  SpectralModel scaled(double c) const;
  SpectralModel with_atoms(std::vector<Atom> atoms) const;

  double density(double x) const { return scale_ * (*density_)(x); }

  Family family() const noexcept { return family_; }
  /// alpha for ar1, beta for power_law, c for white; 0 otherwise.
  double parameter() const noexcept { return parameter_; }
  double scale() const noexcept { return scale_; }
  std::span<const double> singular_points() const noexcept { return singular_; }
  /// Points where the density has kinks (custom grid nodes).
  std::span<const double> breakpoints() const noexcept { return *breakpoints_; }
  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::span<const double> custom_samples() const noexcept { return *breakpoint_values_; }

  /// Lag n of the absolutely continuous part in closed form, when the
  /// family has one (white, ar1, ma1).
  std::optional<double> closed_form_lag(std::size_t n) const;

 private:
  SpectralModel() = default;
  void validate() const;

  Family family_ = Family::custom;
  double parameter_ = 0.0;
  double scale_ = 1.0;
  std::shared_ptr<const std::function<double(double)>> density_;
  std::vector<double> singular_;
  std::shared_ptr<const std::vector<double>> breakpoints_ = std::make_shared<std::vector<double>>();
  std::shared_ptr<const std::vector<double>> breakpoint_values_ = std::make_shared<std::vector<double>>();
  std::vector<Atom> atoms_;
};

/// Li_s(e^{ix}) for real s > 0 and x in [-pi, pi] \ {0}, from the expansion
/// around mu = 0 (converges for |x| < 2 pi).
std::complex<double> polylog_unit_circle(double s, double x);

struct CovarianceSequence {
  std::vector<double> lags;  // C_0 .. C_N

  std::size_t max_lag() const noexcept { return lags.empty() ? 0 : lags.size() - 1; }
  double operator[](std::size_t n) const { return lags[n]; }
  /// Smallest eigenvalue of the (order+1)x(order+1) Toeplitz matrix.
  double min_toeplitz_eigenvalue(std::size_t order) const;
};

enum class CovarianceMethod { automatic, quadrature };

/// Lags 0..max_lag. `automatic` uses the closed form for white/ar1/ma1 and
/// batched quadrature otherwise; atoms always contribute
/// (1/2pi) sum mass cos(n location).
CovarianceSequence covariance_from_spectrum(const SpectralModel& model, std::size_t max_lag,
                                            CovarianceMethod method = CovarianceMethod::automatic);

/// One refinement level of a truncated integral.
struct TraceEntry {
  int level = 0;
  double cutoff = 0.0;
  double value = 0.0;
};

struct SzegoResult {
  double sigma2 = 0.0;
  double log_integral = 0.0;  // (1/2pi) int log f, -inf when degenerate
  bool degenerate = false;
  std::vector<TraceEntry> trace;  // (1/2pi) int max(log f, log(eps_k C_0))
  std::string reason;
};

/// sigma^2 = exp((1/2pi) int log f dx). Atoms are ignored.
SzegoResult szego_variance(const SpectralModel& model);

struct QuasiMarkovResult {
  Verdict verdict = Verdict::inconclusive;
  /// (1/2pi) int 1/f dx when the trace converges.
  std::optional<double> reciprocal_integral;
  std::vector<TraceEntry> trace;  // (1/2pi) int min(1/f, 1/(eps_k C_0))
  std::string reason;
};

QuasiMarkovResult quasi_markov_test(const SpectralModel& model);

struct OffWhiteResult {
  Verdict verdict = Verdict::inconclusive;
  std::vector<std::size_t> cutoffs;
  std::vector<double> seminorms;  // sum_{0<|n|<=N} |n| |phi_n|^2
  std::size_t grid_size = 0;
  std::string reason;
};

/// Default cutoffs 2^4 .. 2^16.
std::vector<std::size_t> default_fourier_cutoffs();

OffWhiteResult off_white_test(const SpectralModel& model,
                              std::span<const std::size_t> cutoffs = {});

/// ((1/2pi) int 1/f)^-1 when the quasi-Markov trace converges, 0 when it
/// diverges. Throws Error(Inconclusive) otherwise.
double interpolation_variance(const SpectralModel& model);

struct NoiseClassification {
  bool ergodic = true;
  std::optional<double> sigma2;
  bool degenerate = false;
  Verdict quasi_markov = Verdict::inconclusive;
  Verdict off_white = Verdict::inconclusive;
  SzegoResult szego;
  QuasiMarkovResult quasi_markov_detail;
  OffWhiteResult off_white_detail;
  std::vector<std::string> notes;
};

NoiseClassification classify(const SpectralModel& model,
                             std::span<const std::size_t> fourier_cutoffs = {});

}  // namespace skewerg
