#pragma once

#include <functional>
#include <span>
#include <vector>

namespace skewerg::quad {

using Integrand = std::function<double(double)>;

struct Options {
  /// Refinement stops once the summed panel error is below this times L1.
  double panel_tolerance = 1e-12;
  /// Initial dyadic levels toward a singular point.
  int max_depth = 24;
  /// Acceptance test on the summed error estimate: err <= abs + rel * L1.
  double abs_tolerance = 1e-10;
  double rel_tolerance = 1e-10;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  /// Integral of |f|, used to judge cancellation.
  double l1 = 0.0;
};

/// Adaptive integral of f over [a, b].
///
/// The interval is split at every singular point and breakpoint inside
/// [a, b]. Pieces adjacent to a singular point s are integrated in the
/// variable u with x = s +- u^8, which makes integrable algebraic and
/// logarithmic endpoint singularities bounded, starting from max_depth
/// dyadic panels toward u = 0. Panels are 31-point Gauss-Kronrod and the
/// worst one is bisected until the error meets panel_tolerance * L1.
/// f is never evaluated exactly at a singular point.
///
/// Throws Error(QuadratureFailure) if the error estimate exceeds the
/// acceptance test or a non-finite value is produced.
Result integrate(const Integrand& f, double a, double b,
                 std::span<const double> singular_points = {},
                 std::span<const double> breakpoints = {}, const Options& options = {});

/// Nodes x_i and weights W_i = w_i * f(x_i) such that sum_i W_i g(x_i)
/// approximates the integral of g * f over [a, b] for every g that is smooth
/// on the scale 1 / max_frequency. Used to evaluate many Fourier lags
/// against one density with a single set of density evaluations.
///
/// Gauss-Legendre (20 points) panels no wider than pi / max_frequency.
/// Within one such width of a singular point the substitution x = s +- u^8
/// is used with 48 dyadic panels in u. Throws Error(NonIntegrableDensity)
/// if the innermost panel still carries more than 1e-12 of the mass.
struct WeightedNodes {
  std::vector<double> x;
  std::vector<double> w;
};

WeightedNodes density_rule(const Integrand& f, double a, double b,
                           std::span<const double> singular_points,
                           std::span<const double> breakpoints, double max_frequency);

}  // namespace skewerg::quad
