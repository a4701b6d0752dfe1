#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "skewerg/rng.hpp"
#include "skewerg/spectral.hpp"

namespace skewerg {

/// Window ordering: index 1 is the most recent past value w_{-1}.
struct PredictionSolution {
  std::size_t order = 0;
  std::vector<double> coefficients;             // a_1..a_L
  double innovation_variance = 0.0;             // sigma^2_L
  std::vector<double> reflection_coefficients;  // kappa_1..kappa_L
  std::vector<double> variance_by_order;        // sigma^2_0..sigma^2_L
};

/// Levinson-Durbin recursion on the Yule-Walker system T_L a = (C_1..C_L).
/// Throws SingularToeplitz when |kappa_j| >= 1 - 1e-12.
PredictionSolution levinson(const CovarianceSequence& cov, std::size_t order);

/// sum_j a_j w_{-j}; window[0] = w_{-1}.
double conditional_mean(const PredictionSolution& sol, std::span<const double> past_window);

struct InterpolationSolution {
  std::size_t window = 0;
  std::vector<double> before;  // b_{-1}, ..., b_{-N}
  std::vector<double> after;   // b_1, ..., b_N
  double error_variance = 0.0;
};

/// Best linear estimate of W_0 from W_{-N..-1} and W_{1..N}.
InterpolationSolution interpolate_two_sided(const CovarianceSequence& cov, std::size_t window);

/// Innovations xi_{-N}..xi_{N+1} and W_n = xi_n + xi_{n+1} for n = -N..N.
struct Ma1Path {
  std::size_t half_width = 0;
  std::vector<double> xi;
  std::vector<double> w;

  double xi_at(long n) const { return xi[static_cast<std::size_t>(n + static_cast<long>(half_width))]; }
  double w_at(long n) const { return w[static_cast<std::size_t>(n + static_cast<long>(half_width))]; }
};

Ma1Path sample_ma1_path(std::size_t half_width, Engine& rng);
Ma1Path ma1_path_from_innovations(std::vector<double> xi);

/// -(1/N) sum_{n=1}^N (-1)^n (N + 1 - n) (W_n + W_{-n}).
double w0_recovery_partial_sum(const Ma1Path& path, std::size_t n);

/// -(1/N) sum_{n=1}^N (-1)^n (xi_{n+1} + xi_{-n}), which equals the estimator
/// minus W_0.
double w0_recovery_residual(const Ma1Path& path, std::size_t n);

}  // namespace skewerg
