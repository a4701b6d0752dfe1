#include "skewerg/toeplitz.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "skewerg/error.hpp"

namespace skewerg {

PredictionSolution levinson(const CovarianceSequence& cov, std::size_t order) {
  if (cov.lags.empty() || order > cov.max_lag()) {
    throw Error(ErrorKind::InvalidArgument, "levinson order " + std::to_string(order) + " exceeds max_lag");
  }
  if (!(cov[0] > 0.0)) throw Error(ErrorKind::SingularToeplitz, "C_0 <= 0");

  PredictionSolution sol;
  sol.order = order;
  sol.coefficients.reserve(order);
  sol.reflection_coefficients.reserve(order);
  sol.variance_by_order.push_back(cov[0]);

  std::vector<double>& a = sol.coefficients;
  std::vector<double> previous;
  double v = cov[0];
  for (std::size_t k = 1; k <= order; ++k) {
    double acc = cov[k];
    for (std::size_t j = 1; j < k; ++j) acc -= a[j - 1] * cov[k - j];
    const double kappa = acc / v;
    if (!(std::abs(kappa) < 1.0 - 1e-12)) {
      throw Error(ErrorKind::SingularToeplitz,
                  "|kappa_" + std::to_string(k) + "| = " + std::to_string(std::abs(kappa)) + " >= 1 - 1e-12");
    }
    previous = a;
    for (std::size_t j = 1; j < k; ++j) a[j - 1] = previous[j - 1] - kappa * previous[k - j - 1];
    a.push_back(kappa);
    v *= 1.0 - kappa * kappa;
    sol.reflection_coefficients.push_back(kappa);
    sol.variance_by_order.push_back(v);
  }
  sol.innovation_variance = v;
  return sol;
}

double conditional_mean(const PredictionSolution& sol, std::span<const double> past_window) {
  if (past_window.size() != sol.order) {
    throw Error(ErrorKind::LengthMismatch, "window has " + std::to_string(past_window.size()) +
                                               " values, prediction order is " + std::to_string(sol.order));
  }
  double m = 0.0;
  for (std::size_t j = 0; j < sol.order; ++j) m += sol.coefficients[j] * past_window[j];
  return m;
}

InterpolationSolution interpolate_two_sided(const CovarianceSequence& cov, std::size_t window) {
  if (window == 0 || 2 * window > cov.max_lag()) {
    throw Error(ErrorKind::InvalidArgument, "interpolation window needs 1 <= N and 2N <= max_lag");
  }
  // Unknowns ordered W_{-1}..W_{-N}, W_1..W_N.
  const auto n = static_cast<Eigen::Index>(window);
  auto time = [n](Eigen::Index i) { return i < n ? -(i + 1) : i - n + 1; };
  Eigen::MatrixXd t(2 * n, 2 * n);
  Eigen::VectorXd c(2 * n);
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    c(i) = cov[static_cast<std::size_t>(std::abs(time(i)))];
    for (Eigen::Index j = 0; j < 2 * n; ++j) {
      t(i, j) = cov[static_cast<std::size_t>(std::abs(time(i) - time(j)))];
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(t);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::SingularToeplitz, "two-sided covariance not positive definite");
  }
  const Eigen::VectorXd b = llt.solve(c);

  InterpolationSolution out;
  out.window = window;
  out.before.assign(b.data(), b.data() + n);
  out.after.assign(b.data() + n, b.data() + 2 * n);
  out.error_variance = std::max(0.0, cov[0] - c.dot(b));
  return out;
}

Ma1Path ma1_path_from_innovations(std::vector<double> xi) {
  if (xi.size() < 4 || xi.size() % 2 != 0) {
    throw Error(ErrorKind::InsufficientPath, "need innovations xi_{-N}..xi_{N+1} (even count >= 4)");
  }
  Ma1Path p;
  p.half_width = xi.size() / 2 - 1;
  p.xi = std::move(xi);
  p.w.resize(2 * p.half_width + 1);
  for (std::size_t i = 0; i < p.w.size(); ++i) p.w[i] = p.xi[i] + p.xi[i + 1];
  return p;
}

Ma1Path sample_ma1_path(std::size_t half_width, Engine& rng) {
  std::vector<double> xi(2 * half_width + 2);
  for (double& v : xi) v = standard_normal(rng);
  return ma1_path_from_innovations(std::move(xi));
}

double w0_recovery_partial_sum(const Ma1Path& path, std::size_t n) {
  if (n == 0 || n > path.half_width) {
    throw Error(ErrorKind::InsufficientPath, "path covers |n| <= " + std::to_string(path.half_width) +
                                                 ", estimator needs N = " + std::to_string(n));
  }
  const auto big = static_cast<long>(n);
  double sum = 0.0;
  for (long k = 1; k <= big; ++k) {
    const double sign = k % 2 == 0 ? 1.0 : -1.0;
    sum += sign * static_cast<double>(big + 1 - k) * (path.w_at(k) + path.w_at(-k));
  }
  return -sum / static_cast<double>(n);
}

double w0_recovery_residual(const Ma1Path& path, std::size_t n) {
  if (n == 0 || n > path.half_width) throw Error(ErrorKind::InsufficientPath, "path too short for N");
  const auto big = static_cast<long>(n);
  double sum = 0.0;
  for (long k = 1; k <= big; ++k) {
    const double sign = k % 2 == 0 ? 1.0 : -1.0;
    sum += sign * (path.xi_at(k + 1) + path.xi_at(-k));
  }
  return -sum / static_cast<double>(n);
}

}  // namespace skewerg
