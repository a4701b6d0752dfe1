#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "skewerg/rng.hpp"
#include "skewerg/spectral.hpp"
#include "skewerg/toeplitz.hpp"

namespace skewerg {

/// Finite noise past, oldest first: values = (w_{-L+1}, ..., w_0).
struct NoisePath {
  std::vector<double> values;
  std::string model_tag;

  std::size_t window() const noexcept { return values.size(); }
  double newest() const { return values.back(); }
  /// w_{-j}, j = 0 for the newest value.
  double lag(std::size_t j) const { return values[values.size() - 1 - j]; }
};

/// Drops the oldest value and appends `next` (shift after concatenation).
NoisePath concatenate_shift(NoisePath path, double next);

enum class SamplingMethod { cholesky, circulant };

struct StationarySample {
  NoisePath path;
  SamplingMethod method = SamplingMethod::cholesky;
  std::size_t embedding_size = 0;  // circulant only
};

/// Sizes up to this use a Cholesky factor of the Toeplitz matrix.
inline constexpr std::size_t kCholeskyLimit = 4096;

/// Exact draw of (W_1..W_n) ~ N(0, T_n). Cholesky for n <= 4096, circulant
/// embedding above (embedding sizes 2(n-1), 4(n-1), 8(n-1) are tried;
/// eigenvalues >= -1e-8 C_0 are clipped to 0), Cholesky as fallback while
/// n <= 16384. Throws EmbeddingFailure when nothing applies.
StationarySample sample_stationary(const SpectralModel& model, std::size_t n, Engine& rng);
StationarySample sample_stationary(const CovarianceSequence& cov, std::size_t n, Engine& rng,
                                   std::string model_tag = "custom");

/// One-step conditional kernel: w' ~ N(m_L(path), sigma2) with the order-L
/// prediction coefficients.
struct GaussianStepKernel {
  PredictionSolution prediction;
  double sigma2 = 0.0;

  std::size_t order() const noexcept { return prediction.order; }
  double mean(const NoisePath& path) const;
};

/// Kernel from the first L lags of the model. Throws InvalidArgument for
/// degenerate models (sigma2_L <= 0).
GaussianStepKernel make_step_kernel(const SpectralModel& model, std::size_t window);
GaussianStepKernel make_step_kernel(const CovarianceSequence& cov, std::size_t window);

/// Draws w' and returns concatenate_shift(path, w'). Throws WindowTooShort.
NoisePath step(const GaussianStepKernel& kernel, NoisePath path, Engine& rng);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double midpoint() const { return 0.5 * (lo + hi); }
  double half_width() const { return 0.5 * (hi - lo); }
  bool contains(double v) const { return lo < v && v < hi; }
};

/// Coupling of N(m, s^2) with itself shifted by d = y - x: the pair
/// (z, z + d) with z drawn from min{D(z), D(z + d)}.
struct SubcouplingSpec {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.0;
  double shift = 0.0;  // d = y - x
  double mean = 0.0;   // conditional mean of the kernel
  double sigma = 0.0;
  /// 2 Phi(-|d| / (2 sigma)): mass of min{D(z), D(z + d)} over R.
  double mass = 0.0;
  /// Mass of the same density restricted to z in B(x, r), so that the
  /// pair marginals sit below the kernels restricted to U and V.
  double restricted_mass = 0.0;

  double min_density(double z) const;
};

/// x, y are the midpoints of U and V, r the smaller half-width.
SubcouplingSpec subcoupling(const GaussianStepKernel& kernel, const NoisePath& path, Interval u, Interval v);
SubcouplingSpec subcoupling(double mean, double sigma2, Interval u, Interval v);

/// Pairs (z, z + d) from the normalised min-density, optionally restricted
/// to B(x, r).
std::vector<std::pair<double, double>> sample_subcoupling(const SubcouplingSpec& spec, std::size_t n,
                                                          bool restricted, Engine& rng);

/// 1 - 2 Phi(-|m1 - m2| / (2 sigma)).
double tv_gaussian(double mean1, double mean2, double sigma2);

double normal_cdf(double z);

}  // namespace skewerg
