#include "skewerg/noise.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <fftw3.h>

#include "fftw_lock.hpp"
#include "skewerg/error.hpp"

namespace skewerg {
namespace {

constexpr std::size_t kCholeskyFallbackLimit = 16384;

std::vector<double> cholesky_draw(const CovarianceSequence& cov, std::size_t n, Engine& rng) {
  const auto size = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd t(size, size);
  for (Eigen::Index i = 0; i < size; ++i) {
    for (Eigen::Index j = 0; j < size; ++j) t(i, j) = cov[static_cast<std::size_t>(std::abs(i - j))];
  }
  Eigen::LLT<Eigen::MatrixXd> llt(t);
  Eigen::MatrixXd factor;
  if (llt.info() == Eigen::Success) {
    factor = llt.matrixL();
  } else {
    // Positive semidefinite but singular (e.g. tiny eigenvalues): LDLT with
    // clipped pivots.
    Eigen::LDLT<Eigen::MatrixXd> ldlt(t);
    if (ldlt.info() != Eigen::Success) throw Error(ErrorKind::EmbeddingFailure, "Toeplitz factorisation failed");
    const Eigen::VectorXd d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd l = ldlt.matrixL();
    factor = ldlt.transpositionsP().transpose() * (l * d.asDiagonal());
  }
  Eigen::VectorXd z(size);
  for (Eigen::Index i = 0; i < size; ++i) z(i) = standard_normal(rng);
  const Eigen::VectorXd x = factor * z;
  return {x.data(), x.data() + size};
}

struct FftwComplex {
  fftw_complex* data;
  explicit FftwComplex(std::size_t n) : data(fftw_alloc_complex(n)) {}
  ~FftwComplex() { fftw_free(data); }
  FftwComplex(const FftwComplex&) = delete;
  FftwComplex& operator=(const FftwComplex&) = delete;
};

void run_forward(FftwComplex& buf, std::size_t m) {
  fftw_plan plan;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(m), buf.data, buf.data, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(detail::fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

// Eigenvalues of the circulant with first row (C_0..C_M, C_{M-1}..C_1),
// or empty if one falls below -1e-8 C_0.
std::vector<double> circulant_eigenvalues(const CovarianceSequence& cov, std::size_t half) {
  const std::size_t m = 2 * half;
  FftwComplex buf(m);
  for (std::size_t j = 0; j < m; ++j) {
    buf.data[j][0] = cov[j <= half ? j : m - j];
    buf.data[j][1] = 0.0;
  }
  run_forward(buf, m);
  std::vector<double> lambda(m);
  for (std::size_t k = 0; k < m; ++k) {
    if (buf.data[k][0] < -1e-8 * cov[0]) return {};
    lambda[k] = std::max(0.0, buf.data[k][0]);
  }
  return lambda;
}

std::vector<double> circulant_draw(const std::vector<double>& lambda, std::size_t n, Engine& rng) {
  const std::size_t m = lambda.size();
  FftwComplex buf(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double s = std::sqrt(lambda[k] / static_cast<double>(m));
    buf.data[k][0] = s * standard_normal(rng);
    buf.data[k][1] = s * standard_normal(rng);
  }
  run_forward(buf, m);
  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) x[j] = buf.data[j][0];
  return x;
}

double truncated_mass(double mu, double sigma, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  return normal_cdf((hi - mu) / sigma) - normal_cdf((lo - mu) / sigma);
}

// Inverse-CDF draw from N(mu, sigma^2) restricted to (lo, hi); works on the
// side of the mean where the CDF keeps precision.
double truncated_normal(double mu, double sigma, double lo, double hi, Engine& rng) {
  boost::math::normal_distribution<double> n01;
  double a = (lo - mu) / sigma;
  double b = (hi - mu) / sigma;
  double flip = 1.0;
  if (a > 0.0) {
    flip = -1.0;
    std::swap(a, b);
    a = -a;
    b = -b;
  }
  const double pa = std::isinf(a) ? 0.0 : boost::math::cdf(n01, a);
  const double pb = std::isinf(b) ? 1.0 : boost::math::cdf(n01, b);
  std::uniform_real_distribution<double> u(pa, pb);
  const double p = std::clamp(u(rng), std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0));
  const double z = std::clamp(boost::math::quantile(n01, p), a, b);
  return mu + sigma * flip * z;
}

struct Piece {
  double center;
  double lo;
  double hi;
};

// min{D(z), D(z + d)} = D(z) on one side of c = m - d/2 and D(z + d) on the
// other; each side is a truncated normal.
std::array<Piece, 2> min_density_pieces(const SubcouplingSpec& s, bool restricted) {
  const double inf = std::numeric_limits<double>::infinity();
  const double c = s.mean - 0.5 * s.shift;
  std::array<Piece, 2> p = s.shift >= 0.0 ? std::array<Piece, 2>{Piece{s.mean, -inf, c}, Piece{s.mean - s.shift, c, inf}}
                                          : std::array<Piece, 2>{Piece{s.mean - s.shift, -inf, c}, Piece{s.mean, c, inf}};
  if (restricted) {
    for (Piece& q : p) {
      q.lo = std::max(q.lo, s.x - s.radius);
      q.hi = std::min(q.hi, s.x + s.radius);
    }
  }
  return p;
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

NoisePath concatenate_shift(NoisePath path, double next) {
  if (!path.values.empty()) {
    std::rotate(path.values.begin(), path.values.begin() + 1, path.values.end());
    path.values.back() = next;
  } else {
    path.values.push_back(next);
  }
  return path;
}

StationarySample sample_stationary(const CovarianceSequence& cov, std::size_t n, Engine& rng,
                                   std::string model_tag) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "sample length must be >= 1");
  if (cov.max_lag() + 1 < n) throw Error(ErrorKind::InvalidArgument, "covariance shorter than sample length");
  if (!(cov[0] > 0.0)) throw Error(ErrorKind::InvalidArgument, "degenerate model: C_0 <= 0");

  StationarySample out;
  out.path.model_tag = std::move(model_tag);
  if (n <= kCholeskyLimit) {
    out.method = SamplingMethod::cholesky;
    out.path.values = cholesky_draw(cov, n, rng);
    return out;
  }
  for (std::size_t factor = 1; factor <= 4; factor *= 2) {
    const std::size_t half = factor * (n - 1);
    if (half > cov.max_lag()) break;
    const std::vector<double> lambda = circulant_eigenvalues(cov, half);
    if (lambda.empty()) continue;
    out.method = SamplingMethod::circulant;
    out.embedding_size = lambda.size();
    out.path.values = circulant_draw(lambda, n, rng);
    return out;
  }
  if (n <= kCholeskyFallbackLimit) {
    out.method = SamplingMethod::cholesky;
    out.path.values = cholesky_draw(cov, n, rng);
    return out;
  }
  throw Error(ErrorKind::EmbeddingFailure,
              "circulant embedding has negative eigenvalues and n = " + std::to_string(n) +
                  " exceeds the Cholesky fallback limit");
}

StationarySample sample_stationary(const SpectralModel& model, std::size_t n, Engine& rng) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "sample length must be >= 1");
  // Larger embeddings need lags beyond n - 1; only cheap for closed forms.
  const bool closed = model.closed_form_lag(0).has_value();
  const std::size_t lags = n <= kCholeskyLimit || !closed ? n - 1 : 4 * (n - 1);
  const CovarianceSequence cov = covariance_from_spectrum(model, lags);
  return sample_stationary(cov, n, rng, std::string(to_string(model.family())));
}

double GaussianStepKernel::mean(const NoisePath& path) const {
  if (path.window() < order()) {
    throw Error(ErrorKind::WindowTooShort, "noise window " + std::to_string(path.window()) +
                                               " shorter than kernel order " + std::to_string(order()));
  }
  double m = 0.0;
  for (std::size_t j = 0; j < order(); ++j) m += prediction.coefficients[j] * path.lag(j);
  return m;
}

GaussianStepKernel make_step_kernel(const CovarianceSequence& cov, std::size_t window) {
  GaussianStepKernel k;
  k.prediction = levinson(cov, window);
  k.sigma2 = k.prediction.innovation_variance;
  if (!(k.sigma2 > 0.0)) throw Error(ErrorKind::InvalidArgument, "degenerate noise: innovation variance 0");
  return k;
}

GaussianStepKernel make_step_kernel(const SpectralModel& model, std::size_t window) {
  return make_step_kernel(covariance_from_spectrum(model, window), window);
}

NoisePath step(const GaussianStepKernel& kernel, NoisePath path, Engine& rng) {
  const double m = kernel.mean(path);
  return concatenate_shift(std::move(path), m + std::sqrt(kernel.sigma2) * standard_normal(rng));
}

double SubcouplingSpec::min_density(double z) const {
  auto d = [this](double v) {
    const double u = (v - mean) / sigma;
    return std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * std::numbers::pi));
  };
  return std::min(d(z), d(z + shift));
}

SubcouplingSpec subcoupling(double mean, double sigma2, Interval u, Interval v) {
  if (!(u.lo < u.hi) || !(v.lo < v.hi)) throw Error(ErrorKind::EmptyInterval, "U and V must be nonempty open intervals");
  if (!(sigma2 > 0.0)) throw Error(ErrorKind::InvalidArgument, "kernel variance must be positive");
  SubcouplingSpec s;
  s.x = u.midpoint();
  s.y = v.midpoint();
  s.radius = std::min(u.half_width(), v.half_width());
  s.shift = s.y - s.x;
  s.mean = mean;
  s.sigma = std::sqrt(sigma2);
  s.mass = 2.0 * normal_cdf(-std::abs(s.shift) / (2.0 * s.sigma));
  for (const Piece& p : min_density_pieces(s, true)) s.restricted_mass += truncated_mass(p.center, s.sigma, p.lo, p.hi);
  return s;
}

SubcouplingSpec subcoupling(const GaussianStepKernel& kernel, const NoisePath& path, Interval u, Interval v) {
  return subcoupling(kernel.mean(path), kernel.sigma2, u, v);
}

std::vector<std::pair<double, double>> sample_subcoupling(const SubcouplingSpec& spec, std::size_t n,
                                                          bool restricted, Engine& rng) {
  const auto pieces = min_density_pieces(spec, restricted);
  std::array<double, 2> mass{};
  for (std::size_t i = 0; i < 2; ++i) mass[i] = truncated_mass(pieces[i].center, spec.sigma, pieces[i].lo, pieces[i].hi);
  if (!(mass[0] + mass[1] > 0.0)) throw Error(ErrorKind::InvalidArgument, "subcoupling has zero mass");
  std::bernoulli_distribution first(mass[0] / (mass[0] + mass[1]));
  std::vector<std::pair<double, double>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Piece& p = pieces[first(rng) ? 0 : 1];
    const double z = truncated_normal(p.center, spec.sigma, p.lo, p.hi, rng);
    out.emplace_back(z, z + spec.shift);
  }
  return out;
}

double tv_gaussian(double mean1, double mean2, double sigma2) {
  if (!(sigma2 > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma2 must be positive");
  return 1.0 - 2.0 * normal_cdf(-std::abs(mean1 - mean2) / (2.0 * std::sqrt(sigma2)));
}

}  // namespace skewerg
