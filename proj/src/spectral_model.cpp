#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include "skewerg/error.hpp"
#include "skewerg/quadrature.hpp"
#include "skewerg/spectral.hpp"

namespace skewerg {
namespace {

constexpr double kPi = std::numbers::pi;

// Li_s(e^mu) = singular(mu) + sum_k zeta(s - k) mu^k / k!, |mu| < 2 pi, where
// singular(mu) = Gamma(1 - s) (-mu)^(s - 1) for non-integer s and
// mu^(m-1)/(m-1)! (H_{m-1} - log(-mu)) for s = m, whose k = m - 1 term is
// absorbed into the logarithm.
class PolylogSeries {
 public:
  explicit PolylogSeries(double s) : s_(s) {
    const double rounded = std::round(s);
    integer_ = std::abs(s - rounded) < 1e-12;
    m_ = static_cast<int>(rounded);
    coeff_.resize(kTerms);
    double factorial = 1.0;
    for (int k = 0; k < kTerms; ++k) {
      if (k > 0) factorial *= k;
      if (integer_ && k == m_ - 1) {
        coeff_[k] = 0.0;
        continue;
      }
      coeff_[k] = boost::math::zeta(s - k) / factorial;
    }
    if (integer_) {
      harmonic_ = 0.0;
      for (int j = 1; j < m_; ++j) harmonic_ += 1.0 / j;
      inv_factorial_ = 1.0 / boost::math::factorial<double>(static_cast<unsigned>(m_ - 1));
    } else {
      gamma_ = boost::math::tgamma(1.0 - s);
    }
  }

  std::complex<double> operator()(double x) const {
    const std::complex<double> mu(0.0, x);
    std::complex<double> sum = 0.0;
    for (int k = kTerms - 1; k >= 0; --k) sum = sum * mu + coeff_[k];
    const std::complex<double> minus_mu(0.0, -x);
    if (integer_) {
      return sum + std::pow(mu, m_ - 1) * inv_factorial_ * (harmonic_ - std::log(minus_mu));
    }
    return sum + gamma_ * std::pow(minus_mu, s_ - 1.0);
  }

 private:
  static constexpr int kTerms = 64;
  double s_;
  bool integer_ = false;
  int m_ = 0;
  std::vector<double> coeff_;
  double gamma_ = 0.0;
  double harmonic_ = 0.0;
  double inv_factorial_ = 1.0;
};

template <class F>
std::shared_ptr<const std::function<double(double)>> wrap(F f) {
  return std::make_shared<const std::function<double(double)>>(std::move(f));
}

}  // namespace

std::string_view to_string(Family f) {
  switch (f) {
    case Family::white: return "white";
    case Family::ar1: return "ar1";
    case Family::ma1: return "ma1";
    case Family::power_law: return "power_law";
    case Family::custom: return "custom";
  }
  return "custom";
}

std::complex<double> polylog_unit_circle(double s, double x) {
  if (!(s > 0.0)) throw Error(ErrorKind::InvalidArgument, "polylog order must be positive");
  return PolylogSeries(s)(x);
}

SpectralModel SpectralModel::white(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw Error(ErrorKind::InvalidArgument, "white noise level must be positive");
  }
  SpectralModel m;
  m.family_ = Family::white;
  m.parameter_ = c;
  m.density_ = wrap([c](double) { return c; });
  return m;
}

SpectralModel SpectralModel::ar1(double alpha) {
  if (!(std::abs(alpha) < 1.0)) throw Error(ErrorKind::InvalidArgument, "ar1 needs |alpha| < 1");
  SpectralModel m;
  m.family_ = Family::ar1;
  m.parameter_ = alpha;
  m.density_ = wrap([alpha](double x) {
    return (1.0 - alpha * alpha) / (1.0 + alpha * alpha - 2.0 * alpha * std::cos(x));
  });
  m.validate();
  return m;
}

SpectralModel SpectralModel::ma1() {
  SpectralModel m;
  m.family_ = Family::ma1;
  // 2(1 + cos x) written as 4 cos^2(x/2) keeps relative accuracy near pi.
  m.density_ = wrap([](double x) {
    const double c = std::cos(0.5 * x);
    return 4.0 * c * c;
  });
  m.singular_ = {-kPi, kPi};
  m.validate();
  return m;
}

SpectralModel SpectralModel::power_law(double beta) {
  if (!(beta > 0.5) || !std::isfinite(beta)) {
    throw Error(ErrorKind::InvalidArgument, "power_law needs beta > 1/2");
  }
  SpectralModel m;
  m.family_ = Family::power_law;
  m.parameter_ = beta;
  auto series = std::make_shared<const PolylogSeries>(beta);
  m.density_ = wrap([series](double x) {
    if (x == 0.0) return std::numeric_limits<double>::infinity();
    return std::norm((*series)(x));
  });
  m.singular_ = {0.0};
  m.validate();
  return m;
}

SpectralModel SpectralModel::custom(std::vector<double> samples, std::vector<double> singular_points) {
  if (samples.size() < 2) throw Error(ErrorKind::InvalidArgument, "custom density needs >= 2 samples");
  for (double v : samples) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorKind::InvalidArgument, "custom density samples must be finite and >= 0");
    }
  }
  const std::size_t n = samples.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    if (std::abs(samples[i] - samples[n - 1 - i]) > 1e-12 * std::max(1.0, samples[i])) {
      throw Error(ErrorKind::InvalidArgument, "custom density must be symmetric, f(-x) = f(x)");
    }
  }
  for (double s : singular_points) {
    if (!(std::abs(s) <= kPi)) throw Error(ErrorKind::InvalidArgument, "singular point outside [-pi, pi]");
  }
  SpectralModel m;
  m.family_ = Family::custom;
  auto grid = std::make_shared<std::vector<double>>(n);
  for (std::size_t i = 0; i < n; ++i) (*grid)[i] = -kPi + 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n - 1);
  auto values = std::make_shared<const std::vector<double>>(std::move(samples));
  m.density_ = wrap([values](double x) {
    const std::size_t count = values->size();
    const double h = 2.0 * kPi / static_cast<double>(count - 1);
    const double u = std::clamp((x + kPi) / h, 0.0, static_cast<double>(count - 1));
    const auto i = std::min(static_cast<std::size_t>(u), count - 2);
    const double t = u - static_cast<double>(i);
    return (1.0 - t) * (*values)[i] + t * (*values)[i + 1];
  });
  m.breakpoints_ = grid;
  m.breakpoint_values_ = values;
  m.singular_ = std::move(singular_points);
  m.validate();
  return m;
}

SpectralModel SpectralModel::scaled(double c) const {
  if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorKind::InvalidArgument, "scale must be positive");
  SpectralModel m = *this;
  m.scale_ *= c;
  for (Atom& a : m.atoms_) a.mass *= c;
  return m;
}

SpectralModel SpectralModel::with_atoms(std::vector<Atom> atoms) const {
  for (const Atom& a : atoms) {
    if (!(a.mass >= 0.0) || !(std::abs(a.location) <= kPi)) {
      throw Error(ErrorKind::InvalidArgument, "atoms need mass >= 0 and location in [-pi, pi]");
    }
  }
  SpectralModel m = *this;
  m.atoms_ = std::move(atoms);
  return m;
}

void SpectralModel::validate() const {
  for (int j = 1; j < 256; ++j) {
    const double x = kPi * j / 256.0;
    const double fp = density(x);
    const double fm = density(-x);
    if (!(fp >= 0.0) || !(fm >= 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "density negative at x = " + std::to_string(x));
    }
    if (std::abs(fp - fm) > 1e-12 * std::max(1.0, std::abs(fp))) {
      throw Error(ErrorKind::InvalidArgument, "density not symmetric at x = " + std::to_string(x));
    }
  }
}

std::optional<double> SpectralModel::closed_form_lag(std::size_t n) const {
  switch (family_) {
    case Family::white:
      return scale_ * (n == 0 ? parameter_ : 0.0);
    case Family::ar1:
      return scale_ * std::pow(parameter_, static_cast<double>(n));
    case Family::ma1:
      return scale_ * (n == 0 ? 2.0 : n == 1 ? 1.0 : 0.0);
    default:
      return std::nullopt;
  }
}

double CovarianceSequence::min_toeplitz_eigenvalue(std::size_t order) const {
  if (order > max_lag()) throw Error(ErrorKind::InvalidArgument, "order exceeds max_lag");
  const auto n = static_cast<Eigen::Index>(order + 1);
  Eigen::MatrixXd t(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) t(i, j) = lags[static_cast<std::size_t>(std::abs(i - j))];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

CovarianceSequence covariance_from_spectrum(const SpectralModel& model, std::size_t max_lag,
                                            CovarianceMethod method) {
  CovarianceSequence cov;
  cov.lags.assign(max_lag + 1, 0.0);

  const bool closed = method == CovarianceMethod::automatic && model.closed_form_lag(0).has_value();
  if (closed) {
    for (std::size_t n = 0; n <= max_lag; ++n) cov.lags[n] = *model.closed_form_lag(n);
  } else {
    // f is even, so C_n = (1/pi) int_0^pi cos(nx) f(x) dx.
    std::vector<double> singular;
    for (double s : model.singular_points()) singular.push_back(std::abs(s));
    std::vector<double> breaks;
    for (double b : model.breakpoints()) {
      if (b > 0.0) breaks.push_back(b);
    }
    auto f = [&model](double x) { return model.density(x); };
    const auto rule = quad::density_rule(f, 0.0, kPi, singular, breaks, static_cast<double>(max_lag));

    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      const double c1 = std::cos(rule.x[i]);
      double prev = 1.0;
      double cur = c1;
      cov.lags[0] += rule.w[i];
      if (max_lag >= 1) cov.lags[1] += rule.w[i] * c1;
      for (std::size_t n = 2; n <= max_lag; ++n) {
        const double next = 2.0 * c1 * cur - prev;
        prev = cur;
        cur = next;
        cov.lags[n] += rule.w[i] * cur;
      }
    }
    for (double& c : cov.lags) c /= kPi;

    double adaptive = 0.0;
    try {
      adaptive = quad::integrate(f, 0.0, kPi, singular, breaks).value / kPi;
    } catch (const Error& e) {
      throw Error(ErrorKind::NonIntegrableDensity, e.what());
    }
    if (std::abs(adaptive - cov.lags[0]) > 1e-10 * std::max(1.0, adaptive)) {
      throw Error(ErrorKind::NonIntegrableDensity,
                  "fixed-node and adaptive quadrature disagree on C_0: " + std::to_string(cov.lags[0]) +
                      " vs " + std::to_string(adaptive));
    }
  }

  for (const Atom& a : model.atoms()) {
    for (std::size_t n = 0; n <= max_lag; ++n) {
      cov.lags[n] += a.mass * std::cos(static_cast<double>(n) * a.location) / (2.0 * kPi);
    }
  }
  return cov;
}

}  // namespace skewerg
