#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>

#include <fftw3.h>

#include "fftw_lock.hpp"
#include "skewerg/error.hpp"
#include "skewerg/quadrature.hpp"
#include "skewerg/spectral.hpp"

namespace skewerg {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegenerateLogIntegral = -50.0;

struct HalfCircle {
  std::vector<double> singular;
  std::vector<double> breaks;

  explicit HalfCircle(const SpectralModel& model) {
    for (double s : model.singular_points()) singular.push_back(std::abs(s));
    for (double b : model.breakpoints()) {
      if (b > 0.0) breaks.push_back(b);
    }
  }

  // (1/2pi) int_{-pi}^{pi} g(f(x)) dx for even f.
  template <class G>
  double mean(const SpectralModel& model, G g) const {
    auto integrand = [&](double x) { return g(model.density(x)); };
    return quad::integrate(integrand, 0.0, kPi, singular, breaks).value / kPi;
  }
};

double density_mass(const SpectralModel& model, const HalfCircle& half) {
  if (auto c0 = model.closed_form_lag(0)) return *c0;
  return half.mean(model, [](double f) { return f; });
}

}  // namespace

SzegoResult szego_variance(const SpectralModel& model) {
  SzegoResult out;
  const HalfCircle half(model);
  const double c0 = density_mass(model, half);
  if (!(c0 > 0.0)) {
    out.degenerate = true;
    out.log_integral = -std::numeric_limits<double>::infinity();
    out.reason = "density integrates to zero";
    return out;
  }

  std::vector<double> negated;
  for (int k = kFirstLevel; k <= kLastLevel; ++k) {
    const double floor_log = std::log(std::ldexp(c0, -k));
    const double value = half.mean(model, [floor_log](double f) { return std::max(std::log(f), floor_log); });
    out.trace.push_back({k, std::ldexp(c0, -k), value});
    negated.push_back(-value);
    if (value < kDegenerateLogIntegral) {
      out.degenerate = true;
      out.log_integral = -std::numeric_limits<double>::infinity();
      out.reason = "truncated log-integral below -50 at level " + std::to_string(k);
      return out;
    }
  }
  const TrendDecision trend = DivergenceRule{}.decide(negated);
  if (trend.trend == Trend::divergent) {
    out.degenerate = true;
    out.log_integral = -std::numeric_limits<double>::infinity();
    out.reason = "truncated log-integral diverges to -inf: " + trend.reason;
    return out;
  }

  out.log_integral = half.mean(model, [](double f) { return std::log(f); });
  if (out.log_integral < kDegenerateLogIntegral) {
    out.degenerate = true;
    out.reason = "log-integral below -50";
    return out;
  }
  out.sigma2 = std::exp(out.log_integral);
  out.reason = "log-integral finite";
  return out;
}

QuasiMarkovResult quasi_markov_test(const SpectralModel& model) {
  QuasiMarkovResult out;
  const HalfCircle half(model);
  double c0 = 0.0;
  try {
    c0 = density_mass(model, half);
  } catch (const Error& e) {
    out.reason = e.what();
    return out;
  }
  if (!(c0 > 0.0)) {
    out.verdict = Verdict::no;
    out.reason = "density integrates to zero";
    return out;
  }

  std::vector<double> values;
  try {
    for (int k = kFirstLevel; k <= kLastLevel; ++k) {
      const double cap = 1.0 / std::ldexp(c0, -k);
      const double value = half.mean(model, [cap](double f) { return std::min(1.0 / f, cap); });
      out.trace.push_back({k, std::ldexp(c0, -k), value});
      values.push_back(value);
    }
  } catch (const Error& e) {
    out.reason = e.what();
    return out;
  }

  const TrendDecision trend = DivergenceRule{}.decide(values);
  out.reason = std::string(to_string(trend.trend)) + ": " + trend.reason;
  switch (trend.trend) {
    case Trend::convergent:
      out.verdict = Verdict::yes;
      try {
        out.reciprocal_integral = half.mean(model, [](double f) { return 1.0 / f; });
      } catch (const Error&) {
        out.reciprocal_integral = values.back();
      }
      break;
    case Trend::divergent:
      out.verdict = Verdict::no;
      break;
    case Trend::undecided:
      out.verdict = Verdict::inconclusive;
      break;
  }
  return out;
}

std::vector<std::size_t> default_fourier_cutoffs() {
  std::vector<std::size_t> c;
  for (int k = 4; k <= 16; ++k) c.push_back(std::size_t{1} << k);
  return c;
}

OffWhiteResult off_white_test(const SpectralModel& model, std::span<const std::size_t> cutoffs) {
  OffWhiteResult out;
  out.cutoffs = cutoffs.empty() ? default_fourier_cutoffs()
                                : std::vector<std::size_t>(cutoffs.begin(), cutoffs.end());
  if (out.cutoffs.empty() || out.cutoffs.front() == 0 ||
      !std::is_sorted(out.cutoffs.begin(), out.cutoffs.end(), std::less_equal<>{}) ) {
    throw Error(ErrorKind::InvalidArgument, "Fourier cutoffs must be positive and strictly increasing");
  }
  if (!model.atoms().empty()) {
    out.verdict = Verdict::no;
    out.reason = "spectral measure has atoms";
    return out;
  }

  const std::size_t grid = std::max<std::size_t>(std::size_t{1} << 22, std::bit_ceil(64 * out.cutoffs.back()));
  out.grid_size = grid;
  const double h = 2.0 * kPi / static_cast<double>(grid);

  double* in = fftw_alloc_real(grid);
  fftw_complex* spec = fftw_alloc_complex(grid / 2 + 1);
  struct Buffers {
    double* in;
    fftw_complex* spec;
    ~Buffers() {
      fftw_free(in);
      fftw_free(spec);
    }
  } buffers{in, spec};

  for (std::size_t j = 0; j < grid; ++j) {
    const double x = -kPi + (static_cast<double>(j) + 0.5) * h;
    const double f = model.density(x);
    if (!(f > 0.0)) {
      out.verdict = Verdict::no;
      out.reason = "NonPositiveDensity: f <= 0 at sample x = " + std::to_string(x);
      return out;
    }
    if (!std::isfinite(f)) {
      out.verdict = Verdict::inconclusive;
      out.reason = "density not finite at sample x = " + std::to_string(x);
      return out;
    }
    in[j] = std::log(f);
  }

  fftw_plan plan;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(grid), in, spec, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }

  // |phi_n| = |spec[n]| / M; phi is real so |phi_{-n}| = |phi_n|.
  const double norm = 1.0 / static_cast<double>(grid);
  double running = 0.0;
  std::size_t n = 1;
  for (std::size_t cut : out.cutoffs) {
    for (; n <= cut; ++n) {
      const double re = spec[n][0] * norm;
      const double im = spec[n][1] * norm;
      running += 2.0 * static_cast<double>(n) * (re * re + im * im);
    }
    out.seminorms.push_back(running);
  }

  const TrendDecision trend = DivergenceRule{}.decide(out.seminorms);
  out.reason = std::string(to_string(trend.trend)) + ": " + trend.reason;
  out.verdict = trend.trend == Trend::convergent  ? Verdict::yes
                : trend.trend == Trend::divergent ? Verdict::no
                                                  : Verdict::inconclusive;
  return out;
}

double interpolation_variance(const SpectralModel& model) {
  const QuasiMarkovResult qm = quasi_markov_test(model);
  switch (qm.verdict) {
    case Verdict::yes:
      return 1.0 / *qm.reciprocal_integral;
    case Verdict::no:
      return 0.0;
    case Verdict::inconclusive:
      break;
  }
  throw Error(ErrorKind::Inconclusive, "reciprocal density integral undecided: " + qm.reason);
}

NoiseClassification classify(const SpectralModel& model, std::span<const std::size_t> fourier_cutoffs) {
  NoiseClassification out;
  out.ergodic = model.atoms().empty();
  if (!out.ergodic) out.notes.push_back("spectral measure has atoms: not ergodic");

  try {
    out.szego = szego_variance(model);
    out.sigma2 = out.szego.sigma2;
    out.degenerate = out.szego.degenerate;
  } catch (const Error& e) {
    out.szego.reason = e.what();
    out.notes.push_back(std::string("sigma2 inconclusive: ") + e.what());
  }

  out.quasi_markov_detail = quasi_markov_test(model);
  out.quasi_markov = out.quasi_markov_detail.verdict;

  try {
    out.off_white_detail = off_white_test(model, fourier_cutoffs);
    out.off_white = out.off_white_detail.verdict;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) throw;
    out.off_white_detail.reason = e.what();
    out.off_white = Verdict::inconclusive;
  }

  if (out.degenerate) {
    if (out.quasi_markov != Verdict::no) out.notes.push_back("degenerate noise forces quasi_markov = no");
    out.quasi_markov = Verdict::no;
    out.off_white = Verdict::no;
  }
  if (out.off_white == Verdict::yes) {
    if (out.quasi_markov == Verdict::inconclusive) {
      out.quasi_markov = Verdict::yes;
      out.notes.push_back("quasi_markov implied by off_white");
    } else if (out.quasi_markov == Verdict::no) {
      out.off_white = Verdict::inconclusive;
      out.notes.push_back("off_white = yes contradicts quasi_markov = no; off_white set inconclusive");
    }
  }
  return out;
}

}  // namespace skewerg
