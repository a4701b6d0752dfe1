#include "skewerg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <string>

#include "skewerg/error.hpp"
#include "skewerg/quadrature.hpp"

namespace skewerg {
namespace {

constexpr std::size_t kMaxProbeDimension = 3;

std::vector<double> observe(const std::vector<double>& x, const NoiseState& noise, Observable o) {
  std::vector<double> v = x;
  if (o == Observable::state_and_noise) {
    for (const NoisePath& p : noise) v.push_back(p.newest());
  }
  return v;
}

std::vector<std::vector<double>> solution_law_samples(const SkewSystem& sys, const std::vector<double>& x0,
                                                      const NoiseState& past, const StrongFellerOptions& opt,
                                                      Engine& rng) {
  std::vector<std::vector<double>> out;
  out.reserve(opt.n_samples);
  for (std::size_t s = 0; s < opt.n_samples; ++s) {
    std::vector<double> x = x0;
    NoiseState noise = past;
    for (std::size_t n = 0; n < opt.horizon; ++n) transition(sys, x, noise, rng);
    out.push_back(observe(x, noise, opt.observable));
  }
  return out;
}

// Cell probabilities of both sample sets on a common grid, occupied cells only.
struct Histogram2 {
  std::vector<double> p;
  std::vector<double> q;
};

Histogram2 common_histogram(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b,
                            std::size_t bins) {
  const std::size_t dim = a.empty() ? (b.empty() ? 0 : b[0].size()) : a[0].size();
  std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
  for (const auto* set : {&a, &b}) {
    for (const auto& v : *set) {
      for (std::size_t d = 0; d < dim; ++d) {
        lo[d] = std::min(lo[d], v[d]);
        hi[d] = std::max(hi[d], v[d]);
      }
    }
  }
  auto cell = [&](const std::vector<double>& v) {
    std::uint64_t idx = 0;
    for (std::size_t d = 0; d < dim; ++d) {
      std::size_t k = 0;
      if (hi[d] > lo[d]) {
        k = std::min(bins - 1, static_cast<std::size_t>((v[d] - lo[d]) / (hi[d] - lo[d]) * static_cast<double>(bins)));
      }
      idx = idx * bins + k;
    }
    return idx;
  };
  std::map<std::uint64_t, std::pair<double, double>> counts;
  for (const auto& v : a) counts[cell(v)].first += 1.0;
  for (const auto& v : b) counts[cell(v)].second += 1.0;
  Histogram2 h;
  for (const auto& [key, c] : counts) {
    h.p.push_back(a.empty() ? 0.0 : c.first / static_cast<double>(a.size()));
    h.q.push_back(b.empty() ? 0.0 : c.second / static_cast<double>(b.size()));
  }
  return h;
}

double half_l1(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

std::vector<double> multinomial_resample(const std::vector<double>& probs, std::size_t n, Engine& rng) {
  std::vector<double> out(probs.size(), 0.0);
  std::size_t left = n;
  double remaining = 1.0;
  for (std::size_t i = 0; i < probs.size() && left > 0; ++i) {
    const double pr = remaining > 0.0 ? std::clamp(probs[i] / remaining, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::size_t> bin(left, pr);
    const std::size_t k = i + 1 == probs.size() ? left : bin(rng);
    out[i] = static_cast<double>(k) / static_cast<double>(n);
    left -= k;
    remaining -= probs[i];
  }
  return out;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  const double t = pos - static_cast<double>(i);
  return i + 1 < v.size() ? (1.0 - t) * v[i] + t * v[i + 1] : v[i];
}

MalliavinPoint malliavin_point(const VectorMap& phi, const MalliavinProbe& probe, double h) {
  const auto n = static_cast<Eigen::Index>(phi(probe.x, probe.w).size());
  const auto d = static_cast<Eigen::Index>(probe.w.size());
  Eigen::MatrixXd j(n, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    std::vector<double> up = probe.w;
    std::vector<double> down = probe.w;
    up[static_cast<std::size_t>(k)] += h;
    down[static_cast<std::size_t>(k)] -= h;
    const std::vector<double> fu = phi(probe.x, up);
    const std::vector<double> fd = phi(probe.x, down);
    for (Eigen::Index i = 0; i < n; ++i) j(i, k) = (fu[static_cast<std::size_t>(i)] - fd[static_cast<std::size_t>(i)]) / (2.0 * h);
  }
  MalliavinPoint pt;
  pt.x = probe.x;
  pt.w = probe.w;
  pt.jacobian = j;
  pt.m = j * j.transpose();
  pt.determinant = pt.m.determinant();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(pt.m);
  pt.smallest_singular_value = n == 0 ? 0.0 : svd.singularValues().minCoeff();
  pt.singular = pt.smallest_singular_value < kMalliavinSingularThreshold;
  return pt;
}

// Points in (0, 1) where c (1 + sin(y/x)) - 1 changes sign.
std::vector<double> kink_points(double x, double c) {
  const double s0 = 1.0 / c - 1.0;
  std::vector<double> out;
  if (!(std::abs(s0) <= 1.0)) return out;
  const double base = std::asin(s0);
  const double top = 1.0 / x;
  for (double k = 0.0; 2.0 * std::numbers::pi * k + base - std::numbers::pi <= top; k += 1.0) {
    for (double theta : {base + 2.0 * std::numbers::pi * k, std::numbers::pi - base + 2.0 * std::numbers::pi * k}) {
      if (theta > 0.0 && theta < top) out.push_back(theta * x);
    }
  }
  return out;
}

std::vector<double> uniform_breaks(double a, double b, double width) {
  std::vector<double> out;
  const auto pieces = static_cast<std::size_t>(std::ceil((b - a) / width));
  for (std::size_t i = 1; i < pieces; ++i) out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(pieces));
  return out;
}

}  // namespace

std::string_view to_string(Observable o) { return o == Observable::state ? "state" : "state_and_noise"; }

MalliavinReport malliavin_check(const VectorMap& phi, const std::vector<MalliavinProbe>& probes, double fd_step) {
  if (!(fd_step > 0.0)) throw Error(ErrorKind::InvalidArgument, "fd_step must be positive");
  MalliavinReport r;
  r.fd_step = fd_step;
  for (const MalliavinProbe& p : probes) {
    r.points.push_back(malliavin_point(phi, p, fd_step));
    r.any_singular = r.any_singular || r.points.back().singular;
  }
  return r;
}

MalliavinReport malliavin_check(const UpdateMap& update, const std::vector<MalliavinProbe>& probes, double fd_step) {
  if (!update.differentiable()) {
    throw Error(ErrorKind::InvalidArgument, std::string("update map ") + std::string(to_string(update.kind)) +
                                                " is not differentiable in the noise");
  }
  for (const MalliavinProbe& p : probes) {
    if (p.x.size() != p.w.size()) throw Error(ErrorKind::LengthMismatch, "componentwise maps need dim(w) = dim(x)");
  }
  const VectorMap phi = [&update](const std::vector<double>& x, const std::vector<double>& w) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = update.apply(x[i], w[i], 0.0);
    return out;
  };
  MalliavinReport r = malliavin_check(phi, probes, fd_step);
  for (MalliavinPoint& pt : r.points) {
    double err = 0.0;
    for (Eigen::Index i = 0; i < pt.jacobian.rows(); ++i) {
      for (Eigen::Index k = 0; k < pt.jacobian.cols(); ++k) {
        const auto c = static_cast<std::size_t>(i);
        const double exact = i == k ? *update.noise_derivative(pt.x[c], pt.w[c]) : 0.0;
        err = std::max(err, std::abs(pt.jacobian(i, k) - exact) / std::max(1.0, std::abs(exact)));
      }
    }
    pt.gradient_error = err;
  }
  return r;
}

TvEstimate histogram_tv(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b,
                        std::size_t bins_per_dimension, std::size_t bootstrap, Engine& rng) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::InvalidArgument, "histogram TV needs samples on both sides");
  const Histogram2 h = common_histogram(a, b, std::max<std::size_t>(bins_per_dimension, 1));
  TvEstimate e;
  e.tv = half_l1(h.p, h.q);
  std::vector<double> boot;
  boot.reserve(bootstrap);
  for (std::size_t r = 0; r < bootstrap; ++r) {
    boot.push_back(half_l1(multinomial_resample(h.p, a.size(), rng), multinomial_resample(h.q, b.size(), rng)));
  }
  e.ci_low = bootstrap ? quantile(boot, 0.025) : e.tv;
  e.ci_high = bootstrap ? quantile(boot, 0.975) : e.tv;
  return e;
}

StrongFellerReport strong_feller_probe(const SkewSystem& sys,
                                       const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs,
                                       const StrongFellerOptions& options, const SeedStream& seeds) {
  if (sys.state_dim > kMaxProbeDimension) {
    throw Error(ErrorKind::DimensionTooHigh, "histogram TV supports at most 3 state dimensions");
  }
  if (options.n_samples == 0) throw Error(ErrorKind::InvalidArgument, "n_samples must be >= 1");
  StrongFellerReport r;
  r.horizon = options.horizon;
  r.n_samples = options.n_samples;
  r.observable = options.observable;
  r.bins_per_dimension = options.bins ? options.bins
                                      : static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(options.n_samples))));

  NoiseState past;
  if (options.noise_past) {
    past = *options.noise_past;
  } else {
    Engine rng = seeds.engine(0);
    past = initial_noise(sys, rng);
  }

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [x, y] = pairs[i];
    StrongFellerPair out;
    out.x = x;
    out.y = y;
    double d2 = 0.0;
    for (std::size_t k = 0; k < x.size() && k < y.size(); ++k) d2 += (x[k] - y[k]) * (x[k] - y[k]);
    out.distance = std::sqrt(d2);
    if (x == y) {
      r.pairs.push_back(out);
      continue;
    }
    const SeedStream pair_seeds = seeds.stream(i + 1);
    Engine rx = pair_seeds.engine(0);
    Engine ry = pair_seeds.engine(1);
    Engine rb = pair_seeds.engine(2);
    const auto sx = solution_law_samples(sys, x, past, options, rx);
    const auto sy = solution_law_samples(sys, y, past, options, ry);
    out.estimate = histogram_tv(sx, sy, r.bins_per_dimension, options.bootstrap, rb);
    r.pairs.push_back(out);
  }

  std::vector<double> distances;
  for (const auto& p : r.pairs) {
    if (p.distance > 0.0) distances.push_back(p.distance);
  }
  if (!distances.empty()) {
    const double median = quantile(distances, 0.5);
    double num = 0.0;
    double den = 0.0;
    for (const auto& p : r.pairs) {
      if (p.distance > 0.0 && p.distance <= median) {
        num += p.distance * p.estimate.tv;
        den += p.distance * p.distance;
      }
    }
    r.lipschitz = den > 0.0 ? num / den : 0.0;
  }
  return r;
}

IrreducibilityReport irreducibility_probe(const SkewSystem& sys, const std::vector<std::vector<double>>& starts,
                                          const std::vector<Interval>& targets, std::size_t steps,
                                          std::size_t n_samples, const SeedStream& seeds) {
  if (n_samples == 0) throw Error(ErrorKind::InvalidArgument, "n_samples must be >= 1");
  if (sys.state_dim > kMaxProbeDimension) throw Error(ErrorKind::DimensionTooHigh, "at most 3 state dimensions");
  for (const Interval& t : targets) {
    if (!(t.lo < t.hi)) throw Error(ErrorKind::EmptyInterval, "target intervals must be nonempty");
  }
  IrreducibilityReport r;
  r.steps = steps;
  r.n_samples = n_samples;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    std::vector<std::size_t> hits(targets.size(), 0);
    Engine rng = seeds.engine(s);
    for (std::size_t k = 0; k < n_samples; ++k) {
      std::vector<double> x = starts[s];
      NoiseState noise = initial_noise(sys, rng);
      for (std::size_t n = 0; n < steps; ++n) transition(sys, x, noise, rng);
      for (std::size_t t = 0; t < targets.size(); ++t) hits[t] += targets[t].contains(x[0]) ? 1 : 0;
    }
    for (std::size_t t = 0; t < targets.size(); ++t) {
      IrreducibilityRow row;
      row.start = starts[s];
      row.target = targets[t];
      row.hits = hits[t];
      row.frequency = static_cast<double>(hits[t]) / static_cast<double>(n_samples);
      if (hits[t] == 0) row.upper_bound = 3.0 / static_cast<double>(n_samples);
      r.rows.push_back(row);
    }
  }
  return r;
}

UltraFellerPoint ultrafeller_point(double x) {
  if (!(x > 0.0 && x <= 1.0)) throw Error(ErrorKind::InvalidArgument, "x must lie in (0, 1]");
  if (x < kUltraFellerMinX) {
    throw Error(ErrorKind::QuadratureFailure, "x = " + std::to_string(x) + " below 1e-6 exceeds the oscillation budget");
  }
  const double width = x / 10.0;
  const std::vector<double> grid = uniform_breaks(0.0, 1.0, width);
  auto density = [x](double y) { return 1.0 + std::sin(y / x); };

  UltraFellerPoint pt;
  pt.x = x;
  const double norm = quad::integrate(density, 0.0, 1.0, {}, grid).value;
  pt.c = 1.0 / norm;

  std::vector<double> breaks = grid;
  const std::vector<double> kinks = kink_points(x, pt.c);
  breaks.insert(breaks.end(), kinks.begin(), kinks.end());
  const double c = pt.c;
  pt.tv = quad::integrate([&](double y) { return std::abs(c * density(y) - 1.0); }, 0.0, 1.0, {}, breaks).value;
  pt.tv_half = 0.5 * pt.tv;

  const std::vector<double> half_grid = uniform_breaks(0.0, 0.5, width);
  pt.pf_half = c * quad::integrate(density, 0.0, 0.5, {}, half_grid).value;
  return pt;
}

std::vector<UltraFellerPoint> ultrafeller_counterexample_tv(const std::vector<double>& xs) {
  std::vector<UltraFellerPoint> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(ultrafeller_point(x));
  return out;
}

}  // namespace skewerg
