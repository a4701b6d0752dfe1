#include "skewerg/skew.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "skewerg/error.hpp"

namespace skewerg {
namespace {

double euclidean(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(s);
}

void check_state(const SkewSystem& sys, const std::vector<double>& x) {
  if (x.size() != sys.state_dim) {
    throw Error(ErrorKind::LengthMismatch, "initial state has " + std::to_string(x.size()) +
                                               " coordinates, system has " + std::to_string(sys.state_dim));
  }
}

double draw_noise(const NoiseKernel& noise, const NoisePath& path, Engine& rng) {
  if (const auto* g = std::get_if<GaussianNoise>(&noise)) {
    return g->kernel.mean(path) + std::sqrt(g->kernel.sigma2) * standard_normal(rng);
  }
  std::bernoulli_distribution zero(std::get<BernoulliKernel>(noise).p);
  return zero(rng) ? 0.0 : 1.0;
}

EmpiricalMeasure summarise(std::vector<double> samples, std::size_t bins, const Cdf& reference,
                           std::size_t n_checkpoints) {
  EmpiricalMeasure m;
  m.samples = samples.size();
  if (samples.empty()) return m;
  bins = std::max<std::size_t>(bins, 1);
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  m.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) m.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  m.mass.assign(bins, 0.0);
  const double weight = 1.0 / static_cast<double>(samples.size());
  double sum = 0.0;
  for (double v : samples) {
    const auto b = std::min(bins - 1, static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins)));
    m.mass[b] += weight;
    sum += v;
  }
  m.mean = sum * weight;
  double ss = 0.0;
  for (double v : samples) ss += (v - m.mean) * (v - m.mean);
  m.variance = ss * weight;

  if (reference) {
    std::vector<std::size_t> sizes;
    for (std::size_t n = samples.size(), j = 0; j < n_checkpoints && n >= 1; ++j, n /= 2) sizes.push_back(n);
    std::reverse(sizes.begin(), sizes.end());
    for (std::size_t n : sizes) {
      m.checkpoints.push_back({n, ks_statistic(std::vector<double>(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(n)), reference)});
    }
  }
  return m;
}

}  // namespace

std::string_view to_string(MapKind k) {
  switch (k) {
    case MapKind::linear: return "linear";
    case MapKind::doubling: return "doubling";
    case MapKind::sine: return "sine";
    case MapKind::binary_example: return "binary_example";
    case MapKind::custom_table: return "custom_table";
  }
  return "linear";
}

std::string_view to_string(InvariantSet s) { return s == InvariantSet::aligned ? "aligned" : "anti"; }

UpdateMap UpdateMap::custom_table(std::vector<std::vector<int>> table) {
  if (table.empty()) throw Error(ErrorKind::InvalidArgument, "custom table is empty");
  for (const auto& row : table) {
    if (row.empty()) throw Error(ErrorKind::InvalidArgument, "custom table row is empty");
    for (int v : row) {
      if (v < 0 || static_cast<std::size_t>(v) >= table.size()) {
        throw Error(ErrorKind::InvalidArgument, "custom table maps outside its state set");
      }
    }
  }
  return {MapKind::custom_table, 0.0, 0.0, std::move(table)};
}

double UpdateMap::apply(double x, double w0, double w_prev) const {
  switch (kind) {
    case MapKind::linear:
      return a * x + b * w0;
    case MapKind::doubling: {
      const double y = 2.0 * x + b * w0;
      return y - std::floor(y);
    }
    case MapKind::sine:
      return a * x + b * std::sin(w0);
    case MapKind::binary_example:
      return x == w_prev ? w0 : 1.0 - w0;
    case MapKind::custom_table: {
      const auto xi = static_cast<long>(std::lround(x));
      const auto wi = static_cast<long>(std::lround(w0));
      if (xi < 0 || static_cast<std::size_t>(xi) >= table.size() || wi < 0 ||
          static_cast<std::size_t>(wi) >= table[static_cast<std::size_t>(xi)].size()) {
        throw Error(ErrorKind::InvalidArgument, "custom table has no entry for (x, w)");
      }
      return table[static_cast<std::size_t>(xi)][static_cast<std::size_t>(wi)];
    }
  }
  return x;
}

std::optional<double> UpdateMap::noise_derivative(double, double w0) const {
  switch (kind) {
    case MapKind::linear:
    case MapKind::doubling:
      return b;
    case MapKind::sine:
      return b * std::cos(w0);
    default:
      return std::nullopt;
  }
}

GaussianNoise make_gaussian_noise(const SpectralModel& model, std::size_t window) {
  if (window == 0) throw Error(ErrorKind::InvalidArgument, "noise window must be >= 1");
  GaussianNoise g;
  g.covariance = covariance_from_spectrum(model, window);
  g.kernel = make_step_kernel(g.covariance, window);
  g.model_tag = std::string(to_string(model.family()));
  return g;
}

SkewSystem SkewSystem::gaussian(UpdateMap update, const SpectralModel& model, std::size_t window,
                                std::size_t state_dim) {
  if (state_dim == 0) throw Error(ErrorKind::InvalidArgument, "state_dim must be >= 1");
  return {state_dim, std::move(update), make_gaussian_noise(model, window)};
}

SkewSystem SkewSystem::bernoulli(UpdateMap update, double p, std::size_t state_dim) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidArgument, "Bernoulli p must lie in (0, 1)");
  if (state_dim == 0) throw Error(ErrorKind::InvalidArgument, "state_dim must be >= 1");
  return {state_dim, std::move(update), BernoulliKernel{p}};
}

std::size_t SkewSystem::window() const {
  if (const auto* g = std::get_if<GaussianNoise>(&noise)) return std::max<std::size_t>(g->kernel.order(), 2);
  return 2;
}

NoiseState initial_noise(const SkewSystem& sys, Engine& rng) {
  NoiseState out(sys.state_dim);
  for (NoisePath& path : out) {
    if (const auto* g = std::get_if<GaussianNoise>(&sys.noise)) {
      path = sample_stationary(g->covariance, sys.window(), rng, g->model_tag).path;
    } else {
      path.model_tag = "bernoulli";
      for (std::size_t i = 0; i < sys.window(); ++i) path.values.push_back(draw_noise(sys.noise, path, rng));
    }
  }
  return out;
}

NoiseState constant_noise(const SkewSystem& sys, const std::vector<double>& values) {
  if (values.size() < sys.window()) {
    throw Error(ErrorKind::WindowTooShort, "noise past has " + std::to_string(values.size()) +
                                               " values, system needs " + std::to_string(sys.window()));
  }
  NoisePath p;
  p.values = values;
  p.model_tag = std::holds_alternative<GaussianNoise>(sys.noise) ? std::get<GaussianNoise>(sys.noise).model_tag : "bernoulli";
  return NoiseState(sys.state_dim, p);
}

void transition(const SkewSystem& sys, std::vector<double>& x, NoiseState& noise, Engine& rng) {
  for (std::size_t i = 0; i < sys.state_dim; ++i) {
    NoisePath& path = noise[i];
    if (path.window() < sys.window()) {
      throw Error(ErrorKind::WindowTooShort, "noise past shorter than the system window");
    }
    const double w_prev = path.newest();
    const double w_new = draw_noise(sys.noise, path, rng);
    path = concatenate_shift(std::move(path), w_new);
    x[i] = sys.update.apply(x[i], w_new, w_prev);
  }
}

Trajectory evolve(const SkewSystem& sys, const std::vector<double>& x0, NoiseState noise_init,
                  std::size_t horizon, Engine& rng) {
  check_state(sys, x0);
  if (noise_init.size() != sys.state_dim) throw Error(ErrorKind::LengthMismatch, "one noise path per coordinate");
  Trajectory t;
  t.state_dim = sys.state_dim;
  t.states.reserve(horizon + 1);
  t.noise.reserve(horizon);
  std::vector<double> x = x0;
  t.states.push_back(x);
  for (std::size_t n = 0; n < horizon; ++n) {
    transition(sys, x, noise_init, rng);
    t.states.push_back(x);
    std::vector<double> w(sys.state_dim);
    for (std::size_t i = 0; i < sys.state_dim; ++i) w[i] = noise_init[i].newest();
    t.noise.push_back(std::move(w));
  }
  return t;
}

TrajectoryEnsemble simulate_ensemble(const SkewSystem& sys, const std::vector<double>& x0, std::size_t horizon,
                                     std::size_t n_paths, const SeedStream& seeds) {
  TrajectoryEnsemble e;
  e.n_paths = n_paths;
  e.horizon = horizon;
  for (std::size_t i = 0; i < n_paths; ++i) {
    e.seeds.push_back(seeds.seed_for(i));
    Engine rng = seeds.engine(i);
    NoiseState noise = initial_noise(sys, rng);
    e.paths.push_back(evolve(sys, x0, std::move(noise), horizon, rng));
  }
  return e;
}

double ks_statistic(std::vector<double> samples, const Cdf& cdf) {
  if (samples.empty()) return 0.0;
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

EmpiricalMeasure krylov_bogoliubov(const SkewSystem& sys, const std::vector<double>& x0, NoiseState noise_init,
                                   std::size_t horizon, std::size_t bins, Engine& rng, const Cdf& reference,
                                   std::size_t n_checkpoints) {
  if (horizon == 0) throw Error(ErrorKind::InvalidArgument, "Krylov-Bogoliubov horizon must be >= 1");
  check_state(sys, x0);
  std::vector<double> x = x0;
  std::vector<double> samples;
  samples.reserve(horizon);
  for (std::size_t n = 0; n < horizon; ++n) {
    transition(sys, x, noise_init, rng);
    samples.push_back(x[0]);
  }
  return summarise(std::move(samples), bins, reference, n_checkpoints);
}

EmpiricalMeasure krylov_bogoliubov_ensemble(const SkewSystem& sys, const std::vector<double>& x0,
                                            std::size_t horizon, std::size_t n_paths, std::size_t bins,
                                            const SeedStream& seeds, const Cdf& reference) {
  if (horizon == 0 || n_paths == 0) throw Error(ErrorKind::InvalidArgument, "horizon and n_paths must be >= 1");
  check_state(sys, x0);
  // Time-major pooling so that prefixes are Cesaro averages of the ensemble.
  std::vector<std::vector<double>> xs(n_paths, x0);
  std::vector<NoiseState> noises;
  std::vector<Engine> engines;
  for (std::size_t i = 0; i < n_paths; ++i) {
    engines.push_back(seeds.engine(i));
    noises.push_back(initial_noise(sys, engines.back()));
  }
  std::vector<double> samples;
  samples.reserve(horizon * n_paths);
  for (std::size_t n = 0; n < horizon; ++n) {
    for (std::size_t i = 0; i < n_paths; ++i) {
      transition(sys, xs[i], noises[i], engines[i]);
      samples.push_back(xs[i][0]);
    }
  }
  return summarise(std::move(samples), bins, reference, 6);
}

BlockLaw binary_example_blocks(double p, InvariantSet set, std::size_t k) {
  if (k > kMaxBlockLength) {
    throw Error(ErrorKind::BlockTooLong, "block length " + std::to_string(k) + " exceeds " + std::to_string(kMaxBlockLength));
  }
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidArgument, "Bernoulli p must lie in (0, 1)");
  const UpdateMap phi = UpdateMap::binary_example();
  BlockLaw law;
  law.k = k;
  law.probabilities.assign(std::size_t{1} << k, 0.0);
  // Noise blocks (w_0, ..., w_k), bit j of `noise` is w_j.
  const std::size_t blocks = std::size_t{1} << (k + 1);
  for (std::size_t noise = 0; noise < blocks; ++noise) {
    double weight = 1.0;
    double w_prev = static_cast<double>(noise & 1U);
    weight *= w_prev == 0.0 ? p : 1.0 - p;
    double x = set == InvariantSet::aligned ? w_prev : 1.0 - w_prev;
    std::size_t pattern = 0;
    for (std::size_t j = 1; j <= k; ++j) {
      const double w = static_cast<double>((noise >> j) & 1U);
      weight *= w == 0.0 ? p : 1.0 - p;
      x = phi.apply(x, w, w_prev);
      w_prev = w;
      pattern = (pattern << 1) | static_cast<std::size_t>(x);
    }
    law.probabilities[pattern] += weight;
  }
  return law;
}

double total_variation(const BlockLaw& a, const BlockLaw& b) {
  if (a.probabilities.size() != b.probabilities.size()) throw Error(ErrorKind::LengthMismatch, "block lengths differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.probabilities.size(); ++i) s += std::abs(a.probabilities[i] - b.probabilities[i]);
  return 0.5 * s;
}

PairedEnsemble two_point_motion(const SkewSystem& sys, const std::vector<double>& x0,
                                const std::vector<double>& y0, std::size_t horizon, std::size_t n_paths,
                                const SeedStream& seeds, const std::optional<NoiseState>& noise_init) {
  check_state(sys, x0);
  check_state(sys, y0);
  PairedEnsemble out;
  out.horizon = horizon;
  out.n_paths = n_paths;
  for (std::size_t i = 0; i < n_paths; ++i) {
    Engine rng = seeds.engine(i);
    NoiseState noise = noise_init ? *noise_init : initial_noise(sys, rng);
    std::vector<double> x = x0;
    std::vector<double> y = y0;
    std::vector<double> d{euclidean(x, y)};
    for (std::size_t n = 0; n < horizon; ++n) {
      std::vector<double> before(sys.state_dim);
      for (std::size_t c = 0; c < sys.state_dim; ++c) before[c] = noise[c].newest();
      transition(sys, x, noise, rng);
      // y sees exactly the noise values just drawn for x.
      for (std::size_t c = 0; c < sys.state_dim; ++c) {
        y[c] = sys.update.apply(y[c], noise[c].newest(), before[c]);
      }
      d.push_back(euclidean(x, y));
    }
    out.distances.push_back(std::move(d));
  }
  out.by_time.resize(horizon + 1);
  for (std::size_t t = 0; t <= horizon && n_paths > 0; ++t) {
    DistanceSummary s{0.0, out.distances[0][t], out.distances[0][t]};
    for (const auto& d : out.distances) {
      s.mean += d[t];
      s.min = std::min(s.min, d[t]);
      s.max = std::max(s.max, d[t]);
    }
    s.mean /= static_cast<double>(n_paths);
    out.by_time[t] = s;
  }
  return out;
}

}  // namespace skewerg
