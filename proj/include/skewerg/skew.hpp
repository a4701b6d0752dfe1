#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "skewerg/noise.hpp"
#include "skewerg/rng.hpp"

namespace skewerg {

enum class MapKind { linear, doubling, sine, binary_example, custom_table };

std::string_view to_string(MapKind k);

/// Componentwise update x' = Phi0(x, w_0) for one state coordinate. `w0` is
/// the freshly drawn noise value, `w_prev` the one before it.
///   linear:          a x + b w0
///   doubling:        (2 x + b w0) mod 1
///   sine:            a x + b sin(w0)
///   binary_example:  w0 if x = w_prev, else 1 - w0
///   custom_table:    table[x][w0] on integer states and noise values
struct UpdateMap {
  MapKind kind = MapKind::linear;
  double a = 0.0;
  double b = 1.0;
  std::vector<std::vector<int>> table;

  static UpdateMap linear(double a, double b) { return {MapKind::linear, a, b, {}}; }
  static UpdateMap doubling(double b) { return {MapKind::doubling, 2.0, b, {}}; }
  static UpdateMap sine(double a, double b) { return {MapKind::sine, a, b, {}}; }
  static UpdateMap binary_example() { return {MapKind::binary_example, 0.0, 0.0, {}}; }
  static UpdateMap custom_table(std::vector<std::vector<int>> table);

  double apply(double x, double w0, double w_prev) const;
  /// d Phi0 / d w0 in closed form; nullopt for discrete maps.
  std::optional<double> noise_derivative(double x, double w0) const;
  bool differentiable() const noexcept { return kind == MapKind::linear || kind == MapKind::doubling || kind == MapKind::sine; }
};

/// i.i.d. noise values: 0 with probability p, 1 with probability 1 - p.
struct BernoulliKernel {
  double p = 0.5;
};

struct GaussianNoise {
  CovarianceSequence covariance;  // lags 0..window
  GaussianStepKernel kernel;
  std::string model_tag;
};

GaussianNoise make_gaussian_noise(const SpectralModel& model, std::size_t window);

using NoiseKernel = std::variant<GaussianNoise, BernoulliKernel>;

/// State in R^n (or a finite subset), each coordinate driven by its own
/// independent copy of the noise.
struct SkewSystem {
  std::size_t state_dim = 1;
  UpdateMap update;
  NoiseKernel noise;

  static SkewSystem gaussian(UpdateMap update, const SpectralModel& model, std::size_t window,
                             std::size_t state_dim = 1);
  static SkewSystem bernoulli(UpdateMap update, double p, std::size_t state_dim = 1);

  /// Window of the noise past kept by the system.
  std::size_t window() const;
};

using NoiseState = std::vector<NoisePath>;  // one path per coordinate

/// Stationary noise past for every coordinate.
NoiseState initial_noise(const SkewSystem& sys, Engine& rng);

/// Noise past with every coordinate equal to `values` (oldest first).
NoiseState constant_noise(const SkewSystem& sys, const std::vector<double>& values);

/// One transition of Q: draw w' for every coordinate, concatenate-shift,
/// then x' = Phi0(x, w'). Updates `x` and `noise` in place.
void transition(const SkewSystem& sys, std::vector<double>& x, NoiseState& noise, Engine& rng);

struct Trajectory {
  std::size_t state_dim = 1;
  std::vector<std::vector<double>> states;  // x_0 .. x_T
  std::vector<std::vector<double>> noise;   // newest noise value at times 1 .. T
};

Trajectory evolve(const SkewSystem& sys, const std::vector<double>& x0, NoiseState noise_init,
                  std::size_t horizon, Engine& rng);

struct TrajectoryEnsemble {
  std::size_t n_paths = 0;
  std::size_t horizon = 0;
  std::vector<Trajectory> paths;
  std::vector<std::uint64_t> seeds;
};

/// Path i uses engine seeds.engine(i) for its stationary noise start and
/// its evolution.
TrajectoryEnsemble simulate_ensemble(const SkewSystem& sys, const std::vector<double>& x0, std::size_t horizon,
                                     std::size_t n_paths, const SeedStream& seeds);

struct KsCheckpoint {
  std::size_t n = 0;
  double ks = 0.0;
};

/// Cesaro average (1/N) sum_{n=1}^N delta_{x_n} of the first state
/// coordinate, pooled over n_paths trajectories.
struct EmpiricalMeasure {
  std::vector<double> edges;
  std::vector<double> mass;
  double mean = 0.0;
  double variance = 0.0;
  std::size_t samples = 0;
  /// KS distance to the reference at N, N/2, N/4, ... (ascending N).
  std::vector<KsCheckpoint> checkpoints;
};

using Cdf = std::function<double(double)>;

EmpiricalMeasure krylov_bogoliubov(const SkewSystem& sys, const std::vector<double>& x0, NoiseState noise_init,
                                   std::size_t horizon, std::size_t bins, Engine& rng,
                                   const Cdf& reference = {}, std::size_t n_checkpoints = 6);

EmpiricalMeasure krylov_bogoliubov_ensemble(const SkewSystem& sys, const std::vector<double>& x0,
                                            std::size_t horizon, std::size_t n_paths, std::size_t bins,
                                            const SeedStream& seeds, const Cdf& reference = {});

/// sup_x |F_n(x) - F(x)| of the given samples against F.
double ks_statistic(std::vector<double> samples, const Cdf& cdf);

enum class InvariantSet { aligned, anti };

std::string_view to_string(InvariantSet s);

/// Exact law of (x_1..x_k) for the binary example started in the invariant
/// set {x = w_0} (aligned) or {x = 1 - w_0} (anti). probabilities[b] is the
/// mass of the block whose bits, x_1 first, spell b in binary.
struct BlockLaw {
  std::size_t k = 0;
  std::vector<double> probabilities;
};

inline constexpr std::size_t kMaxBlockLength = 20;

BlockLaw binary_example_blocks(double p, InvariantSet set, std::size_t k);

double total_variation(const BlockLaw& a, const BlockLaw& b);

struct DistanceSummary {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Copies of the system from x0 and y0 driven by the same noise.
struct PairedEnsemble {
  std::size_t horizon = 0;
  std::size_t n_paths = 0;
  std::vector<std::vector<double>> distances;  // [path][time], Euclidean |x_n - y_n|
  std::vector<DistanceSummary> by_time;
};

PairedEnsemble two_point_motion(const SkewSystem& sys, const std::vector<double>& x0,
                                const std::vector<double>& y0, std::size_t horizon, std::size_t n_paths,
                                const SeedStream& seeds, const std::optional<NoiseState>& noise_init = {});

}  // namespace skewerg
