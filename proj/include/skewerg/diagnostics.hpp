#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "skewerg/noise.hpp"
#include "skewerg/rng.hpp"
#include "skewerg/skew.hpp"

namespace skewerg {

struct MalliavinProbe {
  std::vector<double> x;
  std::vector<double> w;
};

struct MalliavinPoint {
  std::vector<double> x;
  std::vector<double> w;
  Eigen::MatrixXd jacobian;     // dPhi_i / dw_k by central differences
  Eigen::MatrixXd m;            // M_ij = sum_k dPhi_i/dw_k dPhi_j/dw_k
  double determinant = 0.0;
  double smallest_singular_value = 0.0;
  bool singular = false;        // smallest singular value < 1e-8
  /// max |finite difference - analytic| / max(1, |analytic|) when the map
  /// has a closed-form derivative.
  std::optional<double> gradient_error;
};

struct MalliavinReport {
  std::string method = "central_difference";
  double fd_step = 1e-5;
  std::vector<MalliavinPoint> points;
  bool any_singular = false;
};

inline constexpr double kMalliavinSingularThreshold = 1e-8;

/// Phi(x, w) for a vector state and the newest noise vector.
using VectorMap = std::function<std::vector<double>(const std::vector<double>& x, const std::vector<double>& w)>;

MalliavinReport malliavin_check(const UpdateMap& update, const std::vector<MalliavinProbe>& probes,
                                double fd_step = 1e-5);
MalliavinReport malliavin_check(const VectorMap& phi, const std::vector<MalliavinProbe>& probes,
                                double fd_step = 1e-5);

/// What is histogrammed at the probe horizon: the state alone, or the
/// state together with the newest noise value.
enum class Observable { state, state_and_noise };

std::string_view to_string(Observable o);

struct TvEstimate {
  double tv = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct StrongFellerPair {
  std::vector<double> x;
  std::vector<double> y;
  double distance = 0.0;
  TvEstimate estimate;
};

struct StrongFellerReport {
  std::size_t horizon = 0;
  std::size_t n_samples = 0;
  std::size_t bins_per_dimension = 0;
  Observable observable = Observable::state;
  std::vector<StrongFellerPair> pairs;
  /// Least-squares slope of tv against |x - y| through the origin, over
  /// pairs at or below the median nonzero distance.
  double lipschitz = 0.0;
};

struct StrongFellerOptions {
  std::size_t horizon = 1;
  std::size_t n_samples = 100000;
  std::size_t bins = 0;  // 0: ceil(n^(1/3)) per dimension
  std::size_t bootstrap = 200;
  Observable observable = Observable::state;
  /// Frozen noise past shared by both starting points; drawn from the
  /// stationary law when absent.
  std::optional<NoiseState> noise_past;
};

/// Half L1 distance between the histograms of two sample sets (rows are
/// samples) on a common grid, with multinomial bootstrap 95% interval.
TvEstimate histogram_tv(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b,
                        std::size_t bins_per_dimension, std::size_t bootstrap, Engine& rng);

StrongFellerReport strong_feller_probe(const SkewSystem& sys,
                                       const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs,
                                       const StrongFellerOptions& options, const SeedStream& seeds);

struct IrreducibilityRow {
  std::vector<double> start;
  Interval target;
  std::size_t hits = 0;
  double frequency = 0.0;
  /// One-sided 95% bound 3 / n_samples, given only when hits = 0.
  std::optional<double> upper_bound;
};

struct IrreducibilityReport {
  std::size_t steps = 0;
  std::size_t n_samples = 0;
  std::vector<IrreducibilityRow> rows;
};

/// Frequency of x_n (first coordinate) in each target, noise past drawn
/// from the stationary law per sample.
IrreducibilityReport irreducibility_probe(const SkewSystem& sys, const std::vector<std::vector<double>>& starts,
                                          const std::vector<Interval>& targets, std::size_t steps,
                                          std::size_t n_samples, const SeedStream& seeds);

/// Kernel P(x, dy) = c(x)(1 + sin(y/x)) dy on [0, 1], P(0, dy) = dy.
struct UltraFellerPoint {
  double x = 0.0;
  double c = 0.0;
  /// Total variation norm int_0^1 |c(x)(1 + sin(y/x)) - 1| dy (limit 2/pi).
  double tv = 0.0;
  /// Half of it, the coupling-distance convention.
  double tv_half = 0.0;
  /// Pf(x) for f = 1_[0, 1/2]; Pf(0) = 1/2.
  double pf_half = 0.0;
};

inline constexpr double kUltraFellerMinX = 1e-6;

/// Throws QuadratureFailure for x < 1e-6 and InvalidArgument outside (0, 1].
UltraFellerPoint ultrafeller_point(double x);
std::vector<UltraFellerPoint> ultrafeller_counterexample_tv(const std::vector<double>& xs);

}  // namespace skewerg
