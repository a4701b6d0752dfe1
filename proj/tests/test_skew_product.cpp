#include <cmath>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "skewerg/error.hpp"
#include "skewerg/skew.hpp"

using namespace skewerg;

namespace {

double block_probability(std::size_t bits, std::size_t k, double p_one) {
  double prob = 1.0;
  for (std::size_t i = 0; i < k; ++i) prob *= ((bits >> i) & 1U) ? p_one : 1.0 - p_one;
  return prob;
}

}  // namespace

TEST_CASE("update maps") {
  CHECK(UpdateMap::linear(0.5, 2.0).apply(1.0, 3.0, 0.0) == 6.5);
  CHECK(UpdateMap::doubling(1.0).apply(0.75, 0.6, 0.0) == doctest::Approx(0.1));
  CHECK(UpdateMap::sine(0.5, 1.0).apply(1.0, 0.0, 0.0) == 0.5);
  const UpdateMap b = UpdateMap::binary_example();
  CHECK(b.apply(1, 0, 1) == 0);
  CHECK(b.apply(1, 0, 0) == 1);
  CHECK(b.apply(0, 1, 0) == 1);
  CHECK(b.apply(0, 1, 1) == 0);
  const UpdateMap t = UpdateMap::custom_table({{0, 1}, {1, 0}});
  CHECK(t.apply(1, 1, 0) == 0);
  CHECK_THROWS_AS(UpdateMap::custom_table({{0, 2}}), Error);
  CHECK(*UpdateMap::sine(0.5, 2.0).noise_derivative(0.0, 0.3) == doctest::Approx(2.0 * std::cos(0.3)));
  CHECK_FALSE(b.noise_derivative(0.0, 1.0));
}

TEST_CASE("a state that forgets itself copies the noise") {
  const SkewSystem sys = SkewSystem::gaussian(UpdateMap::linear(0.0, 1.0), SpectralModel::white(1.0), 2);
  Engine rng(1);
  const Trajectory t = evolve(sys, {5.0}, initial_noise(sys, rng), 200, rng);
  CHECK(t.states.size() == 201);
  CHECK(t.states[0][0] == 5.0);
  for (std::size_t n = 1; n <= 200; ++n) CHECK(t.states[n][0] == t.noise[n - 1][0]);
}

TEST_CASE("binary example stays on the aligned set") {
  const SkewSystem sys = SkewSystem::bernoulli(UpdateMap::binary_example(), 0.5);
  Engine rng(2);
  NoiseState noise = initial_noise(sys, rng);
  const Trajectory t = evolve(sys, {noise[0].newest()}, noise, 2000, rng);
  for (std::size_t n = 1; n <= 2000; ++n) CHECK(t.states[n][0] == t.noise[n - 1][0]);
}

TEST_CASE("both invariant sets survive every noise block up to length 20") {
  const UpdateMap b = UpdateMap::binary_example();
  bool invariant = true;
  for (int anti = 0; anti < 2; ++anti) {
    for (std::size_t block = 0; block < (std::size_t{1} << 21); ++block) {
      double w = static_cast<double>(block & 1U);
      double x = anti ? 1.0 - w : w;
      for (std::size_t n = 1; n <= 20; ++n) {
        const double next = static_cast<double>((block >> n) & 1U);
        x = b.apply(x, next, w);
        w = next;
        invariant = invariant && (anti ? x == 1.0 - w : x == w);
      }
    }
  }
  CHECK(invariant);
}

TEST_CASE("linear system reaches its stationary variance") {
  const SkewSystem sys = SkewSystem::gaussian(UpdateMap::linear(0.5, 1.0), SpectralModel::white(1.0), 2);
  Engine rng(3);
  const Trajectory t = evolve(sys, {0.0}, initial_noise(sys, rng), 100000, rng);
  double s = 0.0, s2 = 0.0;
  for (std::size_t n = 1; n < t.states.size(); ++n) {
    s += t.states[n][0];
    s2 += t.states[n][0] * t.states[n][0];
  }
  const double m = s / 100000.0;
  CHECK(std::abs(s2 / 100000.0 - m * m - 4.0 / 3.0) < 0.05);
}

TEST_CASE("evolve replays bitwise") {
  const SkewSystem sys = SkewSystem::gaussian(UpdateMap::sine(0.7, 1.0), SpectralModel::ar1(0.4), 4, 2);
  Engine a(77), b(77);
  const Trajectory ta = evolve(sys, {0.1, 0.2}, initial_noise(sys, a), 500, a);
  const Trajectory tb = evolve(sys, {0.1, 0.2}, initial_noise(sys, b), 500, b);
  CHECK(ta.states == tb.states);
  CHECK(ta.noise == tb.noise);
  CHECK_THROWS_AS(evolve(sys, {0.1}, initial_noise(sys, a), 5, a), Error);
}

TEST_CASE("Krylov-Bogoliubov average of the linear system") {
  const SkewSystem sys = SkewSystem::gaussian(UpdateMap::linear(0.5, 1.0), SpectralModel::white(1.0), 2);
  Engine rng(4);
  const double sd = std::sqrt(4.0 / 3.0);
  const EmpiricalMeasure m = krylov_bogoliubov(sys, {0.0}, initial_noise(sys, rng), 1000000, 60, rng,
                                               [sd](double x) { return oracle::normal_cdf(x / sd); });
  REQUIRE(!m.checkpoints.empty());
  CHECK(m.checkpoints.back().n == 1000000);
  CHECK(m.checkpoints.back().ks < 0.01);
  CHECK(m.checkpoints.back().ks < m.checkpoints.front().ks);
  CHECK(std::accumulate(m.mass.begin(), m.mass.end(), 0.0) == doctest::Approx(1.0));
}

TEST_CASE("Krylov-Bogoliubov on the aligned binary set") {
  const SkewSystem sys = SkewSystem::bernoulli(UpdateMap::binary_example(), 0.3);
  Engine rng(5);
  NoiseState noise = initial_noise(sys, rng);
  const EmpiricalMeasure m = krylov_bogoliubov(sys, {noise[0].newest()}, noise, 100000, 2, rng);
  CHECK(std::abs(m.mean - 0.7) < 0.01);
}

TEST_CASE("noiseless contraction collapses to a point mass") {
  const SkewSystem sys = SkewSystem::gaussian(UpdateMap::linear(0.5, 0.0), SpectralModel::white(1.0), 2);
  Engine rng(6);
  const EmpiricalMeasure m = krylov_bogoliubov(sys, {1.0}, initial_noise(sys, rng), 10000, 10, rng);
  CHECK(m.mean == doctest::Approx(1e-4).epsilon(1e-6));
  CHECK(m.variance < 1e-4);
}

TEST_CASE("exact block laws") {
  for (InvariantSet set : {InvariantSet::aligned, InvariantSet::anti}) {
    const BlockLaw u = binary_example_blocks(0.5, set, 8);
    for (double q : u.probabilities) CHECK(q == doctest::Approx(1.0 / 256.0).epsilon(1e-14));
  }
  const BlockLaw a1 = binary_example_blocks(0.3, InvariantSet::aligned, 1);
  CHECK(a1.probabilities[1] == doctest::Approx(0.7));
  // aligned: x_n = w_n ~ Bernoulli(1 - p); anti: x_n = 1 - w_n
  for (std::size_t k : {2, 5}) {
    const BlockLaw al = binary_example_blocks(0.3, InvariantSet::aligned, k);
    const BlockLaw an = binary_example_blocks(0.3, InvariantSet::anti, k);
    double tv = 0.0;
    for (std::size_t b = 0; b < al.probabilities.size(); ++b) {
      std::size_t reversed = 0;
      for (std::size_t i = 0; i < k; ++i) reversed |= ((b >> (k - 1 - i)) & 1U) << i;
      CHECK(al.probabilities[b] == doctest::Approx(block_probability(reversed, k, 0.7)).epsilon(1e-12));
      CHECK(an.probabilities[b] == doctest::Approx(block_probability(reversed, k, 0.3)).epsilon(1e-12));
      tv += 0.5 * std::abs(block_probability(reversed, k, 0.7) - block_probability(reversed, k, 0.3));
    }
    CHECK(total_variation(al, an) == doctest::Approx(tv).epsilon(1e-12));
    CHECK(total_variation(al, an) > 0.0);
  }
  CHECK_THROWS_AS(binary_example_blocks(0.3, InvariantSet::aligned, 21), Error);
}

TEST_CASE("two-point motion") {
  const SkewSystem lin = SkewSystem::gaussian(UpdateMap::linear(0.5, 1.0), SpectralModel::ar1(0.3), 3);
  const PairedEnsemble pe = two_point_motion(lin, {0.0}, {2.0}, 30, 20, SeedStream(1));
  for (const auto& path : pe.distances) {
    for (std::size_t n = 0; n <= 30; ++n) CHECK(std::abs(path[n] - 2.0 * std::pow(0.5, static_cast<double>(n))) < 1e-12);
  }

  const SkewSystem bin = SkewSystem::bernoulli(UpdateMap::binary_example(), 0.5);
  const PairedEnsemble same = two_point_motion(bin, {1.0}, {1.0}, 50, 20, SeedStream(2));
  for (const DistanceSummary& s : same.by_time) CHECK(s.max == 0.0);
  const PairedEnsemble apart = two_point_motion(bin, {0.0}, {1.0}, 50, 50, SeedStream(3));
  for (const DistanceSummary& s : apart.by_time) CHECK(s.min == 1.0);
}

TEST_CASE("ensemble noise keeps the stationary lag covariances") {
  const SkewSystem sys = SkewSystem::gaussian(UpdateMap::linear(0.9, 1.0), SpectralModel::ar1(0.5), 4);
  const TrajectoryEnsemble ens = simulate_ensemble(sys, {0.0}, 2000, 10, SeedStream(4));
  CHECK(ens.paths.size() == 10);
  CHECK(ens.seeds.size() == 10);
  double c0 = 0.0, c1 = 0.0;
  std::size_t n = 0;
  for (const Trajectory& t : ens.paths) {
    for (std::size_t i = 1; i < t.noise.size(); ++i) {
      c0 += t.noise[i][0] * t.noise[i][0];
      c1 += t.noise[i][0] * t.noise[i - 1][0];
      ++n;
    }
  }
  const double bound = 4.0 * std::sqrt(3.0 / static_cast<double>(n));
  CHECK(std::abs(c0 / static_cast<double>(n) - 1.0) < bound);
  CHECK(std::abs(c1 / static_cast<double>(n) - 0.5) < bound);
}
