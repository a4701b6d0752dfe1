#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "skewerg/diagnostics.hpp"
#include "skewerg/error.hpp"

using namespace skewerg;

namespace {

// c(x) = 1 / (1 + x(1 - cos(1/x))) and the TV integrand, integrated on a
// fine uniform grid.
double uf_c(double x) { return 1.0 / (1.0 + x * (1.0 - std::cos(1.0 / x))); }

double uf_tv(double x, std::size_t n = 2000000) {
  const double c = uf_c(x);
  double s = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double y = static_cast<double>(i) / static_cast<double>(n);
    const double v = std::abs(c * (1.0 + std::sin(y / x)) - 1.0);
    s += (i == 0 || i == n) ? 0.5 * v : v;
  }
  return s / static_cast<double>(n);
}

}  // namespace

TEST_CASE("Malliavin matrix of x + w is one") {
  const VectorMap phi = [](const std::vector<double>& x, const std::vector<double>& w) {
    return std::vector<double>{x[0] + w[0]};
  };
  const MalliavinReport r = malliavin_check(phi, {{{0.0}, {0.0}}, {{3.0}, {-2.0}}});
  for (const MalliavinPoint& p : r.points) {
    CHECK(p.m(0, 0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK_FALSE(p.singular);
  }
  CHECK_FALSE(r.any_singular);
}

TEST_CASE("Malliavin matrix of a noise-blind map is singular") {
  const VectorMap phi = [](const std::vector<double>& x, const std::vector<double>&) { return x; };
  const MalliavinReport r = malliavin_check(phi, {{{1.0}, {0.5}}});
  CHECK(r.points[0].m(0, 0) == 0.0);
  CHECK(r.points[0].singular);
  CHECK(r.any_singular);
}

TEST_CASE("Malliavin matrix of x + sin(w) is cos^2(w)") {
  const double half_pi = std::numbers::pi / 2.0;
  const MalliavinReport r = malliavin_check(UpdateMap::sine(1.0, 1.0), {{{0.0}, {0.3}}, {{0.0}, {half_pi}}, {{1.0}, {2.0}}});
  CHECK(r.points[0].m(0, 0) == doctest::Approx(std::cos(0.3) * std::cos(0.3)).epsilon(1e-8));
  CHECK_FALSE(r.points[0].singular);
  CHECK(r.points[1].singular);
  CHECK_FALSE(r.points[2].singular);
  for (const MalliavinPoint& p : r.points) CHECK(*p.gradient_error < 1e-6);
  CHECK_THROWS_AS(malliavin_check(UpdateMap::binary_example(), {{{0.0}, {0.0}}}), Error);
}

TEST_CASE("Malliavin matrix of a coupled two-dimensional map") {
  const VectorMap phi = [](const std::vector<double>& x, const std::vector<double>& w) {
    return std::vector<double>{x[0] + w[0] + w[1], x[1] + w[0] - w[1]};
  };
  const MalliavinReport r = malliavin_check(phi, {{{0.0, 0.0}, {0.1, 0.2}}});
  CHECK(r.points[0].m(0, 0) == doctest::Approx(2.0));
  CHECK(std::abs(r.points[0].m(0, 1)) < 1e-8);
  CHECK(r.points[0].determinant == doctest::Approx(4.0));
}

TEST_CASE("strong Feller probe on the linear system matches the Gaussian TV") {
  const SkewSystem sys = SkewSystem::gaussian(UpdateMap::linear(0.5, 1.0), SpectralModel::white(1.0), 2);
  StrongFellerOptions o;
  o.n_samples = 1000000;
  o.bootstrap = 50;
  const StrongFellerReport r = strong_feller_probe(sys, {{{0.0}, {0.5}}, {{0.0}, {1.0}}, {{0.0}, {2.0}}, {{1.0}, {1.0}}}, o, SeedStream(1));
  for (const StrongFellerPair& p : r.pairs) {
    const double exact = tv_gaussian(0.0, 0.5 * p.distance, 1.0);
    CHECK(std::abs(p.estimate.tv - exact) < 0.02);
    CHECK(p.estimate.ci_low <= p.estimate.tv);
    CHECK(p.estimate.tv <= p.estimate.ci_high);
  }
  CHECK(r.pairs[3].estimate.tv == 0.0);
  CHECK(r.bins_per_dimension == 100);
  CHECK(r.lipschitz > 0.0);
}

TEST_CASE("strong Feller probe separates the binary invariant sets") {
  const SkewSystem sys = SkewSystem::bernoulli(UpdateMap::binary_example(), 0.3);
  StrongFellerOptions o;
  o.n_samples = 20000;
  o.bootstrap = 20;
  o.observable = Observable::state_and_noise;
  for (std::size_t m : {1, 3, 6}) {
    o.horizon = m;
    o.noise_past = constant_noise(sys, {1.0, 0.0});
    const StrongFellerReport r = strong_feller_probe(sys, {{{0.0}, {1.0}}}, o, SeedStream(2));
    CHECK(r.pairs[0].estimate.tv == 1.0);
  }
}

TEST_CASE("strong Feller probe refuses high dimensions") {
  const SkewSystem sys = SkewSystem::gaussian(UpdateMap::linear(0.5, 1.0), SpectralModel::white(1.0), 2, 4);
  CHECK_THROWS_AS(strong_feller_probe(sys, {{{0, 0, 0, 0}, {1, 0, 0, 0}}}, {}, SeedStream(1)), Error);
}

TEST_CASE("histogram TV grows under bin refinement") {
  Engine rng(3);
  std::normal_distribution<double> n01;
  std::vector<std::vector<double>> a, b;
  for (int i = 0; i < 20000; ++i) {
    a.push_back({n01(rng)});
    b.push_back({n01(rng) + 0.3});
  }
  double previous = 0.0;
  for (std::size_t bins : {4, 8, 16, 32, 64}) {
    const double tv = histogram_tv(a, b, bins, 0, rng).tv;
    CHECK(tv >= previous - 1e-12);
    previous = tv;
  }
}

TEST_CASE("irreducibility probe") {
  const SkewSystem noisy = SkewSystem::gaussian(UpdateMap::linear(0.5, 1.0), SpectralModel::white(1.0), 2);
  const IrreducibilityReport r = irreducibility_probe(noisy, {{0.0}}, {{2.0, 2.5}, {-0.1, 0.1}}, 1, 20000, SeedStream(4));
  for (const IrreducibilityRow& row : r.rows) {
    CHECK(row.frequency > 0.0);
    CHECK_FALSE(row.upper_bound);
  }

  const SkewSystem frozen = SkewSystem::gaussian(UpdateMap::linear(0.5, 0.0), SpectralModel::white(1.0), 2);
  const IrreducibilityReport z = irreducibility_probe(frozen, {{1.0}}, {{1.0, 2.0}}, 3, 1000, SeedStream(5));
  CHECK(z.rows[0].hits == 0);
  REQUIRE(z.rows[0].upper_bound);
  CHECK(*z.rows[0].upper_bound == doctest::Approx(3.0 / 1000.0));

  const SkewSystem bin = SkewSystem::bernoulli(UpdateMap::binary_example(), 0.3);
  const IrreducibilityReport b = irreducibility_probe(bin, {{0.0}, {1.0}}, {{-0.5, 0.5}, {0.5, 1.5}}, 2, 5000, SeedStream(6));
  for (const IrreducibilityRow& row : b.rows) CHECK(row.frequency > 0.0);
}

TEST_CASE("ultra-Feller counterexample") {
  const UltraFellerPoint one = ultrafeller_point(1.0);
  CHECK(one.c == doctest::Approx(uf_c(1.0)).epsilon(1e-12));
  CHECK(std::abs(one.tv - uf_tv(1.0)) < 1e-8);
  CHECK(one.tv_half == doctest::Approx(0.5 * one.tv));

  const UltraFellerPoint small = ultrafeller_point(1e-3);
  CHECK(small.c == doctest::Approx(uf_c(1e-3)).epsilon(1e-12));
  CHECK(std::abs(small.tv - uf_tv(1e-3, 20000000)) < 1e-6);
  CHECK(std::abs(small.tv - 2.0 / std::numbers::pi) < 0.01);
  CHECK(std::abs(small.pf_half - 0.5) < 0.02);

  // Pf(x) = c(x) (1/2 + x (1 - cos(1/(2x))))
  for (double x : {1e-1, 1e-2, 1e-3}) {
    const double exact = uf_c(x) * (0.5 + x * (1.0 - std::cos(0.5 / x)));
    CHECK(ultrafeller_point(x).pf_half == doctest::Approx(exact).epsilon(1e-10));
    CHECK(std::abs(ultrafeller_point(x).pf_half - 0.5) <= 3.0 * x);
  }

  CHECK_THROWS_AS(ultrafeller_point(1e-7), Error);
  CHECK_THROWS_AS(ultrafeller_point(1.5), Error);
}

TEST_CASE("ultra-Feller curve approaches 2/pi over decades") {
  const auto pts = ultrafeller_counterexample_tv({1e-2, 1e-3, 1e-4, 1e-5});
  double previous = 1.0;
  for (const UltraFellerPoint& p : pts) {
    CHECK(p.tv >= 0.0);
    CHECK(p.tv <= 1.0);
    const double gap = std::abs(p.tv - 2.0 / std::numbers::pi);
    CHECK(gap < previous);
    previous = gap;
  }
}
