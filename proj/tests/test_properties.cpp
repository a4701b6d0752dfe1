#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "generators.hpp"
#include "oracles.hpp"
#include "skewerg/diagnostics.hpp"
#include "skewerg/gaussian.hpp"
#include "skewerg/noise.hpp"
#include "skewerg/spectral.hpp"
#include "skewerg/toeplitz.hpp"

using namespace skewerg;

namespace {

double max_entry(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("generated Toeplitz matrices are positive semidefinite") {
  oracle::Gen g(101);
  for (int i = 0; i < 40; ++i) {
    const SpectralModel m = g.model();
    const std::size_t n = g.index(1, 64);
    const CovarianceSequence c = covariance_from_spectrum(m, n);
    CAPTURE(to_string(m.family()));
    CAPTURE(n);
    const Eigen::MatrixXd t = oracle::toeplitz(c.lags, n + 1);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(t).eigenvalues().minCoeff() >= -1e-8 * c[0]);
  }
}

TEST_CASE("Levinson agrees with a dense solve on random inputs") {
  oracle::Gen g(202);
  for (int i = 0; i < 100; ++i) {
    const std::size_t order = g.index(1, 64);
    const std::vector<double> c = g.ar_mixture(order);
    const PredictionSolution lev = levinson(CovarianceSequence{c}, order);
    const oracle::DensePrediction dense = oracle::dense_prediction(c, order);
    double scale = dense.a.cwiseAbs().maxCoeff();
    for (std::size_t j = 0; j < order; ++j) {
      CHECK(std::abs(lev.coefficients[j] - dense.a(static_cast<Eigen::Index>(j))) <= 1e-10 * std::max(1.0, scale));
    }
    CHECK(std::abs(lev.innovation_variance - dense.variance) <= 1e-10 * c[0]);
    for (std::size_t l = 1; l < lev.variance_by_order.size(); ++l) {
      CHECK(lev.variance_by_order[l] <= lev.variance_by_order[l - 1] * (1.0 + 1e-14));
    }
    for (double k : lev.reflection_coefficients) CHECK(std::abs(k) < 1.0);
  }
}

TEST_CASE("innovation variances decrease toward the Szego value") {
  for (double a : {0.0, 0.3, -0.6, 0.9}) {
    const SpectralModel m = SpectralModel::ar1(a);
    const PredictionSolution lev = levinson(covariance_from_spectrum(m, 400), 400);
    const double s = szego_variance(m).sigma2;
    for (double v : lev.variance_by_order) CHECK(v >= s - 1e-10);
    CHECK(std::abs(lev.innovation_variance - s) < 1e-6);
  }
}

TEST_CASE("two-sided interpolation beats one-sided prediction and improves with N") {
  oracle::Gen g(303);
  for (int i = 0; i < 20; ++i) {
    const std::vector<double> c = g.ar_mixture(130);
    const CovarianceSequence cov{c};
    double previous = c[0];
    for (std::size_t n : {1, 2, 4, 8, 16, 32, 64}) {
      const double v = interpolate_two_sided(cov, n).error_variance;
      CHECK(v <= previous * (1.0 + 1e-12));
      CHECK(v <= levinson(cov, n).innovation_variance * (1.0 + 1e-12));
      CHECK(v >= 0.0);
      previous = v;
    }
  }
}

TEST_CASE("interpolation variance is bounded by the innovation variance") {
  for (const SpectralModel& m : {SpectralModel::ar1(0.4), SpectralModel::ar1(-0.8), SpectralModel::white(2.0),
                                 SpectralModel::ma1(), SpectralModel::power_law(0.75)}) {
    CHECK(interpolation_variance(m) <= szego_variance(m).sigma2 * (1.0 + 1e-8));
  }
}

TEST_CASE("classification is invariant under scaling") {
  for (const SpectralModel& m : {SpectralModel::ar1(0.6), SpectralModel::ma1(), SpectralModel::power_law(0.75)}) {
    const NoiseClassification base = classify(m);
    for (double c : {0.01, 3.0, 250.0}) {
      const NoiseClassification s = classify(m.scaled(c));
      CAPTURE(to_string(m.family()));
      CAPTURE(c);
      CHECK(s.quasi_markov == base.quasi_markov);
      CHECK(s.off_white == base.off_white);
      CHECK(s.degenerate == base.degenerate);
      CHECK(s.ergodic == base.ergodic);
      REQUIRE(s.sigma2);
      CHECK(std::abs(*s.sigma2 - c * *base.sigma2) <= 1e-10 * c * *base.sigma2);
    }
  }
}

TEST_CASE("off-white implies quasi-Markov across the families") {
  std::vector<SpectralModel> models{SpectralModel::white(1.0), SpectralModel::ma1()};
  for (double a : {0.0, 0.3, -0.3, 0.9, -0.9}) models.push_back(SpectralModel::ar1(a));
  for (double b : {0.6, 0.75, 1.0}) models.push_back(SpectralModel::power_law(b));
  for (const SpectralModel& m : models) {
    const NoiseClassification c = classify(m);
    CAPTURE(to_string(m.family()));
    CAPTURE(m.parameter());
    if (c.off_white == Verdict::yes) CHECK(c.quasi_markov == Verdict::yes);
  }
}

TEST_CASE("disintegration sampling matches direct sampling") {
  oracle::Gen g(404);
  const std::size_t n = 100000;
  for (int i = 0; i < 50; ++i) {
    const std::size_t dim = g.index(2, 8);
    const Eigen::MatrixXd q = g.pd_matrix(dim);
    const std::vector<std::size_t> p = g.permutation(dim);
    const std::size_t k = g.index(1, dim - 1);
    const GaussianSplitting split(q, {p.begin(), p.begin() + static_cast<long>(k)}, {p.begin() + static_cast<long>(k), p.end()});
    const Eigen::MatrixXd a = disintegration_sample(split, condition(split), n, g.rng);
    const Eigen::MatrixXd b = direct_sample(q, n, g.rng);
    const Eigen::MatrixXd gap = empirical_covariance(a) - empirical_covariance(b);
    const double tol = 4.0 * max_entry(q) / std::sqrt(static_cast<double>(n));
    CHECK(max_entry(gap) < tol);
    // each entry against its own standard deviation sqrt(2 (Q_ii Q_jj + Q_ij^2) / n)
    for (Eigen::Index r = 0; r < q.rows(); ++r) {
      for (Eigen::Index c = 0; c < q.cols(); ++c) {
        const double sd = std::sqrt(2.0 * (q(r, r) * q(c, c) + q(r, c) * q(r, c)) / static_cast<double>(n));
        CHECK(std::abs(gap(r, c)) < 5.0 * sd);
      }
    }
  }
}

TEST_CASE("conditioning in stages equals conditioning on the union") {
  oracle::Gen g(505);
  for (int i = 0; i < 50; ++i) {
    const std::size_t dim = g.index(3, 8);
    const Eigen::MatrixXd q = g.pd_matrix(dim);
    const std::vector<std::size_t> p = g.permutation(dim);
    const std::size_t k1 = g.index(1, dim - 2);
    const std::size_t k2 = g.index(k1 + 1, dim - 1);
    const std::vector<std::size_t> i1(p.begin(), p.begin() + static_cast<long>(k1));
    const std::vector<std::size_t> second(p.begin() + static_cast<long>(k1), p.begin() + static_cast<long>(k2));
    const std::vector<std::size_t> rest(p.begin() + static_cast<long>(k2), p.end());
    std::vector<std::size_t> i2 = second;
    i2.insert(i2.end(), rest.begin(), rest.end());
    std::vector<std::size_t> both = i1;
    both.insert(both.end(), second.begin(), second.end());

    const ConditionalLaw staged = condition_in_stages(GaussianSplitting(q, i1, i2), second);
    const ConditionalLaw direct = condition(GaussianSplitting(q, both, rest));
    CHECK(max_entry(staged.mean_operator - direct.mean_operator) < 1e-9);
    CHECK(max_entry(staged.conditional_covariance - direct.conditional_covariance) < 1e-9);

    const GaussianSplitting split(q, i1, i2);
    const ConditionalLaw law = condition(split);
    const Eigen::MatrixXd gap = split.block(i2, i2) - law.conditional_covariance;
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gap).eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("subcoupling mass and total variation sum to one") {
  for (double sigma : {0.1, 0.5, 1.0, 3.0}) {
    for (double d : {0.0, 0.05, 0.3, 1.0, 2.5, 6.0}) {
      const SubcouplingSpec s = subcoupling(0.4, sigma * sigma, {-1.0, 1.0}, {d - 1.0, d + 1.0});
      CHECK(std::abs(s.mass + tv_gaussian(0.4, 0.4 + d, sigma * sigma) - 1.0) < 1e-12);
      CHECK(std::abs(s.mass - oracle::min_overlap(d, sigma, 1e-4 * sigma)) < 1e-6);
    }
  }
}

TEST_CASE("restricted subcoupling marginals sit below the kernel") {
  oracle::Gen g(606);
  const std::size_t n = 20000, bins = 50;
  for (int i = 0; i < 20; ++i) {
    const double mean = g.uniform(-1.0, 1.0), sigma = g.uniform(0.3, 2.0);
    const double x = g.uniform(-1.0, 1.0), y = x + g.uniform(-2.0, 2.0);
    const double r = g.uniform(0.2, 1.5);
    const SubcouplingSpec s = subcoupling(mean, sigma * sigma, {x - r, x + r}, {y - r, y + r});
    const auto pairs = sample_subcoupling(s, n, true, g.rng);
    for (int side = 0; side < 2; ++side) {
      const double lo = (side == 0 ? s.x : s.y) - s.radius;
      const double width = 2.0 * s.radius / static_cast<double>(bins);
      std::vector<double> counts(bins, 0.0);
      for (const auto& [z1, z2] : pairs) {
        const double z = side == 0 ? z1 : z2;
        const auto b = static_cast<long>(std::floor((z - lo) / width));
        counts[static_cast<std::size_t>(std::clamp<long>(b, 0, static_cast<long>(bins) - 1))] += 1.0;
      }
      for (std::size_t b = 0; b < bins; ++b) {
        const double a = lo + width * static_cast<double>(b);
        const double kernel = oracle::normal_cdf((a + width - mean) / sigma) - oracle::normal_cdf((a - mean) / sigma);
        const double freq = counts[b] / static_cast<double>(n);
        const double clt = 4.0 * std::sqrt(std::max(freq, 1.0 / static_cast<double>(n)) / static_cast<double>(n));
        CHECK(s.restricted_mass * freq <= kernel + s.restricted_mass * clt);
      }
    }
  }
}

TEST_CASE("finite differences agree with analytic derivatives") {
  oracle::Gen g(707);
  std::vector<MalliavinProbe> probes;
  for (int i = 0; i < 30; ++i) probes.push_back({{g.uniform(-3.0, 3.0)}, {g.uniform(-3.0, 3.0)}});
  for (const UpdateMap& m : {UpdateMap::linear(0.5, 1.3), UpdateMap::linear(-2.0, 0.2), UpdateMap::sine(0.9, 1.0),
                             UpdateMap::sine(0.1, 4.0), UpdateMap::doubling(0.7)}) {
    for (const MalliavinPoint& p : malliavin_check(m, probes).points) {
      REQUIRE(p.gradient_error);
      CHECK(*p.gradient_error < 1e-6);
    }
  }
}

TEST_CASE("MA(1) interpolation error keeps falling with the window") {
  const CovarianceSequence c = covariance_from_spectrum(SpectralModel::ma1(), 1100);
  double previous = 2.0;
  for (std::size_t n : {10, 25, 50, 100, 200, 500}) {
    const double v = interpolate_two_sided(c, n).error_variance;
    CHECK(v < previous);
    previous = v;
  }
  CHECK(previous < 0.01);
}
