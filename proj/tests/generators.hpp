#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "skewerg/rng.hpp"
#include "skewerg/spectral.hpp"

namespace oracle {

struct Gen {
  skewerg::Engine rng;

  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  std::size_t index(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); }

  skewerg::SpectralModel model() {
    switch (index(0, 4)) {
      case 0: return skewerg::SpectralModel::white(uniform(0.1, 5.0));
      case 1: return skewerg::SpectralModel::ar1(uniform(-0.95, 0.95)).scaled(uniform(0.1, 5.0));
      case 2: return skewerg::SpectralModel::ma1().scaled(uniform(0.1, 5.0));
      case 3: return skewerg::SpectralModel::power_law(uniform(0.55, 2.0));
      default: {
        std::vector<double> s(index(2, 12));
        for (std::size_t i = 0; i < (s.size() + 1) / 2; ++i) s[i] = s[s.size() - 1 - i] = uniform(0.0, 3.0);
        return skewerg::SpectralModel::custom(s);
      }
    }
  }

  // sum_i w_i a_i^|n| plus a nugget: a positive-definite covariance.
  std::vector<double> ar_mixture(std::size_t max_lag) {
    std::vector<double> c(max_lag + 1, 0.0);
    const std::size_t terms = index(1, 4);
    for (std::size_t t = 0; t < terms; ++t) {
      const double w = uniform(0.1, 2.0), a = uniform(-0.95, 0.95);
      for (std::size_t n = 0; n <= max_lag; ++n) c[n] += w * std::pow(a, static_cast<double>(n));
    }
    c[0] += uniform(0.01, 0.5);
    return c;
  }

  Eigen::MatrixXd pd_matrix(std::size_t n) {
    Eigen::MatrixXd a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) a(i, j) = uniform(-1.0, 1.0);
    }
    return a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
  }

  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), rng);
    return p;
  }
};

}  // namespace oracle
