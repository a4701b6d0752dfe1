#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "skewerg/rng.hpp"

namespace skewerg {

/// Centred Gaussian N(0, Q) on R^n with coordinates split into the
/// conditioning block I1 and the conditioned block I2 (0-based indices).
class GaussianSplitting {
 public:
  GaussianSplitting(Eigen::MatrixXd covariance, std::vector<std::size_t> conditioning,
                    std::vector<std::size_t> conditioned);

  /// I1 = given indices, I2 = the rest in increasing order.
  static GaussianSplitting with_conditioning(Eigen::MatrixXd covariance, std::vector<std::size_t> conditioning);

  std::size_t dimension() const noexcept { return static_cast<std::size_t>(q_.rows()); }
  const Eigen::MatrixXd& covariance() const noexcept { return q_; }
  const std::vector<std::size_t>& conditioning() const noexcept { return i1_; }
  const std::vector<std::size_t>& conditioned() const noexcept { return i2_; }

  /// Q restricted to rows `rows` and columns `cols`.
  Eigen::MatrixXd block(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) const;

 private:
  Eigen::MatrixXd q_;
  std::vector<std::size_t> i1_;
  std::vector<std::size_t> i2_;
};

/// Law of x2 given x1: N(mean_operator * x1, conditional_covariance).
struct ConditionalLaw {
  Eigen::MatrixXd mean_operator;           // |I2| x |I1|
  Eigen::MatrixXd conditional_covariance;  // |I2| x |I2|
  std::size_t rank = 0;                    // rank of Q11
};

/// Singular values below this fraction of the largest count as zero.
inline constexpr double kPseudoInverseTolerance = 1e-10;

/// Moore-Penrose pseudo-inverse of a symmetric positive semidefinite matrix;
/// `rank` receives the number of retained eigenvalues.
Eigen::MatrixXd psd_pseudo_inverse(const Eigen::MatrixXd& a, std::size_t* rank = nullptr);

/// Symmetric square root S with S S^T = A for A positive semidefinite
/// (negative eigenvalues from roundoff clipped to 0).
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& a);

/// mean_operator = Q21 Q11^+, conditional_covariance = Q22 - Q21 Q11^+ Q12.
ConditionalLaw condition(const GaussianSplitting& split);

/// Conditions on I1 first and then, inside the resulting law of x2, on the
/// I2 coordinates listed in `second` (indices into Q). The result is the law
/// of the remaining coordinates given (x_{I1}, x_second), with the mean
/// operator's columns ordered as I1 followed by `second`.
ConditionalLaw condition_in_stages(const GaussianSplitting& split, const std::vector<std::size_t>& second);

/// <v, Q^+ v> when v lies in the range of Q (residual <= 1e-8 |v|),
/// +infinity otherwise.
double rkhs_norm(const GaussianSplitting& split, const Eigen::VectorXd& v);

/// Rows are samples in the original coordinate order, drawn as
/// x1 ~ N(0, Q11), x2 = mean_operator x1 + y, y ~ N(0, conditional_covariance).
Eigen::MatrixXd disintegration_sample(const GaussianSplitting& split, const ConditionalLaw& law,
                                      std::size_t n_samples, Engine& rng);

/// Direct draws x = Q^{1/2} z, rows are samples.
Eigen::MatrixXd direct_sample(const Eigen::MatrixXd& covariance, std::size_t n_samples, Engine& rng);

/// Empirical second-moment matrix (1/n) X^T X of centred samples.
Eigen::MatrixXd empirical_covariance(const Eigen::MatrixXd& samples);

}  // namespace skewerg
