#include "skewerg/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "skewerg/error.hpp"

namespace skewerg {
namespace {

Eigen::MatrixXd sample_normal(std::size_t rows, Eigen::Index cols, Engine& rng) {
  Eigen::MatrixXd z(static_cast<Eigen::Index>(rows), cols);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) z(i, j) = standard_normal(rng);
  }
  return z;
}

}  // namespace

GaussianSplitting::GaussianSplitting(Eigen::MatrixXd covariance, std::vector<std::size_t> conditioning,
                                     std::vector<std::size_t> conditioned)
    : q_(std::move(covariance)), i1_(std::move(conditioning)), i2_(std::move(conditioned)) {
  if (q_.rows() != q_.cols()) throw Error(ErrorKind::InvalidArgument, "covariance must be square");
  const auto n = static_cast<std::size_t>(q_.rows());
  const double scale = std::max(1.0, q_.cwiseAbs().maxCoeff());
  if ((q_ - q_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorKind::InvalidArgument, "covariance not symmetric within 1e-12");
  }
  if (n > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q_, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(q_.trace(), 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "covariance has a negative eigenvalue");
    }
  }
  std::vector<int> seen(n, 0);
  for (const auto* set : {&i1_, &i2_}) {
    for (std::size_t i : *set) {
      if (i >= n) throw Error(ErrorKind::InvalidArgument, "index " + std::to_string(i) + " out of range");
      if (seen[i]++) throw Error(ErrorKind::InvalidArgument, "index " + std::to_string(i) + " repeated");
    }
  }
  if (i1_.size() + i2_.size() != n) throw Error(ErrorKind::InvalidArgument, "partition does not cover all indices");
}

GaussianSplitting GaussianSplitting::with_conditioning(Eigen::MatrixXd covariance,
                                                       std::vector<std::size_t> conditioning) {
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < static_cast<std::size_t>(covariance.rows()); ++i) {
    if (std::find(conditioning.begin(), conditioning.end(), i) == conditioning.end()) rest.push_back(i);
  }
  return GaussianSplitting(std::move(covariance), std::move(conditioning), std::move(rest));
}

Eigen::MatrixXd GaussianSplitting::block(const std::vector<std::size_t>& rows,
                                         const std::vector<std::size_t>& cols) const {
  Eigen::MatrixXd b(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          q_(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
    }
  }
  return b;
}

Eigen::MatrixXd psd_pseudo_inverse(const Eigen::MatrixXd& a, std::size_t* rank) {
  if (a.size() == 0) {
    if (rank) *rank = 0;
    return a;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double cutoff = kPseudoInverseTolerance * std::max(lambda.cwiseAbs().maxCoeff(), 0.0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(lambda.size());
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > cutoff) {
      inv(i) = 1.0 / lambda(i);
      ++r;
    }
  }
  if (rank) *rank = r;
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

ConditionalLaw condition(const GaussianSplitting& split) {
  const auto& i1 = split.conditioning();
  const auto& i2 = split.conditioned();
  const Eigen::MatrixXd q11 = split.block(i1, i1);
  const Eigen::MatrixXd q21 = split.block(i2, i1);
  const Eigen::MatrixXd q22 = split.block(i2, i2);

  ConditionalLaw law;
  const Eigen::MatrixXd pinv = psd_pseudo_inverse(q11, &law.rank);
  law.mean_operator = q21 * pinv;
  Eigen::MatrixXd s = q22 - law.mean_operator * q21.transpose();
  law.conditional_covariance = 0.5 * (s + s.transpose());
  return law;
}

ConditionalLaw condition_in_stages(const GaussianSplitting& split, const std::vector<std::size_t>& second) {
  const ConditionalLaw first = condition(split);
  const auto& i2 = split.conditioned();
  std::vector<Eigen::Index> pos_j;
  std::vector<Eigen::Index> pos_k;
  for (std::size_t p = 0; p < i2.size(); ++p) {
    const bool in_second = std::find(second.begin(), second.end(), i2[p]) != second.end();
    (in_second ? pos_j : pos_k).push_back(static_cast<Eigen::Index>(p));
  }
  if (pos_j.size() != second.size()) {
    throw Error(ErrorKind::InvalidArgument, "second-stage indices must belong to the conditioned block");
  }
  const Eigen::MatrixXd& m = first.mean_operator;
  const Eigen::MatrixXd& s = first.conditional_covariance;
  const Eigen::MatrixXd s_jj = s(pos_j, pos_j);
  const Eigen::MatrixXd s_kj = s(pos_k, pos_j);
  const Eigen::MatrixXd s_kk = s(pos_k, pos_k);

  ConditionalLaw out;
  const Eigen::MatrixXd g = s_kj * psd_pseudo_inverse(s_jj, &out.rank);
  out.mean_operator.resize(static_cast<Eigen::Index>(pos_k.size()), m.cols() + static_cast<Eigen::Index>(pos_j.size()));
  out.mean_operator << m(pos_k, Eigen::all) - g * m(pos_j, Eigen::all), g;
  const Eigen::MatrixXd c = s_kk - g * s_kj.transpose();
  out.conditional_covariance = 0.5 * (c + c.transpose());
  out.rank += first.rank;
  return out;
}

double rkhs_norm(const GaussianSplitting& split, const Eigen::VectorXd& v) {
  const Eigen::MatrixXd& q = split.covariance();
  if (v.size() != q.rows()) throw Error(ErrorKind::LengthMismatch, "vector dimension differs from covariance");
  const Eigen::MatrixXd pinv = psd_pseudo_inverse(q);
  const Eigen::VectorXd coeff = pinv * v;
  const double residual = (q * coeff - v).norm();
  if (residual > 1e-8 * v.norm()) return std::numeric_limits<double>::infinity();
  return v.dot(coeff);
}

Eigen::MatrixXd disintegration_sample(const GaussianSplitting& split, const ConditionalLaw& law,
                                      std::size_t n_samples, Engine& rng) {
  const auto& i1 = split.conditioning();
  const auto& i2 = split.conditioned();
  const auto n1 = static_cast<Eigen::Index>(i1.size());
  const auto n2 = static_cast<Eigen::Index>(i2.size());
  if (law.mean_operator.rows() != n2 || law.mean_operator.cols() != n1) {
    throw Error(ErrorKind::LengthMismatch, "conditional law does not match the splitting");
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n_samples), static_cast<Eigen::Index>(split.dimension()));
  if (n_samples == 0) return out;

  const Eigen::MatrixXd root1 = psd_sqrt(split.block(i1, i1));
  const Eigen::MatrixXd root2 = psd_sqrt(law.conditional_covariance);
  const Eigen::MatrixXd x1 = sample_normal(n_samples, n1, rng) * root1;
  const Eigen::MatrixXd y = sample_normal(n_samples, n2, rng) * root2;
  const Eigen::MatrixXd x2 = x1 * law.mean_operator.transpose() + y;
  for (Eigen::Index k = 0; k < n1; ++k) out.col(static_cast<Eigen::Index>(i1[k])) = x1.col(k);
  for (Eigen::Index k = 0; k < n2; ++k) out.col(static_cast<Eigen::Index>(i2[k])) = x2.col(k);
  return out;
}

Eigen::MatrixXd direct_sample(const Eigen::MatrixXd& covariance, std::size_t n_samples, Engine& rng) {
  return sample_normal(n_samples, covariance.rows(), rng) * psd_sqrt(covariance);
}

Eigen::MatrixXd empirical_covariance(const Eigen::MatrixXd& samples) {
  if (samples.rows() == 0) return Eigen::MatrixXd::Zero(samples.cols(), samples.cols());
  return samples.transpose() * samples / static_cast<double>(samples.rows());
}

}  // namespace skewerg
