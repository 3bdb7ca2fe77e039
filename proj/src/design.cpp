#include "pricelab/design.hpp"

#include <cmath>
#include <stdexcept>

namespace pricelab {

DesignMatrix::DesignMatrix(int dim, double lambda) : lambda_(lambda) {
  if (dim < 1) throw std::invalid_argument("DesignMatrix: dim must be >= 1");
  if (!(lambda > 0.0)) throw std::invalid_argument("DesignMatrix: lambda must be positive");
  M_ = lambda * Eigen::MatrixXd::Identity(dim, dim);
  M_inv_ = Eigen::MatrixXd::Identity(dim, dim) / lambda;
  log_det_ = dim * std::log(lambda);
}

void DesignMatrix::update(const Eigen::VectorXd& z) {
  if (z.size() != M_.rows())
    throw std::invalid_argument("DesignMatrix: feature dimension mismatch");
  const Eigen::VectorXd w = M_inv_ * z;
  const double s = z.dot(w);
  M_.noalias() += z * z.transpose();
  M_inv_.noalias() -= (w * w.transpose()) / (1.0 + s);
  log_det_ += std::log1p(s);
  if (++updates_ % kRefactorEvery == 0) refactor();
}

void DesignMatrix::refactor() {
  const Eigen::LLT<Eigen::MatrixXd> llt(M_);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("DesignMatrix: refactorization failed");
  M_inv_ = llt.solve(Eigen::MatrixXd::Identity(M_.rows(), M_.cols()));
  log_det_ = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double DesignMatrix::norm_sq(const Eigen::VectorXd& v) const {
  return v.dot(M_ * v);
}

double DesignMatrix::inv_norm_sq(const Eigen::VectorXd& v) const {
  return v.dot(M_inv_ * v);
}

Eigen::MatrixXd DesignMatrix::inv_sqrt() const {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M_);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("DesignMatrix: eigendecomposition failed");
  return es.operatorInverseSqrt();
}

DesignMatrix design_update(const DesignMatrix& design, const Eigen::VectorXd& z) {
  DesignMatrix next = design;
  next.update(z);
  return next;
}

PotentialAudit elliptical_potential_audit(const std::vector<Eigen::VectorXd>& zs,
                                          double lambda) {
  if (!(lambda >= 1.0))
    throw std::invalid_argument("elliptical_potential_audit: requires lambda >= 1");
  if (zs.empty())
    throw std::invalid_argument("elliptical_potential_audit: empty feature sequence");
  const auto dim = zs.front().size();
  for (std::size_t i = 0; i < zs.size(); ++i) {
    if (zs[i].size() != dim)
      throw std::invalid_argument("elliptical_potential_audit: inconsistent dimensions");
    if (zs[i].norm() > 1.0 + 1e-12)
      throw std::invalid_argument(
          "elliptical_potential_audit: requires ||z|| <= 1 (violated at index " +
          std::to_string(i) + ")");
  }

  DesignMatrix design(static_cast<int>(dim), lambda);
  double lhs = 0.0;
  for (const auto& z : zs) {
    lhs += design.inv_norm_sq(z);
    design.update(z);
  }
  const double n = static_cast<double>(dim);
  const double T = static_cast<double>(zs.size());
  const double bound = 2.0 * n * std::log((lambda * n + T) / (lambda * n));
  return {lhs, bound, lhs <= bound};
}

}  // namespace pricelab
