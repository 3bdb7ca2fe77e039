#pragma once

#include <Eigen/Dense>

#include <vector>

namespace pricelab {

// M = lambda*I + sum z z', with the inverse and log-determinant maintained
// by rank-one updates and a periodic full refactorization.
class DesignMatrix {
 public:
  DesignMatrix(int dim, double lambda);

  int dim() const { return static_cast<int>(M_.rows()); }
  double lambda() const { return lambda_; }
  const Eigen::MatrixXd& M() const { return M_; }
  const Eigen::MatrixXd& M_inv() const { return M_inv_; }
  double log_det() const { return log_det_; }
  int updates() const { return updates_; }

  void update(const Eigen::VectorXd& z);

  // ||v||_M^2 and ||v||_{M^-1}^2
  double norm_sq(const Eigen::VectorXd& v) const;
  double inv_norm_sq(const Eigen::VectorXd& v) const;
  // symmetric positive definite M^{-1/2}
  Eigen::MatrixXd inv_sqrt() const;

  static constexpr int kRefactorEvery = 512;

 private:
  void refactor();

  double lambda_;
  Eigen::MatrixXd M_;
  Eigen::MatrixXd M_inv_;
  double log_det_;
  int updates_ = 0;
};

DesignMatrix design_update(const DesignMatrix& design, const Eigen::VectorXd& z);

struct PotentialAudit {
  double lhs;
  double bound;
  bool ok;
};

// sum_t ||z_t||^2_{M_{t-1}^{-1}} against 2*dim*log((lambda*dim+T)/(lambda*dim));
// refuses (throws) unless lambda >= 1 and every ||z_t|| <= 1
PotentialAudit elliptical_potential_audit(const std::vector<Eigen::VectorXd>& zs,
                                          double lambda);

}  // namespace pricelab
