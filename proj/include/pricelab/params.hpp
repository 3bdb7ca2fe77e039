#pragma once

#include <Eigen/Dense>

namespace pricelab {

// theta = (beta; gamma) in R^{2d}. Checked constructors enforce
// ||theta|| <= theta_bar; unchecked ones exist for sampled candidates that
// may legitimately leave the parameter ball.
class ParamVector {
 public:
  ParamVector(Eigen::VectorXd beta, Eigen::VectorXd gamma, double theta_bar);
  static ParamVector unchecked(Eigen::VectorXd beta, Eigen::VectorXd gamma);
  static ParamVector from_theta(const Eigen::VectorXd& theta, double theta_bar);
  static ParamVector from_theta_unchecked(const Eigen::VectorXd& theta);

  int d() const { return static_cast<int>(theta_.size()) / 2; }
  Eigen::VectorXd beta() const { return theta_.head(d()); }
  Eigen::VectorXd gamma() const { return theta_.tail(d()); }
  const Eigen::VectorXd& theta() const { return theta_; }
  double norm() const { return theta_.norm(); }

 private:
  explicit ParamVector(Eigen::VectorXd theta) : theta_(std::move(theta)) {}

  Eigen::VectorXd theta_;
};

}  // namespace pricelab
