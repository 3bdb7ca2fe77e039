#include "pricelab/params.hpp"

#include <stdexcept>
#include <utility>

namespace pricelab {

namespace {

Eigen::VectorXd concat(const Eigen::VectorXd& beta, const Eigen::VectorXd& gamma) {
  if (beta.size() < 1 || beta.size() != gamma.size())
    throw std::invalid_argument("ParamVector: beta and gamma must have equal positive length");
  Eigen::VectorXd theta(beta.size() + gamma.size());
  theta << beta, gamma;
  return theta;
}

}  // namespace

ParamVector::ParamVector(Eigen::VectorXd beta, Eigen::VectorXd gamma, double theta_bar)
    : theta_(concat(beta, gamma)) {
  if (!(theta_bar > 0.0))
    throw std::invalid_argument("ParamVector: theta_bar must be positive");
  if (theta_.norm() > theta_bar * (1.0 + 1e-12))
    throw std::invalid_argument("ParamVector: ||theta|| exceeds theta_bar");
}

ParamVector ParamVector::unchecked(Eigen::VectorXd beta, Eigen::VectorXd gamma) {
  return ParamVector(concat(beta, gamma));
}

ParamVector ParamVector::from_theta(const Eigen::VectorXd& theta, double theta_bar) {
  if (theta.size() < 2 || theta.size() % 2 != 0)
    throw std::invalid_argument("ParamVector: theta must have even positive length");
  const auto d = theta.size() / 2;
  return ParamVector(theta.head(d), theta.tail(d), theta_bar);
}

ParamVector ParamVector::from_theta_unchecked(const Eigen::VectorXd& theta) {
  if (theta.size() < 2 || theta.size() % 2 != 0)
    throw std::invalid_argument("ParamVector: theta must have even positive length");
  return ParamVector(theta);
}

}  // namespace pricelab
