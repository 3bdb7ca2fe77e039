#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "pricelab/design.hpp"
#include "pricelab/link.hpp"

namespace pricelab {

// One observed round. The mean model is g(offset + z'theta); offset is zero
// in the joint (beta, gamma) parameterization and carries x'gamma* * p when
// gamma is known and only beta is estimated.
struct Observation {
  Eigen::VectorXd z;
  double D = 0.0;
  double offset = 0.0;
};

// sum of per-round quasi-log-likelihoods
//   l = -int_{D}^{g(offset + z'theta)} (u - D) / h(u) du
// in closed form for identity/logistic links, adaptive quadrature otherwise
double quasi_loglik(const LinkFunction& link, const Eigen::VectorXd& theta,
                    const std::vector<Observation>& history);

// regularized objective F(theta) = -lambda*g_lower*||theta||^2 + quasi_loglik
double qmle_objective(const LinkFunction& link, const Eigen::VectorXd& theta,
                      const std::vector<Observation>& history, double lambda);

Eigen::VectorXd qmle_gradient(const LinkFunction& link,
                              const Eigen::VectorXd& theta,
                              const std::vector<Observation>& history,
                              double lambda);

struct FitOptions {
  double lambda = 1.0;
  double theta_bar = 3.0;
  double tol = 1e-8;
  int max_iters = 10000;
  std::optional<Eigen::VectorXd> warm_start;
};

struct FitResult {
  Eigen::VectorXd theta;
  double gap = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

FitResult qmle_fit(const LinkFunction& link,
                   const std::vector<Observation>& history,
                   const FitOptions& opts);

struct KnownGammaRound {
  Eigen::VectorXd x;
  double p = 0.0;
  double D = 0.0;
};

// estimates beta only, folding x'gamma* * p into the link argument;
// beta ranges over {beta : ||beta||^2 <= theta_bar^2 - ||gamma*||^2}
FitResult qmle_fit_known_gamma(const LinkFunction& link,
                               const std::vector<KnownGammaRound>& rounds,
                               const Eigen::VectorXd& gamma_star,
                               const FitOptions& opts);

std::vector<Observation> fold_known_gamma(
    const std::vector<KnownGammaRound>& rounds,
    const Eigen::VectorXd& gamma_star);

// alpha(M) = 2*sqrt(lambda)*theta_bar
//          + (2*sigma_bar/g_lower)*sqrt(2*log T + log det M - dim*log lambda)
double confidence_radius(const DesignMatrix& design, int T, double lambda,
                         double theta_bar, double sigma_bar, double g_lower);

// uniform-in-t bound for trajectories with ||z_t|| <= 1
double uniform_confidence_radius(int dim, int T, double lambda,
                                 double theta_bar, double sigma_bar,
                                 double g_lower);

// certificate from the 2*lambda*g_lower strong-concavity modulus
double suboptimality_gap(const LinkFunction& link, double lambda,
                         double gradient_mapping_norm);

// ||(theta - P(theta + step*grad F))/step|| on the theta_bar ball
double gradient_mapping_norm(const LinkFunction& link,
                             const std::vector<Observation>& history,
                             double lambda, double theta_bar,
                             const Eigen::VectorXd& theta, double step);

// exact trust-region dual bound on max F over the ball minus F(theta)
double certified_gap(const LinkFunction& link,
                     const std::vector<Observation>& history, double lambda,
                     double theta_bar, const Eigen::VectorXd& theta);

struct ConfidenceEllipsoid {
  Eigen::VectorXd center;
  DesignMatrix design;
  double radius;
  double theta_bar;

  bool contains(const Eigen::VectorXd& theta) const;
};

// Online estimator: feature/design accumulation plus warm-started refits.
// Identity-link objectives are evaluated from running sufficient statistics,
// so a refit costs O(dim^2) per iteration independent of history length.
class EstimatorState {
 public:
  EstimatorState(LinkFunction link, int dim, double lambda, double theta_bar,
                 double tol = 1e-8, int max_iters = 10000);

  void add(const Observation& obs);
  void refit();

  const Eigen::VectorXd& theta_hat() const { return theta_hat_; }
  double gap() const { return gap_; }
  const DesignMatrix& design() const { return design_; }
  int history_len() const { return static_cast<int>(history_.size()); }
  const std::vector<Observation>& history() const { return history_; }
  const LinkFunction& link() const { return link_; }
  double lambda() const { return lambda_; }
  double theta_bar() const { return theta_bar_; }

  ConfidenceEllipsoid ellipsoid(double radius) const;

 private:
  LinkFunction link_;
  double lambda_;
  double theta_bar_;
  double tol_;
  int max_iters_;
  DesignMatrix design_;
  std::vector<Observation> history_;
  Eigen::VectorXd theta_hat_;
  double gap_ = 0.0;

  // identity-link sufficient statistics
  bool identity_fast_;
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
  double y_sq_ = 0.0;
};

}  // namespace pricelab
