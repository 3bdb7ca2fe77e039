#pragma once

#include <Eigen/Dense>

#include <memory>

#include "pricelab/demand.hpp"
#include "pricelab/estimation.hpp"

namespace pricelab {

enum class PolicyKind { ucb, ucb_approx, ts, ts_approx, ce, cils, oracle };

enum class RadiusMode { corollary1, fixed, fixed_sq };
enum class ScaleMode { corollary1, fixed };

struct PolicySpec {
  PolicyKind kind = PolicyKind::ucb;
  double lambda = 1.0;
  int K = 100;
  double kappa = 0.6;
  RadiusMode radius_mode = RadiusMode::corollary1;
  double radius_value = 0.0;
  ScaleMode ts_scale_mode = ScaleMode::corollary1;
  double ts_scale_value = 0.0;
  int refit_every = 1;
  double tol = 1e-8;
};

struct PolicyEnv {
  LinkFunction link;
  int d = 1;
  int T = 1;
  PriceRange range{0.1, 5.0};
  double theta_bar = 3.0;
  double sigma_bar = 0.25;
};

class PricingPolicy {
 public:
  virtual ~PricingPolicy() = default;

  virtual double choose_price(const Eigen::VectorXd& x, int t,
                              RngEngine& rng) = 0;
  virtual void observe(const Eigen::VectorXd& x, double p, double D) = 0;
  virtual const EstimatorState* estimator() const { return nullptr; }
};

// theta_star is consumed by oracle (full) and ce (gamma only); others ignore it
std::unique_ptr<PricingPolicy> make_policy(const PolicySpec& spec,
                                           const PolicyEnv& env,
                                           const ParamVector& theta_star);

// uniform draw from {theta : ||theta - center||_M <= radius}; rejects
// ||theta|| > theta_bar up to 100 times, then projects radially
Eigen::VectorXd sample_ellipsoid_uniform(const Eigen::VectorXd& center,
                                         const DesignMatrix& design,
                                         double radius, double theta_bar,
                                         RngEngine& rng);

Eigen::VectorXd sample_ellipsoid_uniform(const Eigen::VectorXd& center,
                                         const Eigen::MatrixXd& M_inv_sqrt,
                                         double radius, double theta_bar,
                                         RngEngine& rng);

// theta_tilde = center + scale * M_inv_sqrt * eta
Eigen::VectorXd ts_candidate(const Eigen::VectorXd& center,
                             const Eigen::MatrixXd& M_inv_sqrt, double scale,
                             const Eigen::VectorXd& eta);

Eigen::VectorXd standard_normal_vector(int dim, RngEngine& rng);

double radius_inflation(double gap, double g_lower);

}  // namespace pricelab
