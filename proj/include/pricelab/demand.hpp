#pragma once

#include <Eigen/Dense>

#include "pricelab/link.hpp"
#include "pricelab/params.hpp"
#include "pricelab/rng.hpp"

namespace pricelab {

struct PriceRange {
  PriceRange(double min, double max);

  double p_min;
  double p_max;

  double clip(double p) const;
  double mid() const { return 0.5 * (p_min + p_max); }
};

enum class ShockKind { bernoulli, gaussian, bounded_uniform };

struct ShockSpec {
  ShockKind kind = ShockKind::gaussian;
  double sigma = 0.25;  // unused for bernoulli

  static ShockSpec bernoulli();
  static ShockSpec gaussian(double sigma);
  static ShockSpec bounded_uniform(double sigma);

  // sub-Gaussian proxy: 1/2 for bernoulli, sigma for gaussian,
  // sqrt(3)*sigma for the bounded uniform on [-sigma*sqrt(3), sigma*sqrt(3)]
  double sigma_bar() const;
};

class DemandModel {
 public:
  DemandModel(LinkFunction link, ParamVector theta_star, ShockSpec shock,
              double sigma_bar = 0.0);  // 0 -> shock.sigma_bar()

  const LinkFunction& link() const { return link_; }
  const ParamVector& theta_star() const { return theta_star_; }
  const ShockSpec& shock() const { return shock_; }
  double sigma_bar() const { return sigma_bar_; }

 private:
  LinkFunction link_;
  ParamVector theta_star_;
  ShockSpec shock_;
  double sigma_bar_;
};

double mean_demand(const LinkFunction& link, const ParamVector& theta,
                   const Eigen::VectorXd& x, double p);

double expected_revenue(const LinkFunction& link, const ParamVector& theta,
                        const Eigen::VectorXd& x, double p);

struct PriceSolution {
  double p_star;
  double r_star;
};

// argmax_{p in range} p * g(x'beta + x'gamma * p); identity link in closed
// form, other links by 256-point scan plus golden-section refinement.
PriceSolution optimal_price(const LinkFunction& link, const ParamVector& theta,
                            const Eigen::VectorXd& x, const PriceRange& range);

double sample_demand(const DemandModel& model, const Eigen::VectorXd& x,
                     double p, RngEngine& rng);

}  // namespace pricelab
