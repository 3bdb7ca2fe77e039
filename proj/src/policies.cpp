#include "pricelab/policies.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>

#include "pricelab/covariates.hpp"

namespace pricelab {

namespace {

double sgn_pos(double v) { return v < 0.0 ? -1.0 : 1.0; }

// shared estimator plumbing for the policies that fit theta online
class EstimatingPolicy : public PricingPolicy {
 public:
  const EstimatorState* estimator() const override { return &est_; }

  void observe(const Eigen::VectorXd& x, double p, double D) override {
    est_.add({make_feature(x, p), D, 0.0});
    maybe_refit();
  }

 protected:
  EstimatingPolicy(const PolicySpec& spec, const PolicyEnv& env, int est_dim,
                   double est_theta_bar, LinkFunction est_link)
      : spec_(spec),
        env_(env),
        est_(std::move(est_link), est_dim, spec.lambda, est_theta_bar,
             spec.tol) {}

  void maybe_refit() {
    if (est_.history_len() % spec_.refit_every == 0) est_.refit();
  }

  double base_radius() const {
    switch (spec_.radius_mode) {
      case RadiusMode::corollary1:
        return confidence_radius(est_.design(), env_.T, spec_.lambda,
                                 env_.theta_bar, env_.sigma_bar,
                                 env_.link.g_lower());
      case RadiusMode::fixed:
        return spec_.radius_value;
      case RadiusMode::fixed_sq:
        return std::sqrt(spec_.radius_value);
    }
    return 0.0;
  }

  double ts_scale() const {
    if (spec_.ts_scale_mode == ScaleMode::corollary1) return base_radius();
    return spec_.ts_scale_value;
  }

  PolicySpec spec_;
  PolicyEnv env_;
  EstimatorState est_;
};

class UcbPolicy : public EstimatingPolicy {
 public:
  UcbPolicy(const PolicySpec& spec, const PolicyEnv& env, bool approx)
      : EstimatingPolicy(spec, env, 2 * env.d, env.theta_bar, env.link),
        approx_(approx) {}

  double choose_price(const Eigen::VectorXd& x, int, RngEngine& rng) override {
    double radius = base_radius();
    if (approx_) radius += radius_inflation(est_.gap(), env_.link.g_lower());

    const Eigen::VectorXd& center = est_.theta_hat();
    PriceSolution best = optimal_price(
        env_.link, ParamVector::from_theta_unchecked(center), x, env_.range);
    if (radius > 0.0) {
      const Eigen::MatrixXd Msqrt = est_.design().inv_sqrt();
      for (int k = 0; k < spec_.K; ++k) {
        const Eigen::VectorXd theta = sample_ellipsoid_uniform(
            center, Msqrt, radius, env_.theta_bar, rng);
        const PriceSolution sol = optimal_price(
            env_.link, ParamVector::from_theta_unchecked(theta), x,
            env_.range);
        if (sol.r_star > best.r_star) best = sol;
      }
    }
    return best.p_star;
  }

 private:
  bool approx_;
};

class TsPolicy : public EstimatingPolicy {
 public:
  TsPolicy(const PolicySpec& spec, const PolicyEnv& env, bool approx)
      : EstimatingPolicy(spec, env, 2 * env.d, env.theta_bar, env.link),
        approx_(approx) {}

  double choose_price(const Eigen::VectorXd& x, int, RngEngine& rng) override {
    double scale = ts_scale();
    if (approx_) scale += radius_inflation(est_.gap(), env_.link.g_lower());
    const Eigen::VectorXd eta = standard_normal_vector(2 * env_.d, rng);
    const Eigen::VectorXd theta = ts_candidate(
        est_.theta_hat(), est_.design().inv_sqrt(), scale, eta);
    return optimal_price(env_.link, ParamVector::from_theta_unchecked(theta),
                         x, env_.range)
        .p_star;
  }

 private:
  bool approx_;
};

// certainty equivalence with known gamma: fits beta on the ball of radius
// sqrt(theta_bar^2 - ||gamma*||^2), prices greedily at (beta_hat, gamma*)
class CePolicy : public EstimatingPolicy {
 public:
  CePolicy(const PolicySpec& spec, const PolicyEnv& env,
           Eigen::VectorXd gamma_star, double beta_bar)
      : EstimatingPolicy(spec, env, env.d, beta_bar, env.link),
        gamma_star_(std::move(gamma_star)) {}

  double choose_price(const Eigen::VectorXd& x, int, RngEngine&) override {
    const ParamVector theta =
        ParamVector::unchecked(est_.theta_hat(), gamma_star_);
    return optimal_price(env_.link, theta, x, env_.range).p_star;
  }

  void observe(const Eigen::VectorXd& x, double p, double D) override {
    est_.add({x, D, x.dot(gamma_star_) * p});
    maybe_refit();
  }

 private:
  Eigen::VectorXd gamma_star_;
};

// constrained iterated least squares: the covariate-free benchmark. It fits
// the scalar curve D = a + b * p by ridge least squares, ignoring covariates,
// and prices greedily unless the greedy price is within kappa * t^{-1/4} of
// the running average price, in which case it is pushed to that distance
// away from the average
class CilsPolicy : public EstimatingPolicy {
 public:
  CilsPolicy(const PolicySpec& spec, const PolicyEnv& env)
      : EstimatingPolicy(spec, env, 2, env.theta_bar,
                         LinkFunction::identity()) {}

  double choose_price(const Eigen::VectorXd&, int t, RngEngine&) override {
    const ParamVector theta =
        ParamVector::from_theta_unchecked(est_.theta_hat());
    const double greedy =
        optimal_price(est_.link(), theta, Eigen::VectorXd::Ones(1), env_.range)
            .p_star;
    const double pbar =
        n_prices_ > 0 ? price_sum_ / n_prices_ : env_.range.mid();
    const double delta = greedy - pbar;
    const double threshold = spec_.kappa * std::pow(static_cast<double>(t), -0.25);
    const double p = std::abs(delta) < threshold
                         ? pbar + sgn_pos(delta) * threshold
                         : greedy;
    return env_.range.clip(p);
  }

  void observe(const Eigen::VectorXd&, double p, double D) override {
    price_sum_ += p;
    ++n_prices_;
    Eigen::VectorXd z(2);
    z << 1.0, p;
    est_.add({std::move(z), D, 0.0});
    maybe_refit();
  }

 private:
  double price_sum_ = 0.0;
  int n_prices_ = 0;
};

class OraclePolicy : public PricingPolicy {
 public:
  OraclePolicy(const PolicyEnv& env, ParamVector theta_star)
      : env_(env), theta_star_(std::move(theta_star)) {}

  double choose_price(const Eigen::VectorXd& x, int, RngEngine&) override {
    return optimal_price(env_.link, theta_star_, x, env_.range).p_star;
  }

  void observe(const Eigen::VectorXd&, double, double) override {}

 private:
  PolicyEnv env_;
  ParamVector theta_star_;
};

void check_common(const PolicySpec& spec, const PolicyEnv& env) {
  if (env.d < 1) throw std::invalid_argument("make_policy: d must be >= 1");
  if (env.T < 1) throw std::invalid_argument("make_policy: T must be >= 1");
  if (!(env.theta_bar > 0.0))
    throw std::invalid_argument("make_policy: theta_bar must be positive");
  if (!(env.sigma_bar > 0.0))
    throw std::invalid_argument("make_policy: sigma_bar must be positive");
  if (!(spec.lambda > 0.0))
    throw std::invalid_argument("make_policy: lambda must be positive");
  if (!(spec.tol > 0.0))
    throw std::invalid_argument("make_policy: tol must be positive");
  if (spec.refit_every < 1)
    throw std::invalid_argument("make_policy: refit_every must be >= 1");
}

}  // namespace

Eigen::VectorXd standard_normal_vector(int dim, RngEngine& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  return v;
}

double radius_inflation(double gap, double g_lower) {
  if (!(g_lower > 0.0))
    throw std::invalid_argument("radius_inflation: g_lower must be positive");
  return std::sqrt(2.0 * std::max(gap, 0.0) / g_lower);
}

Eigen::VectorXd ts_candidate(const Eigen::VectorXd& center,
                             const Eigen::MatrixXd& M_inv_sqrt, double scale,
                             const Eigen::VectorXd& eta) {
  if (M_inv_sqrt.rows() != center.size() || eta.size() != center.size())
    throw std::invalid_argument("ts_candidate: dimension mismatch");
  return center + scale * (M_inv_sqrt * eta);
}

Eigen::VectorXd sample_ellipsoid_uniform(const Eigen::VectorXd& center,
                                         const Eigen::MatrixXd& M_inv_sqrt,
                                         double radius, double theta_bar,
                                         RngEngine& rng) {
  if (radius <= 0.0) return center;
  const int dim = static_cast<int>(center.size());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd cand = center;
  for (int attempt = 0; attempt < 100; ++attempt) {
    Eigen::VectorXd eta = standard_normal_vector(dim, rng);
    const double n = eta.norm();
    if (n == 0.0) continue;
    const double radial = radius * std::pow(unif(rng), 1.0 / dim);
    cand = center + M_inv_sqrt * ((radial / n) * eta);
    if (cand.norm() <= theta_bar) return cand;
  }
  return cand * (theta_bar / cand.norm());
}

Eigen::VectorXd sample_ellipsoid_uniform(const Eigen::VectorXd& center,
                                         const DesignMatrix& design,
                                         double radius, double theta_bar,
                                         RngEngine& rng) {
  return sample_ellipsoid_uniform(center, design.inv_sqrt(), radius, theta_bar,
                                  rng);
}

std::unique_ptr<PricingPolicy> make_policy(const PolicySpec& spec,
                                           const PolicyEnv& env,
                                           const ParamVector& theta_star) {
  check_common(spec, env);
  if (theta_star.d() != env.d)
    throw std::invalid_argument("make_policy: theta_star dimension mismatch");
  switch (spec.kind) {
    case PolicyKind::ucb:
    case PolicyKind::ucb_approx: {
      if (spec.K < 1) throw std::invalid_argument("make_policy: K must be >= 1");
      if (spec.radius_mode != RadiusMode::corollary1 && !(spec.radius_value > 0.0))
        throw std::invalid_argument("make_policy: radius_value must be positive");
      return std::make_unique<UcbPolicy>(spec, env,
                                         spec.kind == PolicyKind::ucb_approx);
    }
    case PolicyKind::ts:
    case PolicyKind::ts_approx: {
      if (spec.ts_scale_mode == ScaleMode::fixed && !(spec.ts_scale_value > 0.0))
        throw std::invalid_argument("make_policy: ts_scale_value must be positive");
      return std::make_unique<TsPolicy>(spec, env,
                                        spec.kind == PolicyKind::ts_approx);
    }
    case PolicyKind::ce: {
      Eigen::VectorXd gamma_star = theta_star.gamma();
      const double beta_bar_sq =
          env.theta_bar * env.theta_bar - gamma_star.squaredNorm();
      if (!(beta_bar_sq > 0.0))
        throw std::invalid_argument(
            "make_policy: ||gamma*|| must be below theta_bar");
      return std::make_unique<CePolicy>(spec, env, std::move(gamma_star),
                                        std::sqrt(beta_bar_sq));
    }
    case PolicyKind::cils: {
      if (!(spec.kappa > 0.0))
        throw std::invalid_argument("make_policy: kappa must be positive");
      return std::make_unique<CilsPolicy>(spec, env);
    }
    case PolicyKind::oracle:
      return std::make_unique<OraclePolicy>(env, theta_star);
  }
  throw std::invalid_argument("make_policy: unknown policy kind");
}

}  // namespace pricelab
