#include "pricelab/harness.hpp"

#include <cmath>
#include <exception>
#include <random>
#include <stdexcept>
#include <thread>
#include <utility>

namespace pricelab {

namespace {

constexpr double kSqrt5 = 2.23606797749978969;

}  // namespace

LinkFunction ExperimentConfig::make_link() const {
  switch (link) {
    case LinkKind::identity:
      return LinkFunction::identity();
    case LinkKind::logistic:
      return LinkFunction::logistic(theta_bar);
    case LinkKind::custom:
      break;
  }
  throw std::invalid_argument(
      "ExperimentConfig: custom links are built programmatically, not from configs");
}

double ExperimentConfig::effective_sigma_bar() const {
  return sigma_bar > 0.0 ? sigma_bar : shock.sigma_bar();
}

PolicyEnv ExperimentConfig::policy_env() const {
  return {make_link(), d, T, prices, theta_bar, effective_sigma_bar()};
}

void ExperimentConfig::validate() const {
  if (d < 1) throw std::invalid_argument("config: d must be >= 1");
  if (T < 1) throw std::invalid_argument("config: T must be >= 1");
  if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (!(theta_bar > 0.0))
    throw std::invalid_argument("config: theta_bar must be positive");
  if (!(effective_sigma_bar() > 0.0))
    throw std::invalid_argument(
        "config: noise scale must be positive (set sigma or sigma_bar)");
  if (shock.kind == ShockKind::bernoulli && link != LinkKind::logistic)
    throw std::invalid_argument(
        "config: bernoulli noise requires a link with range in [0,1]");
  if (theta_star.explicit_values) {
    if (theta_star.beta.size() != d || theta_star.gamma.size() != d)
      throw std::invalid_argument("config: beta_gen/gamma_gen need d entries");
    Eigen::VectorXd full(2 * d);
    full << theta_star.beta, theta_star.gamma;
    if (full.norm() > theta_bar * (1.0 + 1e-12))
      throw std::invalid_argument(
          "config: explicit (beta, gamma) exceeds the theta_bar ball");
  } else if (theta_bar < kSqrt5) {
    throw std::invalid_argument(
        "config: generated instances need theta_bar >= sqrt(5)");
  }
  if (covariates.mode == CovariateMode::file && covariates.path.empty())
    throw std::invalid_argument("config: covariate file mode needs a path");
  if (covariates.mode == CovariateMode::phased) phased_block_count(covariates.n_phases);
}

ParamVector draw_theta_star(const ExperimentConfig& config, RngEngine& rng) {
  if (config.theta_star.explicit_values)
    return {config.theta_star.beta, config.theta_star.gamma, config.theta_bar};
  const double root_d = std::sqrt(static_cast<double>(config.d));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd beta(config.d), gamma(config.d);
  for (int i = 0; i < config.d; ++i) beta[i] = (1.0 + unif(rng)) / root_d;
  for (int i = 0; i < config.d; ++i) gamma[i] = -unif(rng) / root_d;
  return {std::move(beta), std::move(gamma), config.theta_bar};
}

TrialResult run_trial(const ExperimentConfig& config, int trial_index,
                      StepObserver* observer) {
  config.validate();
  const std::uint64_t tseed = trial_seed(config.seed, trial_index);
  RngEngine param_rng = make_stream(tseed, Stream::kParamDraw);
  RngEngine cov_rng = make_stream(tseed, Stream::kCovariates);
  RngEngine shock_rng = make_stream(tseed, Stream::kDemandShock);
  RngEngine policy_rng = make_stream(tseed, Stream::kPolicy);

  const ParamVector theta_star = draw_theta_star(config, param_rng);
  const LinkFunction link = config.make_link();
  const DemandModel model(link, theta_star, config.shock, config.sigma_bar);

  CovariateStreamSpec cov = config.covariates;
  cov.d = config.d;
  cov.T = config.T;
  cov.p_max = config.prices.p_max;
  cov = prepare_covariates(std::move(cov));

  const auto policy = make_policy(config.policy, config.policy_env(), theta_star);

  TrialResult out;
  out.trial_index = trial_index;
  out.seed = tseed;
  out.theta_star = theta_star.theta();
  out.ledger.reserve(config.T);

  double cum = 0.0;
  for (int t = 1; t <= config.T; ++t) {
    const Eigen::VectorXd x = next_covariate(cov, t, cov_rng);
    double p = policy->choose_price(x, t, policy_rng);
    if (!std::isfinite(p))
      throw std::runtime_error("run_trial: policy produced a non-finite price");
    p = config.prices.clip(p);
    const double D = sample_demand(model, x, p, shock_rng);
    const PriceSolution opt = optimal_price(link, theta_star, x, config.prices);
    const double rev = expected_revenue(link, theta_star, x, p);
    const double inst = opt.r_star - rev;
    cum += inst;
    out.ledger.push_back({t, x, p, D, opt.r_star, rev, inst, cum});
    policy->observe(x, p, D);
    if (observer) observer->on_step({t, x, p, D, inst, *policy, theta_star});
  }
  out.final_cum_regret = cum;
  return out;
}

AggregateResult run_experiment(const ExperimentConfig& config, int jobs) {
  config.validate();
  const int n = config.trials;
  std::vector<TrialResult> trials(n);

  const auto run_indexed = [&](int i) {
    try {
      trials[i] = run_trial(config, i);
    } catch (const std::exception& e) {
      throw std::runtime_error("trial " + std::to_string(i) + ": " + e.what());
    }
  };

  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) run_indexed(i);
  } else {
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(jobs);
    workers.reserve(jobs);
    for (int w = 0; w < jobs; ++w) {
      workers.emplace_back([&, w] {
        try {
          for (int i = w; i < n; i += jobs) run_indexed(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& worker : workers) worker.join();
    for (const auto& err : errors)
      if (err) std::rethrow_exception(err);
  }

  AggregateResult agg;
  agg.mean_cum_regret.resize(config.T);
  agg.stderr_cum_regret.resize(config.T);
  for (int t = 0; t < config.T; ++t) {
    double mean = 0.0;
    for (const auto& trial : trials) mean += trial.ledger[t].cum_regret;
    mean /= n;
    double var = 0.0;
    if (n > 1) {
      for (const auto& trial : trials) {
        const double diff = trial.ledger[t].cum_regret - mean;
        var += diff * diff;
      }
      var /= (n - 1);
    }
    agg.mean_cum_regret[t] = mean;
    agg.stderr_cum_regret[t] = std::sqrt(var / n);
  }
  agg.trials = std::move(trials);
  return agg;
}

namespace {

class CoverageObserver : public StepObserver {
 public:
  CoverageObserver(const ExperimentConfig& config, double multiplier)
      : config_(config), multiplier_(multiplier) {}

  void on_step(const StepContext& ctx) override {
    const EstimatorState* est = ctx.policy.estimator();
    if (!est)
      throw std::invalid_argument(
          "coverage_audit: policy does not expose an estimator");
    const double alpha =
        multiplier_ * confidence_radius(est->design(), config_.T, est->lambda(),
                                        est->theta_bar(),
                                        config_.effective_sigma_bar(),
                                        est->link().g_lower());
    Eigen::VectorXd target;
    if (est->design().dim() == 2 * config_.d)
      target = ctx.theta_star.theta();
    else if (est->design().dim() == config_.d)
      target = ctx.theta_star.beta();
    else
      throw std::invalid_argument("coverage_audit: unexpected estimator dimension");
    const Eigen::VectorXd diff = target - est->theta_hat();
    if (std::sqrt(est->design().norm_sq(diff)) > alpha && covered) {
      covered = false;
      first_violation = ctx.t;
    }
    final_alpha = alpha;
    final_log_det = est->design().log_det();
  }

  bool covered = true;
  int first_violation = -1;
  double final_alpha = 0.0;
  double final_log_det = 0.0;

 private:
  const ExperimentConfig& config_;
  double multiplier_;
};

class FeatureCollector : public StepObserver {
 public:
  void on_step(const StepContext& ctx) override {
    zs.push_back(make_feature(ctx.x, ctx.price));
  }

  std::vector<Eigen::VectorXd> zs;
};

}  // namespace

CoverageAudit coverage_audit(const ExperimentConfig& config,
                             double radius_multiplier) {
  if (config.policy.refit_every != 1)
    throw std::invalid_argument("coverage_audit: requires refit_every = 1");
  if (!(radius_multiplier > 0.0))
    throw std::invalid_argument("coverage_audit: multiplier must be positive");
  CoverageAudit audit;
  audit.trials = config.trials;
  for (int i = 0; i < config.trials; ++i) {
    CoverageObserver obs(config, radius_multiplier);
    run_trial(config, i, &obs);
    audit.per_trial.push_back(
        {i, obs.covered, obs.first_violation, obs.final_alpha, obs.final_log_det});
    if (obs.covered) ++audit.covered;
  }
  audit.fraction = static_cast<double>(audit.covered) / audit.trials;
  return audit;
}

std::vector<PotentialTrial> potential_audit(const ExperimentConfig& config) {
  if (config.covariates.normalize != NormalizeMode::feature)
    throw std::invalid_argument(
        "potential_audit: requires feature normalization so ||z|| <= 1");
  if (!(config.policy.lambda >= 1.0))
    throw std::invalid_argument("potential_audit: requires lambda >= 1");
  std::vector<PotentialTrial> out;
  out.reserve(config.trials);
  for (int i = 0; i < config.trials; ++i) {
    FeatureCollector collector;
    run_trial(config, i, &collector);
    out.push_back({i, elliptical_potential_audit(collector.zs, config.policy.lambda)});
  }
  return out;
}

}  // namespace pricelab
