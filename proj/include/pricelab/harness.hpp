#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "pricelab/covariates.hpp"
#include "pricelab/demand.hpp"
#include "pricelab/policies.hpp"

namespace pricelab {

struct ThetaStarSpec {
  bool explicit_values = false;
  Eigen::VectorXd beta;   // used when explicit
  Eigen::VectorXd gamma;
};

struct ExperimentConfig {
  int d = 6;
  int T = 1500;
  int trials = 100;
  std::uint64_t seed = 1;

  LinkKind link = LinkKind::identity;
  ShockSpec shock = ShockSpec::gaussian(0.25);
  double sigma_bar = 0.0;  // 0 -> shock.sigma_bar()
  double theta_bar = 3.0;
  ThetaStarSpec theta_star;

  PriceRange prices{0.1, 5.0};
  CovariateStreamSpec covariates;
  PolicySpec policy;

  LinkFunction make_link() const;
  double effective_sigma_bar() const;
  PolicyEnv policy_env() const;
  void validate() const;
};

struct StepRecord {
  int t;
  Eigen::VectorXd x;
  double price;
  double demand;
  double oracle_revenue;
  double expected_revenue;
  double inst_regret;
  double cum_regret;
};

using RegretLedger = std::vector<StepRecord>;

struct TrialResult {
  int trial_index = 0;
  std::uint64_t seed = 0;
  Eigen::VectorXd theta_star;
  RegretLedger ledger;
  double final_cum_regret = 0.0;
};

struct AggregateResult {
  std::vector<double> mean_cum_regret;
  std::vector<double> stderr_cum_regret;
  std::vector<TrialResult> trials;
};

struct StepContext {
  int t;
  const Eigen::VectorXd& x;
  double price;
  double demand;
  double inst_regret;
  const PricingPolicy& policy;
  const ParamVector& theta_star;
};

// invoked after the policy has observed period t
struct StepObserver {
  virtual ~StepObserver() = default;
  virtual void on_step(const StepContext& ctx) = 0;
};

ParamVector draw_theta_star(const ExperimentConfig& config, RngEngine& rng);

TrialResult run_trial(const ExperimentConfig& config, int trial_index,
                      StepObserver* observer = nullptr);

AggregateResult run_experiment(const ExperimentConfig& config, int jobs = 1);

struct CoverageTrial {
  int trial;
  bool covered;
  int first_violation_t;  // -1 when covered
  double final_alpha;
  double final_log_det;
};

struct CoverageAudit {
  int trials = 0;
  int covered = 0;
  double fraction = 0.0;
  std::vector<CoverageTrial> per_trial;
};

CoverageAudit coverage_audit(const ExperimentConfig& config,
                             double radius_multiplier = 1.0);

struct PotentialTrial {
  int trial;
  PotentialAudit audit;
};

// requires feature normalization and lambda >= 1 so the audited bound applies
std::vector<PotentialTrial> potential_audit(const ExperimentConfig& config);

}  // namespace pricelab
