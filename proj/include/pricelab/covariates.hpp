#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

#include "pricelab/rng.hpp"

namespace pricelab {

enum class CovariateMode { iid, phased, file };
enum class NormalizeMode { none, unit, feature };

struct CovariateStreamSpec {
  CovariateMode mode = CovariateMode::iid;
  int d = 1;
  int T = 1;
  int n_phases = 2;   // phased only
  std::string path;   // file only
  NormalizeMode normalize = NormalizeMode::none;
  double scale = 0.0;  // 0 -> 1/sqrt(d)
  double p_max = 5.0;  // feature normalization bound

  // file mode rows, loaded once via prepare_covariates
  std::shared_ptr<const std::vector<Eigen::VectorXd>> file_rows;

  double effective_scale() const;
};

using FeatureVector = Eigen::VectorXd;

// number of activation blocks backing the phase cycle
int phased_block_count(int n_phases);
// 1-based phase of period t with boundaries at ceil(m*T/n)
int phase_of(int t, int T, int n_phases);
// 0-based entry range [lo, hi) active during phase m
std::pair<int, int> phased_active_range(int d, int n_phases, int phase);

Eigen::VectorXd next_covariate(const CovariateStreamSpec& spec, int t,
                               RngEngine& rng);

FeatureVector make_feature(const Eigen::VectorXd& x, double p);

std::vector<Eigen::VectorXd> load_covariates(
    const std::string& path, int d, int T,
    NormalizeMode normalize = NormalizeMode::none);

// loads file-mode rows (no-op for generated modes)
CovariateStreamSpec prepare_covariates(CovariateStreamSpec spec);

}  // namespace pricelab
