#include "pricelab/covariates.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <utility>

namespace pricelab {

double CovariateStreamSpec::effective_scale() const {
  return scale > 0.0 ? scale : 1.0 / std::sqrt(static_cast<double>(d));
}

int phased_block_count(int n_phases) {
  if (n_phases < 2) throw std::invalid_argument("phased mode requires n_phases >= 2");
  return n_phases <= 3 ? n_phases : (n_phases + 1) / 2;
}

int phase_of(int t, int T, int n_phases) {
  if (t < 1 || t > T) throw std::out_of_range("phase_of: t outside [1, T]");
  for (int m = 1; m <= n_phases; ++m) {
    const long long boundary =
        (static_cast<long long>(m) * T + n_phases - 1) / n_phases;
    if (t <= boundary) return m;
  }
  return n_phases;
}

std::pair<int, int> phased_active_range(int d, int n_phases, int phase) {
  const int blocks = phased_block_count(n_phases);
  const int b = (phase - 1) % blocks + 1;
  const int lo = ((b - 1) * d + blocks - 1) / blocks;
  const int hi = (b * d + blocks - 1) / blocks;
  return {lo, hi};
}

namespace {

Eigen::VectorXd apply_normalize(Eigen::VectorXd x, NormalizeMode mode,
                                double p_max) {
  if (mode == NormalizeMode::none) return x;
  const double n = x.norm();
  if (n == 0.0) return x;
  if (mode == NormalizeMode::unit) return x / n;
  return x / (n * std::sqrt(1.0 + p_max * p_max));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Eigen::VectorXd next_covariate(const CovariateStreamSpec& spec, int t,
                               RngEngine& rng) {
  if (spec.d < 1) throw std::invalid_argument("covariates: d must be >= 1");
  if (t < 1 || t > spec.T)
    throw std::out_of_range("next_covariate: t outside [1, T]");

  Eigen::VectorXd x = Eigen::VectorXd::Zero(spec.d);
  switch (spec.mode) {
    case CovariateMode::iid: {
      std::uniform_real_distribution<double> u(0.0, spec.effective_scale());
      for (int i = 0; i < spec.d; ++i) x[i] = u(rng);
      break;
    }
    case CovariateMode::phased: {
      const int phase = phase_of(t, spec.T, spec.n_phases);
      const auto [lo, hi] = phased_active_range(spec.d, spec.n_phases, phase);
      std::uniform_real_distribution<double> u(0.0, spec.effective_scale());
      for (int i = lo; i < hi; ++i) x[i] = u(rng);
      break;
    }
    case CovariateMode::file: {
      if (spec.file_rows) {
        const auto& rows = *spec.file_rows;
        if (t > static_cast<int>(rows.size()))
          throw std::runtime_error("next_covariate: insufficient rows in covariate file");
        x = rows[t - 1];
      } else {
        x = load_covariates(spec.path, spec.d, spec.T)[t - 1];
      }
      break;
    }
  }
  return apply_normalize(std::move(x), spec.normalize, spec.p_max);
}

FeatureVector make_feature(const Eigen::VectorXd& x, double p) {
  if (!std::isfinite(p)) throw std::invalid_argument("make_feature: price must be finite");
  FeatureVector z(2 * x.size());
  z.head(x.size()) = x;
  z.tail(x.size()) = p * x;
  return z;
}

std::vector<Eigen::VectorXd> load_covariates(const std::string& path, int d,
                                             int T, NormalizeMode normalize) {
  if (normalize == NormalizeMode::feature)
    throw std::invalid_argument(
        "load_covariates: feature normalization is applied by the stream, not the loader");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_covariates: cannot open " + path);

  std::vector<Eigen::VectorXd> rows;
  rows.reserve(T);
  std::string line;
  int row = 0;
  while (static_cast<int>(rows.size()) < T && std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    Eigen::VectorXd x(d);
    std::string_view rest = line;
    for (int col = 0; col < d; ++col) {
      const auto comma = rest.find(',');
      const std::string_view field =
          trim(comma == std::string_view::npos ? rest : rest.substr(0, comma));
      if (field.empty())
        throw std::runtime_error(path + ": row " + std::to_string(row) +
                                 ", column " + std::to_string(col + 1) +
                                 ": empty field");
      double v = 0.0;
      const auto [ptr, ec] =
          std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size())
        throw std::runtime_error(path + ": row " + std::to_string(row) +
                                 ", column " + std::to_string(col + 1) +
                                 ": invalid number '" + std::string(field) + "'");
      x[col] = v;
      if (comma == std::string_view::npos) {
        if (col + 1 < d)
          throw std::runtime_error(path + ": row " + std::to_string(row) +
                                   ": expected " + std::to_string(d) +
                                   " fields, got " + std::to_string(col + 1));
        rest = {};
      } else {
        rest = rest.substr(comma + 1);
      }
    }
    if (!trim(rest).empty())
      throw std::runtime_error(path + ": row " + std::to_string(row) +
                               ": expected " + std::to_string(d) + " fields, got more");
    rows.push_back(apply_normalize(std::move(x), normalize, 0.0));
  }
  if (static_cast<int>(rows.size()) < T)
    throw std::runtime_error(path + ": insufficient rows (need " +
                             std::to_string(T) + ", found " +
                             std::to_string(rows.size()) + ")");
  return rows;
}

CovariateStreamSpec prepare_covariates(CovariateStreamSpec spec) {
  if (spec.mode == CovariateMode::file && !spec.file_rows)
    spec.file_rows = std::make_shared<const std::vector<Eigen::VectorXd>>(
        load_covariates(spec.path, spec.d, spec.T));
  return spec;
}

}  // namespace pricelab
