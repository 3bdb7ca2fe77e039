#include "pricelab/config.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace pricelab {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

using Table = std::map<std::string, std::map<std::string, Entry>>;

const std::map<std::string, std::set<std::string>> kSchema = {
    {"experiment", {"d", "T", "trials", "seed"}},
    {"demand",
     {"link", "noise", "sigma", "sigma_bar", "theta_bar", "beta_gen",
      "gamma_gen"}},
    {"prices", {"min", "max"}},
    {"covariates", {"mode", "phases", "file", "normalize", "scale"}},
    {"policy",
     {"kind", "lambda", "K", "kappa", "radius_mode", "radius_value",
      "ts_scale_mode", "ts_scale_value", "refit_every", "tol"}},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& source, int line,
                       const std::string& message) {
  std::ostringstream oss;
  oss << source << ":" << line << ": " << message;
  throw ConfigError(oss.str());
}

[[noreturn]] void fail_key(const std::string& source, int line,
                           const std::string& section, const std::string& key,
                           const std::string& message) {
  std::ostringstream oss;
  oss << source << ":" << line << ": [" << section << "] " << key << ": "
      << message;
  throw ConfigError(oss.str());
}

Table tokenize(const std::string& text, const std::string& source) {
  Table table;
  std::istringstream stream(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        fail(source, line_no, "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (kSchema.find(section) == kSchema.end())
        fail(source, line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(source, line_no, "expected 'key = value', got '" + line + "'");
    if (section.empty())
      fail(source, line_no, "key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& allowed = kSchema.at(section);
    if (allowed.find(key) == allowed.end())
      fail_key(source, line_no, section, key, "unknown key");
    auto [it, inserted] = table[section].emplace(key, Entry{value, line_no});
    if (!inserted)
      fail_key(source, line_no, section, key,
               "duplicate key (first set on line " +
                   std::to_string(it->second.line) + ")");
  }
  return table;
}

// typed lookups against a tokenized table, defaulting when absent
class Reader {
 public:
  Reader(const Table& table, std::string source)
      : table_(table), source_(std::move(source)) {}

  const Entry* find(const std::string& section, const std::string& key) const {
    const auto sec = table_.find(section);
    if (sec == table_.end()) return nullptr;
    const auto it = sec->second.find(key);
    return it == sec->second.end() ? nullptr : &it->second;
  }

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
    const Entry* e = find(section, key);
    return e ? e->value : fallback;
  }

  double get_double(const std::string& section, const std::string& key,
                    double fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    return parse_double(section, key, *e);
  }

  int get_int(const std::string& section, const std::string& key,
              int fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    int out = 0;
    const auto [ptr, ec] =
        std::from_chars(e->value.data(), e->value.data() + e->value.size(), out);
    if (ec != std::errc{} || ptr != e->value.data() + e->value.size())
      fail_key(source_, e->line, section, key,
               "invalid integer '" + e->value + "'");
    return out;
  }

  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    std::uint64_t out = 0;
    const auto [ptr, ec] =
        std::from_chars(e->value.data(), e->value.data() + e->value.size(), out);
    if (ec != std::errc{} || ptr != e->value.data() + e->value.size())
      fail_key(source_, e->line, section, key,
               "invalid unsigned integer '" + e->value + "'");
    return out;
  }

  double parse_double(const std::string& section, const std::string& key,
                      const Entry& e) const {
    double out = 0.0;
    const auto [ptr, ec] =
        std::from_chars(e.value.data(), e.value.data() + e.value.size(), out);
    if (ec != std::errc{} || ptr != e.value.data() + e.value.size())
      fail_key(source_, e.line, section, key, "invalid number '" + e.value + "'");
    return out;
  }

  template <typename T>
  T get_enum(const std::string& section, const std::string& key, T fallback,
             const std::vector<std::pair<std::string, T>>& options) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    for (const auto& option : options)
      if (e->value == option.first) return option.second;
    std::string expected;
    for (const auto& option : options) {
      if (!expected.empty()) expected += ", ";
      expected += option.first;
    }
    fail_key(source_, e->line, section, key,
             "invalid value '" + e->value + "' (expected one of: " + expected +
                 ")");
  }

  // "uniform" or a comma-separated list of d numbers
  bool get_gen(const std::string& section, const std::string& key, int d,
               Eigen::VectorXd& out) const {
    const Entry* e = find(section, key);
    if (!e || e->value == "uniform") return false;
    std::vector<double> values;
    std::string token;
    std::istringstream parts(e->value);
    while (std::getline(parts, token, ',')) {
      const std::string field = trim(token);
      const Entry sub{field, e->line};
      values.push_back(parse_double(section, key, sub));
    }
    if (static_cast<int>(values.size()) != d)
      fail_key(source_, e->line, section, key,
               "expected 'uniform' or " + std::to_string(d) +
                   " comma-separated numbers, got " +
                   std::to_string(values.size()));
    out = Eigen::Map<Eigen::VectorXd>(values.data(), d);
    return true;
  }

  const std::string& source() const { return source_; }

 private:
  const Table& table_;
  std::string source_;
};

}  // namespace

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& source_name) {
  const Table table = tokenize(text, source_name);
  const Reader reader(table, source_name);

  ExperimentConfig config;
  config.d = reader.get_int("experiment", "d", 6);
  config.T = reader.get_int("experiment", "T", 1500);
  config.trials = reader.get_int("experiment", "trials", 100);
  config.seed = reader.get_u64("experiment", "seed", 1);

  config.link = reader.get_enum<LinkKind>(
      "demand", "link", LinkKind::identity,
      {{"identity", LinkKind::identity}, {"logistic", LinkKind::logistic}});
  const ShockKind noise = reader.get_enum<ShockKind>(
      "demand", "noise", ShockKind::gaussian,
      {{"gaussian", ShockKind::gaussian},
       {"bernoulli", ShockKind::bernoulli},
       {"bounded_uniform", ShockKind::bounded_uniform}});
  const double sigma = reader.get_double("demand", "sigma", 0.25);
  try {
    switch (noise) {
      case ShockKind::bernoulli:
        config.shock = ShockSpec::bernoulli();
        config.shock.sigma = sigma;
        break;
      case ShockKind::gaussian:
        config.shock = ShockSpec::gaussian(sigma);
        break;
      case ShockKind::bounded_uniform:
        config.shock = ShockSpec::bounded_uniform(sigma);
        break;
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source_name + ": [demand] sigma: " + e.what());
  }
  config.sigma_bar = reader.get_double("demand", "sigma_bar", 0.0);
  config.theta_bar = reader.get_double("demand", "theta_bar", 3.0);
  const bool has_beta =
      reader.get_gen("demand", "beta_gen", config.d, config.theta_star.beta);
  const bool has_gamma =
      reader.get_gen("demand", "gamma_gen", config.d, config.theta_star.gamma);
  if (has_beta != has_gamma)
    throw ConfigError(source_name +
                      ": [demand] beta_gen/gamma_gen must both be 'uniform' or "
                      "both be explicit lists");
  config.theta_star.explicit_values = has_beta;

  const double p_min = reader.get_double("prices", "min", 0.1);
  const double p_max = reader.get_double("prices", "max", 5.0);
  try {
    config.prices = PriceRange(p_min, p_max);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source_name + ": [prices]: " + e.what());
  }

  config.covariates.mode = reader.get_enum<CovariateMode>(
      "covariates", "mode", CovariateMode::iid,
      {{"iid", CovariateMode::iid},
       {"phased", CovariateMode::phased},
       {"file", CovariateMode::file}});
  config.covariates.n_phases = reader.get_int("covariates", "phases", 2);
  config.covariates.path = reader.get_string("covariates", "file", "");
  config.covariates.normalize = reader.get_enum<NormalizeMode>(
      "covariates", "normalize", NormalizeMode::none,
      {{"none", NormalizeMode::none},
       {"unit", NormalizeMode::unit},
       {"feature", NormalizeMode::feature}});
  config.covariates.scale = reader.get_double("covariates", "scale", 0.0);

  config.policy.kind = reader.get_enum<PolicyKind>(
      "policy", "kind", PolicyKind::ucb,
      {{"ucb", PolicyKind::ucb},
       {"ucb_approx", PolicyKind::ucb_approx},
       {"ts", PolicyKind::ts},
       {"ts_approx", PolicyKind::ts_approx},
       {"ce", PolicyKind::ce},
       {"cils", PolicyKind::cils},
       {"oracle", PolicyKind::oracle}});
  config.policy.lambda = reader.get_double("policy", "lambda", 1.0);
  config.policy.K = reader.get_int("policy", "K", 100);
  config.policy.kappa = reader.get_double("policy", "kappa", 0.6);
  config.policy.radius_mode = reader.get_enum<RadiusMode>(
      "policy", "radius_mode", RadiusMode::corollary1,
      {{"corollary1", RadiusMode::corollary1},
       {"fixed", RadiusMode::fixed},
       {"fixed_sq", RadiusMode::fixed_sq}});
  config.policy.radius_value = reader.get_double("policy", "radius_value", 0.0);
  config.policy.ts_scale_mode = reader.get_enum<ScaleMode>(
      "policy", "ts_scale_mode", ScaleMode::corollary1,
      {{"corollary1", ScaleMode::corollary1}, {"fixed", ScaleMode::fixed}});
  config.policy.ts_scale_value =
      reader.get_double("policy", "ts_scale_value", 0.0);
  config.policy.refit_every = reader.get_int("policy", "refit_every", 1);
  config.policy.tol = reader.get_double("policy", "tol", 1e-8);

  return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_gen(const ThetaStarSpec& spec, const Eigen::VectorXd& values) {
  if (!spec.explicit_values) return "uniform";
  std::string out;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += fmt_double(values[i]);
  }
  return out;
}

const char* link_name(LinkKind kind) {
  switch (kind) {
    case LinkKind::identity: return "identity";
    case LinkKind::logistic: return "logistic";
    case LinkKind::custom: return "custom";
  }
  return "identity";
}

const char* noise_name(ShockKind kind) {
  switch (kind) {
    case ShockKind::gaussian: return "gaussian";
    case ShockKind::bernoulli: return "bernoulli";
    case ShockKind::bounded_uniform: return "bounded_uniform";
  }
  return "gaussian";
}

const char* mode_name(CovariateMode mode) {
  switch (mode) {
    case CovariateMode::iid: return "iid";
    case CovariateMode::phased: return "phased";
    case CovariateMode::file: return "file";
  }
  return "iid";
}

const char* normalize_name(NormalizeMode mode) {
  switch (mode) {
    case NormalizeMode::none: return "none";
    case NormalizeMode::unit: return "unit";
    case NormalizeMode::feature: return "feature";
  }
  return "none";
}

const char* kind_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::ucb: return "ucb";
    case PolicyKind::ucb_approx: return "ucb_approx";
    case PolicyKind::ts: return "ts";
    case PolicyKind::ts_approx: return "ts_approx";
    case PolicyKind::ce: return "ce";
    case PolicyKind::cils: return "cils";
    case PolicyKind::oracle: return "oracle";
  }
  return "ucb";
}

const char* radius_mode_name(RadiusMode mode) {
  switch (mode) {
    case RadiusMode::corollary1: return "corollary1";
    case RadiusMode::fixed: return "fixed";
    case RadiusMode::fixed_sq: return "fixed_sq";
  }
  return "corollary1";
}

const char* scale_mode_name(ScaleMode mode) {
  return mode == ScaleMode::fixed ? "fixed" : "corollary1";
}

}  // namespace

std::string config_echo(const ExperimentConfig& config) {
  std::ostringstream out;
  out << "[experiment]\n";
  out << "d = " << config.d << "\n";
  out << "T = " << config.T << "\n";
  out << "trials = " << config.trials << "\n";
  out << "seed = " << config.seed << "\n";
  out << "\n[demand]\n";
  out << "link = " << link_name(config.link) << "\n";
  out << "noise = " << noise_name(config.shock.kind) << "\n";
  out << "sigma = " << fmt_double(config.shock.sigma) << "\n";
  out << "sigma_bar = " << fmt_double(config.sigma_bar) << "\n";
  out << "theta_bar = " << fmt_double(config.theta_bar) << "\n";
  out << "beta_gen = " << fmt_gen(config.theta_star, config.theta_star.beta)
      << "\n";
  out << "gamma_gen = " << fmt_gen(config.theta_star, config.theta_star.gamma)
      << "\n";
  out << "\n[prices]\n";
  out << "min = " << fmt_double(config.prices.p_min) << "\n";
  out << "max = " << fmt_double(config.prices.p_max) << "\n";
  out << "\n[covariates]\n";
  out << "mode = " << mode_name(config.covariates.mode) << "\n";
  out << "phases = " << config.covariates.n_phases << "\n";
  out << "file = " << config.covariates.path << "\n";
  out << "normalize = " << normalize_name(config.covariates.normalize) << "\n";
  out << "scale = " << fmt_double(config.covariates.scale) << "\n";
  out << "\n[policy]\n";
  out << "kind = " << kind_name(config.policy.kind) << "\n";
  out << "lambda = " << fmt_double(config.policy.lambda) << "\n";
  out << "K = " << config.policy.K << "\n";
  out << "kappa = " << fmt_double(config.policy.kappa) << "\n";
  out << "radius_mode = " << radius_mode_name(config.policy.radius_mode) << "\n";
  out << "radius_value = " << fmt_double(config.policy.radius_value) << "\n";
  out << "ts_scale_mode = " << scale_mode_name(config.policy.ts_scale_mode)
      << "\n";
  out << "ts_scale_value = " << fmt_double(config.policy.ts_scale_value)
      << "\n";
  out << "refit_every = " << config.policy.refit_every << "\n";
  out << "tol = " << fmt_double(config.policy.tol) << "\n";
  return out.str();
}

}  // namespace pricelab
