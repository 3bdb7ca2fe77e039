#include "pricelab/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pricelab/config.hpp"

namespace pricelab {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

ExperimentConfig load_checked(const std::string& config_path) {
  ExperimentConfig config = parse_config_file(config_path);
  config.validate();
  return config;
}

void write_trial_csv(const fs::path& path, const TrialResult& trial) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "trial,t,price,demand,oracle_revenue,expected_revenue,inst_regret,"
         "cum_regret\n";
  for (const auto& rec : trial.ledger) {
    out << trial.trial_index << ',' << rec.t << ',' << fmt_g(rec.price) << ','
        << fmt_g(rec.demand) << ',' << fmt_g(rec.oracle_revenue) << ','
        << fmt_g(rec.expected_revenue) << ',' << fmt_g(rec.inst_regret) << ','
        << fmt_g(rec.cum_regret) << '\n';
  }
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

int parse_row_int(const std::string& field, int row, const char* what) {
  int out = 0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), out);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw std::runtime_error("row " + std::to_string(row) + ": invalid " +
                             what + " '" + field + "'");
  return out;
}

double parse_row_double(const std::string& field, int row, const char* what) {
  double out = 0.0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), out);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw std::runtime_error("row " + std::to_string(row) + ": invalid " +
                             what + " '" + field + "'");
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream parts(line);
  while (std::getline(parts, field, ',')) fields.push_back(field);
  return fields;
}

// (t, mean over trials of cum_regret at t), ts in ascending order
std::vector<std::pair<int, double>> reduce_ledger_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty ledger");
  const std::vector<std::string> header = split_csv(line);
  const auto col = [&](const char* name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw std::runtime_error("row 1: missing column '" + std::string(name) +
                               "'");
    return static_cast<int>(it - header.begin());
  };
  const int t_col = col("t");
  const int cum_col = col("cum_regret");

  std::vector<std::pair<double, int>> acc;  // sum, count per t index
  int max_t = 0;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    const int need = std::max(t_col, cum_col) + 1;
    if (static_cast<int>(fields.size()) < need)
      throw std::runtime_error("row " + std::to_string(row) + ": expected >= " +
                               std::to_string(need) + " fields, got " +
                               std::to_string(fields.size()));
    const int t = parse_row_int(fields[t_col], row, "t");
    const double cum = parse_row_double(fields[cum_col], row, "cum_regret");
    if (t < 1) throw std::runtime_error("row " + std::to_string(row) + ": t must be >= 1");
    if (t > max_t) {
      acc.resize(t, {0.0, 0});
      max_t = t;
    }
    acc[t - 1].first += cum;
    acc[t - 1].second += 1;
  }
  if (max_t == 0) throw std::runtime_error("empty ledger");

  std::vector<std::pair<int, double>> out;
  out.reserve(max_t);
  for (int t = 1; t <= max_t; ++t) {
    if (acc[t - 1].second == 0)
      throw std::runtime_error("no rows for t = " + std::to_string(t));
    out.emplace_back(t, acc[t - 1].first / acc[t - 1].second);
  }
  return out;
}

std::vector<std::pair<int, double>> reduce_aggregate_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.contains("per_t") || !doc["per_t"].is_array())
    throw std::runtime_error("aggregate JSON lacks a per_t array");
  std::vector<std::pair<int, double>> out;
  int row = 0;
  for (const auto& item : doc["per_t"]) {
    ++row;
    if (!item.contains("t") || !item.contains("mean_cum_regret"))
      throw std::runtime_error("per_t row " + std::to_string(row) +
                               ": needs t and mean_cum_regret");
    out.emplace_back(item["t"].get<int>(), item["mean_cum_regret"].get<double>());
  }
  if (out.empty()) throw std::runtime_error("empty ledger");
  return out;
}

}  // namespace

int cmd_run(const std::string& config_path, const std::string& out_dir,
            int jobs) {
  ExperimentConfig config;
  try {
    config = load_checked(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    const AggregateResult agg = run_experiment(config, jobs);

    fs::create_directories(out_dir);
    for (const auto& trial : agg.trials) {
      char name[32];
      std::snprintf(name, sizeof(name), "trial_%04d.csv", trial.trial_index);
      write_trial_csv(fs::path(out_dir) / name, trial);
    }

    json per_t = json::array();
    for (int t = 1; t <= config.T; ++t)
      per_t.push_back({{"t", t},
                       {"mean_cum_regret", agg.mean_cum_regret[t - 1]},
                       {"stderr", agg.stderr_cum_regret[t - 1]}});
    const json doc = {{"config_echo", config_echo(config)},
                      {"per_t", per_t},
                      {"audits", json::object()}};
    write_text(fs::path(out_dir) / "aggregate.json", doc.dump(2) + "\n");

    std::cout << "final mean cumulative regret: "
              << fmt_g(agg.mean_cum_regret.back()) << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_audit(const std::string& config_path, const std::string& kind,
              const std::string& out_dir) {
  ExperimentConfig config;
  try {
    config = load_checked(config_path);
    if (kind != "coverage" && kind != "potential")
      throw ConfigError("unknown audit kind '" + kind +
                        "' (expected coverage or potential)");
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    json doc;
    if (kind == "coverage") {
      CoverageAudit audit;
      try {
        audit = coverage_audit(config);
      } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
      }
      json per_trial = json::array();
      for (const auto& trial : audit.per_trial)
        per_trial.push_back({{"trial", trial.trial},
                             {"coverage_ok", trial.covered},
                             {"first_violation_t", trial.first_violation_t},
                             {"alpha", trial.final_alpha},
                             {"log_det", trial.final_log_det}});
      doc = {{"kind", "coverage"},
             {"trials", audit.trials},
             {"covered", audit.covered},
             {"fraction", audit.fraction},
             {"per_trial", per_trial}};
      std::cout << "coverage fraction: " << fmt_g(audit.fraction) << "\n";
    } else {
      std::vector<PotentialTrial> audit;
      try {
        audit = potential_audit(config);
      } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
      }
      int violations = 0;
      json per_trial = json::array();
      for (const auto& trial : audit) {
        per_trial.push_back({{"trial", trial.trial},
                             {"potential_lhs", trial.audit.lhs},
                             {"potential_bound", trial.audit.bound},
                             {"ok", trial.audit.ok}});
        if (!trial.audit.ok) ++violations;
      }
      doc = {{"kind", "potential"},
             {"trials", static_cast<int>(audit.size())},
             {"violations", violations},
             {"per_trial", per_trial}};
      std::cout << "potential violations: " << violations << "\n";
    }
    fs::create_directories(out_dir);
    write_text(fs::path(out_dir) / "audit.json", doc.dump(2) + "\n");
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_plot_data(const std::string& in_path, const std::string& out_path) {
  try {
    std::ifstream in(in_path);
    if (!in) throw std::runtime_error("cannot open '" + in_path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    const auto first = text.find_first_not_of(" \t\r\n");
    std::vector<std::pair<int, double>> points;
    if (first != std::string::npos && text[first] == '{') {
      points = reduce_aggregate_json(text);
    } else {
      std::istringstream stream(text);
      points = reduce_ledger_csv(stream);
    }

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
    for (const auto& [t, mean] : points)
      out << t << ',' << fmt_g(mean) << '\n';
    if (!out) throw std::runtime_error("write failed for '" + out_path + "'");
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"dynamic pricing simulation laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", kind, in_path, out_path;
  int jobs = 1;

  CLI::App* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("-o,--out", out_dir, "output directory");
  run->add_option("-j,--jobs", jobs, "parallel trial workers");

  CLI::App* audit = app.add_subcommand("audit", "run a bound audit");
  audit->add_option("config", config_path, "config file")->required();
  audit->add_option("kind", kind, "coverage or potential")->required();
  audit->add_option("-o,--out", out_dir, "output directory");

  CLI::App* plot =
      app.add_subcommand("plot-data", "reduce a ledger to plot points");
  plot->add_option("input", in_path, "trial CSV or aggregate JSON")->required();
  plot->add_option("output", out_path, "output data file")->required();

  std::vector<const char*> argv;
  argv.push_back("pricelab");
  for (const auto& arg : args) argv.push_back(arg.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed()) return cmd_run(config_path, out_dir, jobs);
  if (audit->parsed()) return cmd_audit(config_path, kind, out_dir);
  if (plot->parsed()) return cmd_plot_data(in_path, out_path);
  return 2;
}

}  // namespace pricelab
