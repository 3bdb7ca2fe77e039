#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pricelab/cli.hpp"
#include "pricelab/config.hpp"

using namespace pricelab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;

  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("pricelab_cli_" + std::to_string(++counter) + "_" +
            std::to_string(static_cast<unsigned>(
                std::hash<const void*>{}(static_cast<const void*>(this)) &
                0xffffu)));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }

  fs::path file(const std::string& name, const std::string& content) const {
    const fs::path p = path / name;
    std::ofstream out(p);
    out << content;
    return p;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string parse_error(const std::string& text) {
  try {
    (void)parse_config_text(text, "cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

const char* kTinyRunConfig =
    "[experiment]\n"
    "d = 2\n"
    "T = 10\n"
    "trials = 2\n"
    "seed = 3\n"
    "\n"
    "[policy]\n"
    "kind = ucb\n"
    "K = 5\n"
    "radius_mode = fixed_sq\n"
    "radius_value = 0.2\n";

}  // namespace

TEST_CASE("empty config text yields the documented defaults") {
  const ExperimentConfig config = parse_config_text("", "mem");
  CHECK(config.d == 6);
  CHECK(config.T == 1500);
  CHECK(config.trials == 100);
  CHECK(config.seed == 1);
  CHECK(config.link == LinkKind::identity);
  CHECK(config.shock.kind == ShockKind::gaussian);
  CHECK(config.shock.sigma == 0.25);
  CHECK(config.sigma_bar == 0.0);
  CHECK(config.theta_bar == 3.0);
  CHECK_FALSE(config.theta_star.explicit_values);
  CHECK(config.prices.p_min == 0.1);
  CHECK(config.prices.p_max == 5.0);
  CHECK(config.covariates.mode == CovariateMode::iid);
  CHECK(config.covariates.n_phases == 2);
  CHECK(config.covariates.path.empty());
  CHECK(config.covariates.normalize == NormalizeMode::none);
  CHECK(config.covariates.scale == 0.0);
  CHECK(config.policy.kind == PolicyKind::ucb);
  CHECK(config.policy.lambda == 1.0);
  CHECK(config.policy.K == 100);
  CHECK(config.policy.kappa == 0.6);
  CHECK(config.policy.radius_mode == RadiusMode::corollary1);
  CHECK(config.policy.radius_value == 0.0);
  CHECK(config.policy.ts_scale_mode == ScaleMode::corollary1);
  CHECK(config.policy.ts_scale_value == 0.0);
  CHECK(config.policy.refit_every == 1);
  CHECK(config.policy.tol == 1e-8);
}

TEST_CASE("every field parses and echoes through a round trip") {
  const std::string text =
      "[experiment]\n"
      "d = 3\n"
      "T = 25  # periods\n"
      "trials = 4\n"
      "seed = 42\n"
      "\n"
      "[demand]\n"
      "link = logistic\n"
      "noise = bounded_uniform\n"
      "sigma = 0.2\n"
      "sigma_bar = 0.9\n"
      "theta_bar = 2.4\n"
      "beta_gen = 0.5, 0.5, 0.5\n"
      "gamma_gen = -0.5, -0.25, -0.125\n"
      "\n"
      "[prices]\n"
      "min = 0.25\n"
      "max = 4\n"
      "\n"
      "[covariates]\n"
      "mode = phased\n"
      "phases = 3\n"
      "file = rows.csv\n"
      "normalize = unit\n"
      "scale = 0.75\n"
      "\n"
      "[policy]\n"
      "kind = ts_approx\n"
      "lambda = 2\n"
      "K = 17\n"
      "kappa = 0.31\n"
      "radius_mode = fixed\n"
      "radius_value = 1.5\n"
      "ts_scale_mode = fixed\n"
      "ts_scale_value = 0.4\n"
      "refit_every = 5\n"
      "tol = 1e-6\n";
  const ExperimentConfig config = parse_config_text(text, "mem");
  CHECK(config.d == 3);
  CHECK(config.T == 25);
  CHECK(config.trials == 4);
  CHECK(config.seed == 42);
  CHECK(config.link == LinkKind::logistic);
  CHECK(config.shock.kind == ShockKind::bounded_uniform);
  CHECK(config.shock.sigma == 0.2);
  CHECK(config.sigma_bar == 0.9);
  CHECK(config.theta_bar == 2.4);
  REQUIRE(config.theta_star.explicit_values);
  CHECK(config.theta_star.beta == Eigen::VectorXd::Constant(3, 0.5));
  CHECK(config.theta_star.gamma[0] == -0.5);
  CHECK(config.theta_star.gamma[1] == -0.25);
  CHECK(config.theta_star.gamma[2] == -0.125);
  CHECK(config.prices.p_min == 0.25);
  CHECK(config.prices.p_max == 4.0);
  CHECK(config.covariates.mode == CovariateMode::phased);
  CHECK(config.covariates.n_phases == 3);
  CHECK(config.covariates.path == "rows.csv");
  CHECK(config.covariates.normalize == NormalizeMode::unit);
  CHECK(config.covariates.scale == 0.75);
  CHECK(config.policy.kind == PolicyKind::ts_approx);
  CHECK(config.policy.lambda == 2.0);
  CHECK(config.policy.K == 17);
  CHECK(config.policy.kappa == 0.31);
  CHECK(config.policy.radius_mode == RadiusMode::fixed);
  CHECK(config.policy.radius_value == 1.5);
  CHECK(config.policy.ts_scale_mode == ScaleMode::fixed);
  CHECK(config.policy.ts_scale_value == 0.4);
  CHECK(config.policy.refit_every == 5);
  CHECK(config.policy.tol == 1e-6);

  const std::string echo = config_echo(config);
  const ExperimentConfig reparsed = parse_config_text(echo, "echo");
  CHECK(config_echo(reparsed) == echo);
  CHECK(reparsed.seed == config.seed);
  CHECK(reparsed.shock.sigma == config.shock.sigma);
  CHECK(reparsed.theta_star.beta == config.theta_star.beta);
  CHECK(reparsed.policy.tol == config.policy.tol);
}

TEST_CASE("config diagnostics name the file, line, section, and key") {
  CHECK(parse_error("[experiment]\nd = 4\nd = 5\n") ==
        "cfg:3: [experiment] d: duplicate key (first set on line 2)");
  CHECK(parse_error("[experiment]\nbogus = 1\n") ==
        "cfg:2: [experiment] bogus: unknown key");
  CHECK(parse_error("[warehouse]\n") == "cfg:1: unknown section [warehouse]");
  CHECK(parse_error("[demand]\nsigma = abc\n") ==
        "cfg:2: [demand] sigma: invalid number 'abc'");
  CHECK(parse_error("[experiment]\nd four\n") ==
        "cfg:2: expected 'key = value', got 'd four'");
  CHECK(parse_error("d = 4\n") == "cfg:1: key outside of any section");
  CHECK(parse_error("[experiment]\nd = x\n") ==
        "cfg:2: [experiment] d: invalid integer 'x'");

  const std::string enum_error = parse_error("[demand]\nlink = probit\n");
  CHECK(enum_error.find("invalid value 'probit'") != std::string::npos);
  CHECK(enum_error.find("expected one of: identity, logistic") !=
        std::string::npos);

  CHECK(parse_error("[experiment]\nd = 2\n\n[demand]\nbeta_gen = 1, 2, 3\n"
                    "gamma_gen = -1, -2\n")
            .find("expected 'uniform' or 2 comma-separated numbers, got 3") !=
        std::string::npos);
  CHECK(parse_error("[demand]\nbeta_gen = 1, 1, 1, 1, 1, 1\n")
            .find("beta_gen/gamma_gen") != std::string::npos);
}

TEST_CASE("run command produces the full artifact set") {
  TempDir tmp;
  const fs::path cfg = tmp.file("run.cfg", kTinyRunConfig);
  const fs::path out = tmp.path / "out";
  REQUIRE(cmd_run(cfg.string(), out.string(), 1) == 0);

  REQUIRE(fs::exists(out / "trial_0000.csv"));
  REQUIRE(fs::exists(out / "trial_0001.csv"));
  REQUIRE(fs::exists(out / "aggregate.json"));

  const std::string csv = slurp(out / "trial_0000.csv");
  CHECK(csv.rfind("trial,t,price,demand,oracle_revenue,expected_revenue,"
                  "inst_regret,cum_regret\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);

  const nlohmann::json doc = nlohmann::json::parse(slurp(out / "aggregate.json"));
  REQUIRE(doc.contains("per_t"));
  REQUIRE(doc["per_t"].is_array());
  CHECK(doc["per_t"].size() == 10);
  CHECK(doc["per_t"][0]["t"] == 1);
  CHECK(doc["per_t"][9]["t"] == 10);
  CHECK(doc["per_t"][9]["stderr"].get<double>() >= 0.0);
  CHECK(doc["audits"].is_object());
  CHECK(doc["audits"].empty());

  // the embedded echo reparses to an equivalent configuration
  const ExperimentConfig echoed =
      parse_config_text(doc["config_echo"].get<std::string>(), "echo");
  CHECK(echoed.d == 2);
  CHECK(echoed.T == 10);
  CHECK(echoed.trials == 2);
  CHECK(echoed.policy.K == 5);
  CHECK(config_echo(echoed) == doc["config_echo"].get<std::string>());

  SUBCASE("reruns are byte-identical and job count does not matter") {
    const fs::path out2 = tmp.path / "out2";
    REQUIRE(cmd_run(cfg.string(), out2.string(), 2) == 0);
    CHECK(slurp(out2 / "aggregate.json") == slurp(out / "aggregate.json"));
    CHECK(slurp(out2 / "trial_0000.csv") == slurp(out / "trial_0000.csv"));
    CHECK(slurp(out2 / "trial_0001.csv") == slurp(out / "trial_0001.csv"));
  }
}

TEST_CASE("run command rejects bad inputs with exit code 2") {
  TempDir tmp;
  CHECK(cmd_run((tmp.path / "missing.cfg").string(),
                (tmp.path / "out").string(), 1) == 2);
  const fs::path bad = tmp.file("bad.cfg", "[experiment]\nT = 0\n");
  CHECK(cmd_run(bad.string(), (tmp.path / "out").string(), 1) == 2);
  const fs::path junk = tmp.file("junk.cfg", "[experiment]\nd = ??\n");
  CHECK(cmd_run(junk.string(), (tmp.path / "out").string(), 1) == 2);
}

TEST_CASE("plot-data reduces ledgers and passes values through") {
  TempDir tmp;

  SUBCASE("aggregate json rows come out in order, unmodified") {
    const fs::path in = tmp.file(
        "agg.json",
        "{\"per_t\": ["
        "{\"t\": 1, \"mean_cum_regret\": 0.125},"
        "{\"t\": 2, \"mean_cum_regret\": 2.5},"
        "{\"t\": 3, \"mean_cum_regret\": -3.75}]}");
    const fs::path out = tmp.path / "plot.csv";
    REQUIRE(cmd_plot_data(in.string(), out.string()) == 0);
    CHECK(slurp(out) == "1,0.125\n2,2.5\n3,-3.75\n");
  }

  SUBCASE("trial csv input averages cum_regret over trials") {
    const fs::path in = tmp.file(
        "ledger.csv",
        "trial,t,price,demand,oracle_revenue,expected_revenue,inst_regret,"
        "cum_regret\n"
        "0,1,1,1,1,1,1,1\n"
        "0,2,1,1,1,1,1,2\n"
        "1,1,1,1,1,1,1,3\n"
        "1,2,1,1,1,1,1,6\n");
    const fs::path out = tmp.path / "plot.csv";
    REQUIRE(cmd_plot_data(in.string(), out.string()) == 0);
    CHECK(slurp(out) == "1,2\n2,4\n");
  }

  SUBCASE("empty and malformed ledgers fail with exit code 1") {
    const fs::path empty = tmp.file("empty.csv", "");
    CHECK(cmd_plot_data(empty.string(), (tmp.path / "o1").string()) == 1);

    const fs::path header_only = tmp.file(
        "header.csv",
        "trial,t,price,demand,oracle_revenue,expected_revenue,inst_regret,"
        "cum_regret\n");
    CHECK(cmd_plot_data(header_only.string(), (tmp.path / "o2").string()) == 1);

    const fs::path bad_row = tmp.file(
        "bad.csv",
        "trial,t,price,demand,oracle_revenue,expected_revenue,inst_regret,"
        "cum_regret\n"
        "0,one,1,1,1,1,1,1\n");
    CHECK(cmd_plot_data(bad_row.string(), (tmp.path / "o3").string()) == 1);

    const fs::path gap = tmp.file(
        "gap.csv",
        "trial,t,price,demand,oracle_revenue,expected_revenue,inst_regret,"
        "cum_regret\n"
        "0,1,1,1,1,1,1,1\n"
        "0,3,1,1,1,1,1,3\n");
    CHECK(cmd_plot_data(gap.string(), (tmp.path / "o4").string()) == 1);

    const fs::path bad_json = tmp.file("bad.json", "{\"per_t\": 7}");
    CHECK(cmd_plot_data(bad_json.string(), (tmp.path / "o5").string()) == 1);

    CHECK(cmd_plot_data((tmp.path / "missing.csv").string(),
                        (tmp.path / "o6").string()) == 1);
  }
}

TEST_CASE("audit command") {
  TempDir tmp;
  const std::string base =
      "[experiment]\n"
      "d = 2\n"
      "T = 15\n"
      "trials = 3\n"
      "seed = 5\n"
      "\n"
      "[policy]\n"
      "kind = ucb\n"
      "K = 5\n"
      "radius_mode = fixed_sq\n"
      "radius_value = 0.2\n";

  SUBCASE("coverage writes a per-trial report") {
    const fs::path cfg = tmp.file("cov.cfg", base);
    const fs::path out = tmp.path / "out";
    REQUIRE(cmd_audit(cfg.string(), "coverage", out.string()) == 0);
    const nlohmann::json doc = nlohmann::json::parse(slurp(out / "audit.json"));
    CHECK(doc["kind"] == "coverage");
    CHECK(doc["trials"] == 3);
    REQUIRE(doc["per_trial"].size() == 3);
    CHECK(doc["fraction"].get<double>() >= 0.0);
    CHECK(doc["fraction"].get<double>() <= 1.0);
    CHECK(doc["per_trial"][0].contains("coverage_ok"));
    CHECK(doc["per_trial"][0].contains("first_violation_t"));
    CHECK(doc["per_trial"][0]["alpha"].get<double>() > 0.0);
  }

  SUBCASE("potential requires feature normalization") {
    const fs::path cfg = tmp.file(
        "pot.cfg", base + "\n[covariates]\nnormalize = feature\n");
    const fs::path out = tmp.path / "out";
    REQUIRE(cmd_audit(cfg.string(), "potential", out.string()) == 0);
    const nlohmann::json doc = nlohmann::json::parse(slurp(out / "audit.json"));
    CHECK(doc["kind"] == "potential");
    CHECK(doc["violations"] == 0);
    REQUIRE(doc["per_trial"].size() == 3);
    CHECK(doc["per_trial"][0]["ok"] == true);
    CHECK(doc["per_trial"][0]["potential_lhs"].get<double>() <=
          doc["per_trial"][0]["potential_bound"].get<double>());

    const fs::path raw = tmp.file("raw.cfg", base);
    CHECK(cmd_audit(raw.string(), "potential", (tmp.path / "o2").string()) == 2);
  }

  SUBCASE("unknown kinds are configuration errors") {
    const fs::path cfg = tmp.file("k.cfg", base);
    CHECK(cmd_audit(cfg.string(), "volume", (tmp.path / "out").string()) == 2);
  }
}

TEST_CASE("cli dispatch") {
  TempDir tmp;
  const fs::path cfg = tmp.file("run.cfg", kTinyRunConfig);

  CHECK(cli_main({}) == 2);
  CHECK(cli_main({"run"}) == 2);
  CHECK(cli_main({"frobnicate"}) == 2);
  CHECK(cli_main({"--help"}) == 0);

  const fs::path out = tmp.path / "out";
  CHECK(cli_main({"run", cfg.string(), "-o", out.string(), "-j", "2"}) == 0);
  CHECK(fs::exists(out / "aggregate.json"));

  const fs::path plot = tmp.path / "plot.csv";
  CHECK(cli_main({"plot-data", (out / "aggregate.json").string(),
                  plot.string()}) == 0);
  CHECK(fs::exists(plot));

  const fs::path audit_out = tmp.path / "audit";
  CHECK(cli_main({"audit", cfg.string(), "coverage", "-o",
                  audit_out.string()}) == 0);
  CHECK(fs::exists(audit_out / "audit.json"));
}
