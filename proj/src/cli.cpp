#include "prsbc/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "prsbc/oracles.hpp"
#include "prsbc/scenario.hpp"

namespace prsbc::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunConfig {
  std::string command;
  std::string scenario_path;
  std::string output_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> controller;
  std::optional<std::string> convention;
  int n_trials = 50;
  std::optional<int> mc_samples;
  bool inject_b_sign_error = false;
};

Scenario load_with_overrides(const RunConfig& cfg) {
  Scenario s = load_scenario(cfg.scenario_path);
  if (cfg.seed) s.seed = *cfg.seed;
  if (cfg.controller) s.controller = parse_controller(*cfg.controller);
  if (cfg.convention) s.convention = parse_convention(*cfg.convention);
  if (cfg.mc_samples) s.safety_samples = *cfg.mc_samples;
  s.validate();
  return s;
}

json echo_config(const RunConfig& cfg, const Scenario& s) {
  json c = {{"command", cfg.command},
            {"scenario", cfg.scenario_path},
            {"out", cfg.output_dir},
            {"seed", s.seed},
            {"controller", to_string(s.controller)},
            {"convention", cfg.convention ? *cfg.convention
                                          : (s.convention ==
                                                     RadiusConvention::sbc_compat
                                                 ? "sbc-compat"
                                                 : "paper")},
            {"mc_samples", s.safety_samples}};
  if (cfg.command == "trials") c["trials"] = cfg.n_trials;
  return c;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw ScenarioError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

fs::path prepare_out(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ScenarioError("cannot create output directory " + dir.string());
  return dir;
}

int cmd_run(const RunConfig& cfg) {
  Scenario s = load_with_overrides(cfg);
  fs::path dir = prepare_out(cfg);
  RunResult result = run(s);
  {
    std::ofstream csv(dir / "trajectory.csv");
    if (!csv) throw ScenarioError("cannot write trajectory.csv");
    write_trajectory_csv(csv, s, result.log);
  }
  write_json(dir / "metrics.json", metrics_to_json(result.metrics, echo_config(cfg, s)));
  const Metrics& m = result.metrics;
  std::cout << "steps " << m.steps << ", min pair distance "
            << format_number(m.min_true_pair_distance) << " m, collisions "
            << m.collision_step_count << ", fallbacks " << m.fallback_count
            << '\n';
  return m.collision_step_count > 0 ? kSafetyViolation : kOk;
}

int cmd_trials(const RunConfig& cfg) {
  if (cfg.n_trials < 1) throw ScenarioError("--trials must be >= 1");
  Scenario s = load_with_overrides(cfg);
  fs::path dir = prepare_out(cfg);
  AggregateMetrics agg = monte_carlo_trials(s, cfg.n_trials, s.seed);
  write_json(dir / "metrics.json", aggregate_to_json(agg, echo_config(cfg, s)));
  const double slack = 0.02;
  bool unsafe = agg.trials_with_collision > 0 ||
                agg.min_empirical_pair_safety.min < s.sigma - slack ||
                agg.min_empirical_obstacle_safety.min < s.sigma_o - slack;
  std::cout << agg.trials.size() << " trials, " << agg.trials_with_collision
            << " with collisions, min pair distance "
            << format_number(agg.min_true_pair_distance.min)
            << " m, min pair safety "
            << format_number(agg.min_empirical_pair_safety.min) << '\n';
  return unsafe ? kSafetyViolation : kOk;
}

int cmd_selfcheck(const RunConfig& cfg) {
  oracles::SelfcheckOptions opts;
  opts.seed = cfg.seed.value_or(1);
  opts.mc_samples = cfg.mc_samples.value_or(0);
  opts.inject_b_sign_error = cfg.inject_b_sign_error;
  auto reports = oracles::run_selfcheck(opts, &std::cout);
  for (const auto& r : reports)
    if (!r.passed) return kOracleFailure;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic safety barrier certificates for multi-robot teams"};
  app.require_subcommand(1);
  RunConfig cfg;

  const std::vector<std::string> controllers{"prsbc", "prsbc-dec", "sbc", "none"};
  const std::vector<std::string> conventions{"paper", "sbc-compat"};

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", cfg.scenario_path, "Scenario JSON file")
        ->required();
    sub->add_option("--out", cfg.output_dir, "Output directory");
    sub->add_option("--seed", cfg.seed, "Seed override");
    sub->add_option("--controller", cfg.controller, "Controller override")
        ->check(CLI::IsMember(controllers));
    sub->add_option("--convention", cfg.convention, "Radius convention")
        ->check(CLI::IsMember(conventions));
    sub->add_option("--mc-samples", cfg.mc_samples,
                    "Monte Carlo samples per safety evaluation")
        ->check(CLI::PositiveNumber);
  };

  auto* run_cmd = app.add_subcommand("run", "Simulate one scenario");
  add_common(run_cmd);
  auto* trials_cmd = app.add_subcommand("trials", "Seeded Monte Carlo trials");
  add_common(trials_cmd);
  trials_cmd->add_option("--trials", cfg.n_trials, "Number of trials")
      ->check(CLI::PositiveNumber);
  auto* check_cmd = app.add_subcommand("selfcheck", "Run the oracle suites");
  check_cmd->add_option("--seed", cfg.seed, "Oracle seed");
  check_cmd->add_option("--mc-samples", cfg.mc_samples, "Samples per oracle")
      ->check(CLI::PositiveNumber);
  check_cmd->add_flag("--inject-b-sign-error", cfg.inject_b_sign_error)
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalidInput;
  }

  try {
    if (run_cmd->parsed()) {
      cfg.command = "run";
      return cmd_run(cfg);
    }
    if (trials_cmd->parsed()) {
      cfg.command = "trials";
      return cmd_trials(cfg);
    }
    cfg.command = "selfcheck";
    return cmd_selfcheck(cfg);
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << '\n';
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kInvalidInput;
}

}  // namespace prsbc::cli
