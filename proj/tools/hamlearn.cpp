// hamlearn: scenario runner and bound calculators for steady-state
// Hamiltonian coupling estimation.
//
// Exit codes: 0 success, 2 config error, 3 resource-cap error,
// 4 numerical failure.

#include "hamlearn/harness.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitResource = 3;
constexpr int kExitNumerical = 4;

int run_command(const std::string& scenario, const std::string& config_path,
                std::uint64_t seed, bool seed_given, const std::string& out_dir) {
  hamlearn::ScenarioConfig cfg;
  if (!config_path.empty()) {
    cfg = hamlearn::load_config_file(config_path);
    if (!scenario.empty() && scenario != hamlearn::scenario_name(cfg.scenario)) {
      throw hamlearn::ConfigError("scenario argument '" + scenario +
                                  "' does not match config scenario '" +
                                  hamlearn::scenario_name(cfg.scenario) + "'");
    }
  } else {
    const auto s = hamlearn::scenario_from_name(scenario);
    if (!s) throw hamlearn::ConfigError("unknown scenario '" + scenario + "'");
    cfg = hamlearn::default_config(*s);
  }
  if (seed_given) {
    cfg.seed = seed;
    cfg.seed_set = true;
  }
  const hamlearn::RunOutputs outputs = hamlearn::run_scenario(cfg, out_dir);
  for (const std::string& f : outputs.files) std::cout << f << '\n';
  return kExitOk;
}

int bounds_command(long m, int k, double eps, double delta, double gap) {
  nlohmann::json j;
  j["thm4_shot_count"] = hamlearn::thm4_shot_count(m, k, eps, delta);
  if (gap > 0) {
    const hamlearn::SampleBudget budget =
        hamlearn::thm5_sample_budget(static_cast<int>(m), k, eps, gap, delta);
    j["thm5"] = {{"total_measurements", budget.total_measurements},
                 {"quadrature_nodes", budget.quadrature_nodes},
                 {"shots_per_node", budget.shots_per_node},
                 {"ht_star", budget.ht_star},
                 {"eps_sample", budget.eps_sample}};
  }
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

int validate_command(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot open config file " << path << '\n';
    return kExitConfig;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const auto errors = hamlearn::validate_config_text(buffer.str());
  if (errors.empty()) {
    std::cout << "ok\n";
    return kExitOk;
  }
  for (const std::string& e : errors) std::cerr << e << '\n';
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady-state Hamiltonian learning simulator"};
  app.require_subcommand(1);

  std::string scenario, config_path, out_dir = ".";
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Run a scenario and write CSV datasets");
  run->add_option("scenario", scenario, "Scenario name (or use --config)");
  run->add_option("--config", config_path, "JSON config file");
  auto* seed_opt = run->add_option("--seed", seed, "Master seed (overrides config)");
  run->add_option("--out", out_dir, "Output directory");

  long m = 0;
  int k = 0;
  double eps = 0.1, delta = 0.05, gap = 0.0;
  auto* bounds = app.add_subcommand("bounds", "Evaluate sample-complexity formulas");
  bounds->add_option("--m", m, "Number of basis operators")->required();
  bounds->add_option("--k", k, "Maximum operator weight")->required();
  bounds->add_option("--eps", eps, "Target precision / infidelity");
  bounds->add_option("--delta", delta, "Failure probability");
  bounds->add_option("--gap", gap, "Spectral gap (enables the budget recipe)");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate-config", "Validate a config file");
  validate->add_option("file", validate_path, "JSON config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (scenario.empty() && config_path.empty()) {
        throw hamlearn::ConfigError("run: give a scenario name or --config");
      }
      return run_command(scenario, config_path, seed, seed_opt->count() > 0, out_dir);
    }
    if (bounds->parsed()) return bounds_command(m, k, eps, delta, gap);
    if (validate->parsed()) return validate_command(validate_path);
  } catch (const hamlearn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const hamlearn::ResourceLimitError& e) {
    std::cerr << "resource error: " << e.what() << '\n';
    return kExitResource;
  } catch (const hamlearn::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}
