// SPDX-License-Identifier: Apache-2.0
//
// oodbench: config-driven OOD detection benchmark runner.
//
// Subcommands: scenario gen, oracle eval, train, report, sweep.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "oodkit/experiment.hpp"
#include "oodkit/scenario_gen.hpp"
#include "oodkit/serialize.hpp"

namespace fs = std::filesystem;
using namespace oodkit;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> format;
  std::optional<int> jobs;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  auto* opt = cmd->add_option("--config", args.config_path, "experiment config file");
  if (config_required) opt->required();
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "override the config's seed list");
  cmd->add_option("--format", args.format, "report format: csv or json")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  cmd->add_option("--jobs", args.jobs, "worker pool size");
}

fs::path resolve_out_dir(const CommonArgs& args, const ExperimentConfig* config) {
  if (!args.out_dir.empty()) return args.out_dir;
  if (config && !config->output_dir.empty()) return config->output_dir;
  if (const char* env = std::getenv("OODBENCH_OUT_DIR")) return env;
  return "out";
}

ExperimentConfig load_config(const CommonArgs& args) {
  ExperimentConfig config = ExperimentConfig::from_file(args.config_path);
  if (args.seed) config.seeds = {*args.seed};
  if (args.format) config.format = *args.format;
  if (args.jobs) config.jobs = *args.jobs;
  return config;
}

int report_result(const ExperimentResult& result) {
  for (const auto& path : result.report_files) {
    std::cout << path.string() << "\n";
  }
  if (result.failure_manifest) {
    std::cerr << "failures recorded: " << result.failure_manifest->string()
              << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OOD detection benchmark toolkit"};
  app.require_subcommand(1);

  // scenario gen
  auto* scenario_cmd = app.add_subcommand("scenario", "scenario utilities");
  scenario_cmd->require_subcommand(1);
  auto* gen_cmd = scenario_cmd->add_subcommand("gen", "generate a scenario file");
  CommonArgs gen_args;
  add_common(gen_cmd, gen_args);

  auto* oracle_cmd = app.add_subcommand("oracle", "oracle utilities");
  oracle_cmd->require_subcommand(1);
  auto* eval_cmd =
      oracle_cmd->add_subcommand("eval", "evaluate Bayes oracles, no training");
  CommonArgs eval_args;
  add_common(eval_cmd, eval_args);

  auto* train_cmd =
      app.add_subcommand("train", "train the configured methods and report");
  CommonArgs train_args;
  add_common(train_cmd, train_args);

  auto* report_cmd = app.add_subcommand(
      "report", "rebuild reports from persisted artifacts, no retraining");
  CommonArgs report_args;
  add_common(report_cmd, report_args);

  auto* sweep_cmd =
      app.add_subcommand("sweep", "run the configured lambda sweep");
  CommonArgs sweep_args;
  add_common(sweep_cmd, sweep_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_cmd->parsed()) {
      ExperimentConfig config = load_config(gen_args);
      const fs::path out = resolve_out_dir(gen_args, &config);
      OODScenario scenario =
          generate_scenario(config.scenario_name, config.scenario_params(),
                            gen_args.seed.value_or(config.scenario_seed));
      fs::create_directories(out);
      const fs::path path = out / "scenario.json";
      save_scenario(scenario, path);
      std::cout << path.string() << "\n";
      return 0;
    }
    if (eval_cmd->parsed()) {
      ExperimentConfig config = load_config(eval_args);
      for (auto& method : config.methods) method.mode = RunMode::Oracle;
      return report_result(
          run_experiment(config, resolve_out_dir(eval_args, &config)));
    }
    if (train_cmd->parsed()) {
      ExperimentConfig config = load_config(train_args);
      const fs::path out = resolve_out_dir(train_args, &config);
      if (config.compare_shared_separate) {
        const auto paired = compare_shared_vs_separate(config, out);
        std::cout << "wrote " << paired.size() * 3 << " paired reports under "
                  << out.string() << "\n";
        return 0;
      }
      return report_result(run_experiment(config, out));
    }
    if (report_cmd->parsed()) {
      ExperimentConfig config = load_config(report_args);
      return report_result(rebuild_report_from_artifacts(
          config, resolve_out_dir(report_args, &config)));
    }
    if (sweep_cmd->parsed()) {
      ExperimentConfig config = load_config(sweep_args);
      if (config.lambda_values.empty()) {
        throw InvalidParams("sweep: config.run.lambda_values must be set");
      }
      return report_result(
          run_experiment(config, resolve_out_dir(sweep_args, &config)));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
