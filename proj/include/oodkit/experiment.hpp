// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "oodkit/metrics.hpp"
#include "oodkit/mlp.hpp"
#include "oodkit/train.hpp"

namespace oodkit {

enum class RunMode { Oracle, Tabular, Mlp };

std::string run_mode_name(RunMode mode);
RunMode run_mode_from_name(const std::string& name);

struct MethodSpec {
  std::string name;
  LossSpec loss;
  RunMode mode = RunMode::Oracle;
};

struct OutDistSpec {
  std::string name;
  std::string kind;  // training | uniform | gaussian | ring | point | custom_file
  nlohmann::json params() const;
  std::string params_text = "{}";  // stored as text to keep the header light
  bool training = false;
};

struct ExperimentConfig {
  int schema_version = 1;

  std::string scenario_name;
  std::string scenario_params_text = "{}";
  std::uint64_t scenario_seed = 0;

  std::vector<MethodSpec> methods;
  std::vector<std::string> scores;     // requested score names, row order
  std::vector<double> tpr_levels = {0.95};
  std::vector<OutDistSpec> test_outs;

  std::vector<std::uint64_t> seeds = {1};
  std::size_t steps = 20000;           // tabular
  double learning_rate = 0.5;          // tabular
  std::vector<double> lambda_values;   // empty = use each method's lambda
  double labeled_fraction = 1.0;
  bool compare_shared_separate = false;

  MlpArchitecture mlp_arch;
  MlpTrainOptions mlp_options;

  std::string output_dir;
  std::string format = "csv";          // csv | json | both
  int jobs = 1;

  void validate() const;
  nlohmann::json scenario_params() const;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

struct RunFailure {
  std::string method;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  std::string error;
};

struct ExperimentResult {
  std::vector<MetricReport> reports;  // one per tpr level
  std::vector<std::filesystem::path> report_files;
  std::vector<RunFailure> failures;
  std::optional<std::filesystem::path> failure_manifest;
};

enum class ReportFormat { Csv, Json };

void emit_report(const MetricReport& report, ReportFormat format,
                 const std::filesystem::path& path);

/// Runs every (method x seed x lambda) cell, persists per-run artifacts
/// (scenario, score CSVs, trajectories, checkpoints, a rows manifest) under
/// out_dir, and emits one report per TPR level. Deterministic for fixed
/// config and seeds. Cells that fail are recorded and skipped; a failure
/// manifest is written when any cell failed.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::filesystem::path& out_dir);

/// Rebuilds the reports from the artifacts persisted by run_experiment,
/// without retraining anything.
ExperimentResult rebuild_report_from_artifacts(
    const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct PairedReports {
  std::uint64_t seed = 0;
  MetricReport shared;
  MetricReport separate;
  MetricReport delta;  // shared minus separate, matched by score name
};

/// Trains shared and separate models per seed and reports both plus a delta
/// table; includes the separate-classifier x shared-discriminator
/// composition row.
std::vector<PairedReports> compare_shared_vs_separate(
    const ExperimentConfig& config, const std::filesystem::path& out_dir);

}  // namespace oodkit
