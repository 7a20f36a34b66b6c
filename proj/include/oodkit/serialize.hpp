// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "oodkit/domain.hpp"
#include "oodkit/metrics.hpp"
#include "oodkit/mlp.hpp"
#include "oodkit/oracle.hpp"
#include "oodkit/scores.hpp"

namespace oodkit {

// Scenario files carry {points, coordinates?, K, joint (K*N row-major),
// out_mass (N), prior_in}.
nlohmann::json scenario_to_json(const OODScenario& scenario);
OODScenario scenario_from_json(const nlohmann::json& j);
void save_scenario(const OODScenario& scenario, const std::filesystem::path& path);
OODScenario load_scenario(const std::filesystem::path& path);

/// Out-distribution file: {out_mass: [N]} on an existing domain.
FiniteDistribution load_out_distribution(const std::filesystem::path& path,
                                         const DomainPtr& domain);

// Score vectors as CSV with columns (point_id, score); +-inf spelled
// "inf"/"-inf".
void save_scores_csv(const ScoreVector& scores, const std::filesystem::path& path);
ScoreVector load_scores_csv(const std::filesystem::path& path,
                            const DomainPtr& domain);

/// Predictive tables as CSV: point_id followed by the probability row.
void save_table_csv(const PredictiveTable& table, const std::filesystem::path& path);

// Metric reports. CSV uses fixed 6-decimal formatting and config column
// order, one auc/fpr pair per out-distribution; JSON round-trips exactly.
std::string report_to_csv(const MetricReport& report);
nlohmann::json report_to_json(const MetricReport& report);
MetricReport report_from_json(const nlohmann::json& j);

// Checkpoints: architecture descriptor plus flat parameter array.
nlohmann::json mlp_to_json(const SharedMLP& model);
SharedMLP mlp_from_json(const nlohmann::json& j);

void save_trajectory_csv(const std::vector<double>& losses,
                         const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace oodkit
