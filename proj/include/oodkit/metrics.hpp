// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oodkit/domain.hpp"
#include "oodkit/scores.hpp"

namespace oodkit {

// Direction convention throughout: higher score = more in-distribution, and a
// point is predicted in-distribution iff score >= threshold.

/// Sample AUC with half credit for ties, computed via midranks. Equals the
/// pairwise mean of [1 if in > out, 1/2 if equal, 0 otherwise].
double auc(std::span<const double> in_scores, std::span<const double> out_scores);

/// Sample FPR at TPR >= q: threshold at the ceil(q*|in|)-th largest in-score,
/// return the fraction of out-scores at or above it. q in (0, 1].
double fpr_at_tpr(std::span<const double> in_scores,
                  std::span<const double> out_scores, double q);

/// Exact population AUC: sum_{x,z} p_in(x) p_out(z) [1{s(x)>s(z)} + 1/2 1{=}].
/// O(N log N) via sorted cumulative out-mass.
double auc_exact(const FiniteDistribution& p_in, const FiniteDistribution& p_out,
                 const ScoreVector& score);
double auc_exact(const OODScenario& scenario, const ScoreVector& score);

/// Exact population FPR@qTPR: t* = largest atom threshold with
/// P_in(score >= t*) >= q; returns P_out(score >= t*).
double fpr_at_tpr_exact(const FiniteDistribution& p_in,
                        const FiniteDistribution& p_out,
                        const ScoreVector& score, double q);
double fpr_at_tpr_exact(const OODScenario& scenario, const ScoreVector& score,
                        double q);

// --- Report assembly --------------------------------------------------------

struct MetricCell {
  double auc = 0.0;
  double fpr_at_tpr = 0.0;
  double tpr_level = 0.0;
};

struct ReportRow {
  std::string method;
  std::string score;
  std::optional<double> accuracy;
  std::vector<std::optional<MetricCell>> cells;  // one per report column
  std::optional<double> mean_auc;                // over non-training columns
  std::optional<double> mean_fpr;
};

/// Table of (method x score) rows against test out-distribution columns,
/// mirroring the usual FPR/AUC table layout. Mean columns exist only when a
/// training out-distribution is flagged, and exclude exactly those columns.
struct MetricReport {
  std::vector<std::string> columns;
  std::vector<bool> training_out;
  double tpr_level = 0.95;
  std::vector<ReportRow> rows;

  bool has_means() const;
  bool has_accuracy() const;
};

struct TestOutDist {
  std::string name;
  FiniteDistribution out;
  bool training = false;
};

struct ScoredMethod {
  std::string method;
  std::string score_name;
  ScoreVector scores;
  std::optional<double> accuracy;
};

/// Populates every cell from exact population metrics and fills the means.
/// Throws MissingCell when a score vector does not cover a column's domain,
/// and InvalidParams when flagged training columns leave nothing to average.
MetricReport build_report(const FiniteDistribution& p_in,
                          const std::vector<TestOutDist>& out_dists,
                          const std::vector<ScoredMethod>& methods, double q);

}  // namespace oodkit
