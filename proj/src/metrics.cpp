// SPDX-License-Identifier: Apache-2.0
#include "oodkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace oodkit {

double auc(std::span<const double> in_scores, std::span<const double> out_scores) {
  if (in_scores.empty() || out_scores.empty()) {
    throw EmptySample("auc: both score lists must be non-empty");
  }
  const std::size_t n = in_scores.size(), m = out_scores.size();

  // Midrank formulation of the Mann-Whitney statistic.
  struct Entry {
    double value;
    bool is_in;
  };
  std::vector<Entry> all;
  all.reserve(n + m);
  for (double v : in_scores) all.push_back({v, true});
  for (double v : out_scores) all.push_back({v, false});
  std::sort(all.begin(), all.end(),
            [](const Entry& a, const Entry& b) { return a.value < b.value; });

  double rank_sum_in = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    std::size_t in_count = 0;
    while (j < all.size() && all[j].value == all[i].value) {
      in_count += all[j].is_in ? 1 : 0;
      ++j;
    }
    // 1-based midrank of the tie group [i, j).
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    rank_sum_in += midrank * static_cast<double>(in_count);
    i = j;
  }
  const double u = rank_sum_in - 0.5 * static_cast<double>(n) * static_cast<double>(n + 1);
  return u / (static_cast<double>(n) * static_cast<double>(m));
}

double fpr_at_tpr(std::span<const double> in_scores,
                  std::span<const double> out_scores, double q) {
  if (in_scores.empty() || out_scores.empty()) {
    throw EmptySample("fpr_at_tpr: both score lists must be non-empty");
  }
  if (!(q > 0.0 && q <= 1.0)) {
    throw InvalidParams("fpr_at_tpr: q must lie in (0,1]");
  }
  const std::size_t n = in_scores.size();
  // k-th largest in-score with k = ceil(q*n); the small slack keeps exact
  // products like 0.8*5 from rounding up to k+1.
  std::size_t k = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(n) - 1e-12));
  k = std::clamp<std::size_t>(k, 1, n);

  std::vector<double> sorted(in_scores.begin(), in_scores.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  const double threshold = sorted[k - 1];

  std::size_t false_positives = 0;
  for (double v : out_scores) {
    if (v >= threshold) ++false_positives;
  }
  return static_cast<double>(false_positives) / static_cast<double>(out_scores.size());
}

namespace {

void check_metric_inputs(const FiniteDistribution& p_in,
                         const FiniteDistribution& p_out,
                         const ScoreVector& score) {
  if (!same_domain(p_in.domain(), p_out.domain()) ||
      !same_domain(p_in.domain(), score.domain())) {
    throw InvalidParams("population metric: domain mismatch");
  }
}

}  // namespace

double auc_exact(const FiniteDistribution& p_in, const FiniteDistribution& p_out,
                 const ScoreVector& score) {
  check_metric_inputs(p_in, p_out, score);
  const std::size_t n = score.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Index tie-break keeps the accumulation order identical across rank-
  // equivalent scores, so monotone invariance holds bit-for-bit.
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (score.value(a) != score.value(b)) return score.value(a) < score.value(b);
    return a < b;
  });

  double result = 0.0;
  double out_below = 0.0;  // out-mass at strictly smaller scores
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    double in_group = 0.0, out_group = 0.0;
    while (j < n && score.value(order[j]) == score.value(order[i])) {
      in_group += p_in.mass(order[j]);
      out_group += p_out.mass(order[j]);
      ++j;
    }
    result += in_group * (out_below + 0.5 * out_group);
    out_below += out_group;
    i = j;
  }
  return result;
}

double auc_exact(const OODScenario& scenario, const ScoreVector& score) {
  return auc_exact(scenario.in_dist().marginal_distribution(),
                   scenario.out_dist(), score);
}

double fpr_at_tpr_exact(const FiniteDistribution& p_in,
                        const FiniteDistribution& p_out,
                        const ScoreVector& score, double q) {
  check_metric_inputs(p_in, p_out, score);
  if (!(q > 0.0 && q <= 1.0)) {
    throw InvalidParams("fpr_at_tpr_exact: q must lie in (0,1]");
  }
  const std::size_t n = score.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Descending scores: walk thresholds from the top until TPR reaches q.
  // Index tie-break as in auc_exact, for bit-stable accumulation.
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (score.value(a) != score.value(b)) return score.value(a) > score.value(b);
    return a < b;
  });

  double in_acc = 0.0, out_acc = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && score.value(order[j]) == score.value(order[i])) {
      in_acc += p_in.mass(order[j]);
      out_acc += p_out.mass(order[j]);
      ++j;
    }
    // Slack absorbs accumulation round-off when a cumulative mass is meant
    // to hit q exactly (e.g. 19 atoms of 0.05 against q = 0.95).
    if (in_acc >= q - 1e-12) {
      return out_acc;
    }
    i = j;
  }
  // Mass round-off can leave in_acc marginally below q; the lowest atom is
  // then the threshold and everything is flagged positive.
  return out_acc;
}

double fpr_at_tpr_exact(const OODScenario& scenario, const ScoreVector& score,
                        double q) {
  return fpr_at_tpr_exact(scenario.in_dist().marginal_distribution(),
                          scenario.out_dist(), score, q);
}

bool MetricReport::has_means() const {
  return std::any_of(training_out.begin(), training_out.end(),
                     [](bool b) { return b; });
}

bool MetricReport::has_accuracy() const {
  return std::any_of(rows.begin(), rows.end(),
                     [](const ReportRow& r) { return r.accuracy.has_value(); });
}

MetricReport build_report(const FiniteDistribution& p_in,
                          const std::vector<TestOutDist>& out_dists,
                          const std::vector<ScoredMethod>& methods, double q) {
  if (out_dists.empty() || methods.empty()) {
    throw InvalidParams("build_report: needs at least one method and one column");
  }
  MetricReport report;
  report.tpr_level = q;
  for (const auto& od : out_dists) {
    report.columns.push_back(od.name);
    report.training_out.push_back(od.training);
  }
  const bool any_training = report.has_means();
  if (any_training &&
      std::all_of(report.training_out.begin(), report.training_out.end(),
                  [](bool b) { return b; })) {
    throw InvalidParams("build_report: all columns flagged as training leaves "
                        "nothing to average");
  }

  for (const auto& sm : methods) {
    ReportRow row;
    row.method = sm.method;
    row.score = sm.score_name;
    row.accuracy = sm.accuracy;
    double sum_auc = 0.0, sum_fpr = 0.0;
    std::size_t mean_count = 0;
    for (const auto& od : out_dists) {
      if (!same_domain(sm.scores.domain(), od.out.domain()) ||
          !same_domain(sm.scores.domain(), p_in.domain())) {
        throw MissingCell("build_report: score vector for '" + sm.method +
                          "' does not cover column '" + od.name + "'");
      }
      MetricCell cell;
      cell.auc = auc_exact(p_in, od.out, sm.scores);
      cell.fpr_at_tpr = fpr_at_tpr_exact(p_in, od.out, sm.scores, q);
      cell.tpr_level = q;
      row.cells.emplace_back(cell);
      if (any_training && !od.training) {
        sum_auc += cell.auc;
        sum_fpr += cell.fpr_at_tpr;
        ++mean_count;
      }
    }
    if (any_training) {
      row.mean_auc = sum_auc / static_cast<double>(mean_count);
      row.mean_fpr = sum_fpr / static_cast<double>(mean_count);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace oodkit
