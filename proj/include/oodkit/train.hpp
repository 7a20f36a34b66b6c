// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "oodkit/domain.hpp"
#include "oodkit/oracle.hpp"
#include "oodkit/scores.hpp"

namespace oodkit {

enum class LossKind {
  ClassifierCE,     // plain K-class cross-entropy on the in-distribution
  BinaryBalanced,   // in-vs-out logistic loss, lambda on the out-term
  ConfidenceOE,     // classifier CE + lambda * CE-to-uniform on out samples
  BackgroundClass,  // K+1-way CE with all out-mass on the background slot
  EnergyMargin,     // classifier CE + squared hinge energy terms
  SharedCombo,      // K class logits + 1 discriminator logit, three terms
};

std::string loss_kind_name(LossKind kind);
LossKind loss_kind_from_name(const std::string& name);

struct LossSpec {
  LossKind kind = LossKind::BinaryBalanced;
  double lambda = 1.0;            // out-term weight; p(o)/p(i) in Section 3.3
  EnergyMargins margins{};        // energy kind only
  double labeled_fraction = 1.0;  // shared kind: fraction of labeled in-points
  void validate() const;
};

/// Logit table width for a loss kind: 1, K, or K+1.
std::size_t logit_width(LossKind kind, std::size_t num_classes);

/// Free per-point logits; the tabular stand-in for a model f_theta.
struct TabularLogits {
  DomainPtr domain;
  std::size_t width = 0;
  std::vector<double> values;  // N * width, row-major

  std::span<const double> row(std::size_t x) const {
    return {values.data() + x * width, width};
  }
  std::span<double> row(std::size_t x) {
    return {values.data() + x * width, width};
  }
};

/// Small random logits (uniform in [-0.01, 0.01]) from a seeded generator.
TabularLogits init_logits(DomainPtr domain, std::size_t width,
                          std::uint64_t seed);

/// Deterministic labeled subset for semi-supervised runs: the first
/// ceil(fraction * #in-support) in-support points in domain order.
std::vector<bool> labeled_subset(const OODScenario& scenario, double fraction);

/// Exact population loss, summed over domain points (no sampling).
double expected_loss(const OODScenario& scenario, const TabularLogits& logits,
                     const LossSpec& spec);

/// Analytic gradient of expected_loss, same shape as the logits.
TabularLogits loss_gradient(const OODScenario& scenario,
                            const TabularLogits& logits, const LossSpec& spec);

struct MinimizeOptions {
  std::size_t steps = 20000;
  double learning_rate = 0.5;
  std::uint64_t seed = 0;
  /// Halve the step size whenever a step would increase the loss; keeps the
  /// recorded trajectory non-increasing.
  bool halve_on_increase = true;
};

struct MinimizeResult {
  TabularLogits logits;
  std::vector<double> loss_trajectory;  // initial loss, then one per step
  double final_learning_rate = 0.0;
};

/// Full-batch gradient descent on expected_loss from random initialization.
/// Deterministic per seed. Throws DivergenceDetected on non-finite loss.
MinimizeResult tabular_minimize(const OODScenario& scenario, const LossSpec& spec,
                                const MinimizeOptions& options);

/// Central-difference check of loss_gradient at n random logit coordinates.
/// Returns the maximum relative error over the probes.
double grad_check_tabular(const OODScenario& scenario, const TabularLogits& logits,
                          const LossSpec& spec, std::size_t n_probes,
                          double epsilon, std::uint64_t seed);

// --- Reading predictions off a logit table ----------------------------------

/// Softmax over the first K columns.
PredictiveTable class_probs_from_logits(const TabularLogits& logits,
                                        std::size_t num_classes);

/// Softmax over all K+1 columns (background-class models).
PredictiveTable bgc_probs_from_logits(const TabularLogits& logits);

/// Sigmoid of the last column as a width-1 table (binary / shared models).
PredictiveTable disc_probs_from_logits(const TabularLogits& logits);

/// -E(x) = logsumexp of the first K columns.
ScoreVector neg_energy_from_logits(const TabularLogits& logits,
                                   std::size_t num_classes);

/// Named scores a trained table can emit, mirroring oracle_scores keys.
std::map<std::string, ScoreVector> model_scores(const TabularLogits& logits,
                                                const LossSpec& spec,
                                                std::size_t num_classes);

}  // namespace oodkit
