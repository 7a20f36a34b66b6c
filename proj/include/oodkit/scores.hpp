// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oodkit/domain.hpp"

namespace oodkit {

/// Per-point scores, higher = more in-distribution. Values are extended
/// reals: +/-inf is legal, NaN is rejected at construction.
class ScoreVector {
 public:
  ScoreVector(DomainPtr domain, std::vector<double> values);

  const DomainPtr& domain() const { return domain_; }
  std::size_t size() const { return values_.size(); }
  double value(std::size_t idx) const { return values_[idx]; }
  std::span<const double> values() const { return values_; }

 private:
  DomainPtr domain_;
  std::vector<double> values_;
};

// --- Scoring functions -----------------------------------------------------
//
// s1(x) = p(i|x)
// s2(x) = p(i|x) * max_k p(k|x,i)
// s3(x) = p(i|x) * [max_k p(k|x,i) - 1/K] + 1/K
//
// Where the class conditional is undefined (p(x|i) = 0) callers pass the
// uniform vector; s2 then degenerates to p(i|x)/K and s3 to 1/K.

/// s1 on a posterior table is the identity.
ScoreVector score_s1(const ScoreVector& posteriors);

/// s1 read off a background-class predictive: 1 - p(K+1|x).
double score_s1_from_bgc(std::span<const double> predictive);

double score_s2(double posterior, std::span<const double> class_cond);

double score_s3(double posterior, std::span<const double> class_cond);

/// s3 read off a background-class predictive:
/// max_{k<=K} p(k|x) + p(K+1|x)/K.
double score_s3_from_bgc(std::span<const double> predictive);

/// Negative energy -E(x) = log sum_k exp(logit_k), max-shift stabilized.
/// Tolerates -inf entries (zero terms).
double score_energy(std::span<const double> logits);

/// Maximum predicted probability.
double score_msp(std::span<const double> probabilities);

/// Per-point likelihood ratio p(x|i)/p(x|o). Requires full out-support;
/// throws OutSupportHole otherwise.
ScoreVector score_likelihood_ratio(const FiniteDistribution& p_in,
                                   const FiniteDistribution& p_out);

// --- Rank equivalence ------------------------------------------------------

struct RankWitness {
  std::size_t first = 0;
  std::size_t second = 0;
};

struct RankCheck {
  bool equivalent = false;
  std::optional<RankWitness> witness;  // a violating pair, when not equivalent
  explicit operator bool() const { return equivalent; }
};

/// True iff f and g induce the same ordering including ties, i.e. f = phi(g)
/// for some strictly increasing phi. O(N log N) by co-sorting. Ties are exact
/// floating-point equality; +inf == +inf counts as a tie.
RankCheck check_rank_equivalence(const ScoreVector& f, const ScoreVector& g);

// --- Monotone transforms ---------------------------------------------------

/// A named strictly increasing transform with parameters. Applying one to a
/// ScoreVector preserves rank equivalence by construction.
class MonotoneTransform {
 public:
  static MonotoneTransform affine(double scale, double offset);  // scale > 0
  static MonotoneTransform logarithm();
  static MonotoneTransform sigmoid();
  /// phi_lambda(r) = r / (r + lambda), with phi(+inf) = 1.
  static MonotoneTransform ratio_to_posterior(double lambda);

  /// Throws DomainViolation outside the transform's domain.
  double operator()(double s) const;
  const std::string& name() const { return name_; }

 private:
  enum class Kind { Affine, Log, Sigmoid, RatioToPosterior };
  MonotoneTransform(Kind kind, double a, double b, std::string name);
  Kind kind_;
  double a_, b_;
  std::string name_;
};

ScoreVector apply_monotone(const ScoreVector& s, const MonotoneTransform& phi);

}  // namespace oodkit
