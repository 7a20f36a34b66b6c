// SPDX-License-Identifier: Apache-2.0
#include "oodkit/scores.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace oodkit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ScoreVector::ScoreVector(DomainPtr domain, std::vector<double> values)
    : domain_(std::move(domain)), values_(std::move(values)) {
  if (!domain_) throw InvalidParams("ScoreVector: null domain");
  if (values_.size() != domain_->size()) {
    throw InvalidParams("ScoreVector: one value per domain point required");
  }
  for (double v : values_) {
    if (std::isnan(v)) throw InvalidParams("ScoreVector: NaN score forbidden");
  }
}

ScoreVector score_s1(const ScoreVector& posteriors) { return posteriors; }

double score_s1_from_bgc(std::span<const double> predictive) {
  return 1.0 - predictive.back();
}

double score_s2(double posterior, std::span<const double> class_cond) {
  return posterior * *std::max_element(class_cond.begin(), class_cond.end());
}

double score_s3(double posterior, std::span<const double> class_cond) {
  const double inv_k = 1.0 / static_cast<double>(class_cond.size());
  const double max_cond = *std::max_element(class_cond.begin(), class_cond.end());
  return posterior * (max_cond - inv_k) + inv_k;
}

double score_s3_from_bgc(std::span<const double> predictive) {
  const std::size_t k = predictive.size() - 1;
  const double max_class =
      *std::max_element(predictive.begin(), predictive.begin() + k);
  return max_class + predictive.back() / static_cast<double>(k);
}

double score_energy(std::span<const double> logits) {
  double m = -kInf;
  for (double l : logits) m = std::max(m, l);
  if (m == -kInf) return -kInf;  // all terms vanish
  if (m == kInf) return kInf;
  double acc = 0.0;
  for (double l : logits) acc += std::exp(l - m);
  return m + std::log(acc);
}

double score_msp(std::span<const double> probabilities) {
  return *std::max_element(probabilities.begin(), probabilities.end());
}

ScoreVector score_likelihood_ratio(const FiniteDistribution& p_in,
                                   const FiniteDistribution& p_out) {
  if (!same_domain(p_in.domain(), p_out.domain())) {
    throw InvalidParams("score_likelihood_ratio: domain mismatch");
  }
  std::vector<double> ratio(p_in.size());
  for (std::size_t x = 0; x < p_in.size(); ++x) {
    const double denom = p_out.mass(x);
    if (!(denom > 0.0)) {
      throw OutSupportHole("likelihood ratio undefined at '" +
                           p_out.domain()->id(x) + "': p(x|o) = 0");
    }
    ratio[x] = p_in.mass(x) / denom;
  }
  return ScoreVector(p_in.domain(), std::move(ratio));
}

RankCheck check_rank_equivalence(const ScoreVector& f, const ScoreVector& g) {
  if (!same_domain(f.domain(), g.domain())) {
    throw InvalidParams("check_rank_equivalence: domain mismatch");
  }
  const std::size_t n = f.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Sort by f with g (then index) as tie-breakers; adjacent disagreements in
  // this order are exactly the Theorem-1 violations.
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (f.value(a) != f.value(b)) return f.value(a) < f.value(b);
    if (g.value(a) != g.value(b)) return g.value(a) < g.value(b);
    return a < b;
  });
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t a = order[i - 1], b = order[i];
    const bool f_tie = f.value(a) == f.value(b);
    const bool g_tie = g.value(a) == g.value(b);
    const bool violates = f_tie ? !g_tie : !(g.value(a) < g.value(b));
    if (violates) {
      return RankCheck{false, RankWitness{a, b}};
    }
  }
  return RankCheck{true, std::nullopt};
}

MonotoneTransform::MonotoneTransform(Kind kind, double a, double b,
                                     std::string name)
    : kind_(kind), a_(a), b_(b), name_(std::move(name)) {}

MonotoneTransform MonotoneTransform::affine(double scale, double offset) {
  if (!(scale > 0.0)) {
    throw InvalidParams("MonotoneTransform::affine: scale must be positive");
  }
  return MonotoneTransform(Kind::Affine, scale, offset, "affine");
}

MonotoneTransform MonotoneTransform::logarithm() {
  return MonotoneTransform(Kind::Log, 0.0, 0.0, "log");
}

MonotoneTransform MonotoneTransform::sigmoid() {
  return MonotoneTransform(Kind::Sigmoid, 0.0, 0.0, "sigmoid");
}

MonotoneTransform MonotoneTransform::ratio_to_posterior(double lambda) {
  if (!(lambda > 0.0)) {
    throw InvalidParams("ratio_to_posterior: lambda must be positive");
  }
  return MonotoneTransform(Kind::RatioToPosterior, lambda, 0.0,
                           "ratio_to_posterior");
}

double MonotoneTransform::operator()(double s) const {
  switch (kind_) {
    case Kind::Affine:
      if (s == kInf) return kInf;
      if (s == -kInf) return -kInf;
      return a_ * s + b_;
    case Kind::Log:
      if (!(s > 0.0)) {
        throw DomainViolation("log transform needs positive scores");
      }
      return std::log(s);
    case Kind::Sigmoid:
      if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
      {
        const double e = std::exp(s);
        return e / (1.0 + e);
      }
    case Kind::RatioToPosterior:
      if (s < 0.0) {
        throw DomainViolation("ratio_to_posterior needs non-negative scores");
      }
      if (s == kInf) return 1.0;
      return s / (s + a_);
  }
  return 0.0;  // unreachable
}

ScoreVector apply_monotone(const ScoreVector& s, const MonotoneTransform& phi) {
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = phi(s.value(i));
  return ScoreVector(s.domain(), std::move(out));
}

}  // namespace oodkit
