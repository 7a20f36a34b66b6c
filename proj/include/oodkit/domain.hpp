// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "oodkit/errors.hpp"

namespace oodkit {

/// Finite input domain: an ordered list of uniquely named points, optionally
/// carrying per-point coordinates (used as model inputs for 2D scenarios).
class DiscreteDomain {
 public:
  explicit DiscreteDomain(std::vector<std::string> ids);
  DiscreteDomain(std::vector<std::string> ids, std::vector<double> coords,
                 std::size_t coord_dim);

  std::size_t size() const { return ids_.size(); }
  const std::string& id(std::size_t idx) const { return ids_[idx]; }
  const std::vector<std::string>& ids() const { return ids_; }

  /// Index of a point id; throws InvalidParams for unknown ids.
  std::size_t index_of(const std::string& id) const;

  bool has_coordinates() const { return coord_dim_ > 0; }
  std::size_t coord_dim() const { return coord_dim_; }
  std::span<const double> coords(std::size_t idx) const;
  const std::vector<double>& all_coords() const { return coords_; }

  bool operator==(const DiscreteDomain& other) const;

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> coords_;  // size N * coord_dim_, row-major
  std::size_t coord_dim_ = 0;
};

using DomainPtr = std::shared_ptr<const DiscreteDomain>;

/// Two handles address the same domain if they share the object or compare
/// equal element-wise.
bool same_domain(const DomainPtr& a, const DomainPtr& b);

/// Probability distribution over a DiscreteDomain. Masses are non-negative
/// and sum to one within 1e-12; both are checked at construction.
class FiniteDistribution {
 public:
  FiniteDistribution(DomainPtr domain, std::vector<double> mass);

  const DomainPtr& domain() const { return domain_; }
  std::size_t size() const { return mass_.size(); }
  double mass(std::size_t idx) const { return mass_[idx]; }
  std::span<const double> masses() const { return mass_; }
  bool full_support() const;
  double max_mass() const;

  static FiniteDistribution uniform(DomainPtr domain);
  static FiniteDistribution point_mass(DomainPtr domain, std::size_t idx);

 private:
  DomainPtr domain_;
  std::vector<double> mass_;
};

/// Joint labeled in-distribution p(y,x|i): a K x N matrix of probabilities
/// summing to one. The x-marginal and the per-point class conditionals are
/// derived quantities.
class LabeledInDistribution {
 public:
  /// joint is K*N row-major: joint[y*N + x] = p(y, x | i).
  LabeledInDistribution(DomainPtr domain, std::size_t num_classes,
                        std::vector<double> joint);

  const DomainPtr& domain() const { return domain_; }
  std::size_t num_classes() const { return num_classes_; }
  std::size_t size() const { return domain_->size(); }

  double joint(std::size_t y, std::size_t x) const {
    return joint_[y * size() + x];
  }
  const std::vector<double>& joint_matrix() const { return joint_; }

  /// p(x|i), the column sum.
  double marginal(std::size_t x) const { return marginal_[x]; }
  FiniteDistribution marginal_distribution() const;

  bool has_conditional(std::size_t x) const { return marginal_[x] > 0.0; }

  /// p(.|x,i); throws UndefinedConditional where the marginal vanishes.
  std::vector<double> class_conditional(std::size_t x) const;

 private:
  DomainPtr domain_;
  std::size_t num_classes_;
  std::vector<double> joint_;
  std::vector<double> marginal_;
};

/// A complete OOD detection scenario: labeled in-distribution, out-
/// distribution on the same domain, and the in-distribution prior.
/// Immutable after construction; all derived quantities are pure.
class OODScenario {
 public:
  OODScenario(LabeledInDistribution in_dist, FiniteDistribution out_dist,
              double prior_in);

  const LabeledInDistribution& in_dist() const { return in_dist_; }
  const FiniteDistribution& out_dist() const { return out_dist_; }
  const DomainPtr& domain() const { return in_dist_.domain(); }
  std::size_t size() const { return in_dist_.size(); }
  std::size_t num_classes() const { return in_dist_.num_classes(); }

  double prior_in() const { return prior_in_; }
  double prior_out() const { return 1.0 - prior_in_; }
  /// lambda = p(o)/p(i), the out-to-in weighting of Section 3.3 objectives.
  double lambda() const { return (1.0 - prior_in_) / prior_in_; }

  /// Mixture mass p(x) = p(x|i)p(i) + p(x|o)p(o).
  double mixture(std::size_t x) const;
  bool has_posterior(std::size_t x) const { return mixture(x) > 0.0; }
  bool full_mixture_support() const;

  /// p(i|x); throws UndefinedPosterior where p(x) = 0.
  double posterior_in(std::size_t x) const;

  std::vector<double> class_conditional(std::size_t x) const {
    return in_dist_.class_conditional(x);
  }

 private:
  LabeledInDistribution in_dist_;
  FiniteDistribution out_dist_;
  double prior_in_;
};

/// Largest alpha for which the complement distribution stays non-negative:
/// 1 / (N * max_x p(x)).
double complement_alpha_max(const FiniteDistribution& in_marginal);

/// Discrete complement distribution q(x) = (1/N - alpha p(x)) / (1 - alpha).
/// Throws AlphaTooLarge when any mass would go negative.
FiniteDistribution complement_distribution(const FiniteDistribution& in_marginal,
                                           double alpha);

/// Deterministic i.i.d. draws; returns point indices.
std::vector<std::size_t> sample(const FiniteDistribution& dist, std::size_t n,
                                std::uint64_t seed);

}  // namespace oodkit
