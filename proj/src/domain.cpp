// SPDX-License-Identifier: Apache-2.0
#include "oodkit/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oodkit/rng.hpp"

namespace oodkit {

namespace {

constexpr double kMassTolerance = 1e-12;

void check_mass_vector(const std::vector<double>& mass, const char* what) {
  double total = 0.0;
  for (double m : mass) {
    if (!(m >= 0.0)) {
      throw InvalidMass(std::string(what) + ": negative or NaN mass");
    }
    total += m;
  }
  if (std::fabs(total - 1.0) > kMassTolerance) {
    throw InvalidMass(std::string(what) + ": masses sum to " +
                      std::to_string(total) + ", expected 1");
  }
}

}  // namespace

DiscreteDomain::DiscreteDomain(std::vector<std::string> ids)
    : DiscreteDomain(std::move(ids), {}, 0) {}

DiscreteDomain::DiscreteDomain(std::vector<std::string> ids,
                               std::vector<double> coords,
                               std::size_t coord_dim)
    : ids_(std::move(ids)), coords_(std::move(coords)), coord_dim_(coord_dim) {
  if (ids_.empty()) {
    throw InvalidParams("DiscreteDomain: needs at least one point");
  }
  index_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) {
      throw InvalidParams("DiscreteDomain: duplicate point id '" + ids_[i] + "'");
    }
  }
  if (coord_dim_ == 0) {
    coords_.clear();
  } else if (coords_.size() != ids_.size() * coord_dim_) {
    throw InvalidParams("DiscreteDomain: coordinate array has wrong size");
  }
}

std::size_t DiscreteDomain::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw InvalidParams("DiscreteDomain: unknown point id '" + id + "'");
  }
  return it->second;
}

std::span<const double> DiscreteDomain::coords(std::size_t idx) const {
  if (coord_dim_ == 0) {
    throw InvalidParams("DiscreteDomain: no coordinates attached");
  }
  return {coords_.data() + idx * coord_dim_, coord_dim_};
}

bool DiscreteDomain::operator==(const DiscreteDomain& other) const {
  return ids_ == other.ids_ && coord_dim_ == other.coord_dim_ &&
         coords_ == other.coords_;
}

bool same_domain(const DomainPtr& a, const DomainPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

FiniteDistribution::FiniteDistribution(DomainPtr domain, std::vector<double> mass)
    : domain_(std::move(domain)), mass_(std::move(mass)) {
  if (!domain_) throw InvalidParams("FiniteDistribution: null domain");
  if (mass_.size() != domain_->size()) {
    throw InvalidParams("FiniteDistribution: mass size != domain size");
  }
  check_mass_vector(mass_, "FiniteDistribution");
}

bool FiniteDistribution::full_support() const {
  return std::all_of(mass_.begin(), mass_.end(), [](double m) { return m > 0.0; });
}

double FiniteDistribution::max_mass() const {
  return *std::max_element(mass_.begin(), mass_.end());
}

FiniteDistribution FiniteDistribution::uniform(DomainPtr domain) {
  const std::size_t n = domain->size();
  return FiniteDistribution(std::move(domain),
                            std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

FiniteDistribution FiniteDistribution::point_mass(DomainPtr domain,
                                                  std::size_t idx) {
  std::vector<double> mass(domain->size(), 0.0);
  mass.at(idx) = 1.0;
  return FiniteDistribution(std::move(domain), std::move(mass));
}

LabeledInDistribution::LabeledInDistribution(DomainPtr domain,
                                             std::size_t num_classes,
                                             std::vector<double> joint)
    : domain_(std::move(domain)), num_classes_(num_classes), joint_(std::move(joint)) {
  if (!domain_) throw InvalidParams("LabeledInDistribution: null domain");
  if (num_classes_ < 2) {
    throw InvalidParams("LabeledInDistribution: needs K >= 2 classes");
  }
  const std::size_t n = domain_->size();
  if (joint_.size() != num_classes_ * n) {
    throw InvalidParams("LabeledInDistribution: joint matrix has wrong size");
  }
  check_mass_vector(joint_, "LabeledInDistribution");
  marginal_.assign(n, 0.0);
  for (std::size_t y = 0; y < num_classes_; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      marginal_[x] += joint_[y * n + x];
    }
  }
}

FiniteDistribution LabeledInDistribution::marginal_distribution() const {
  // The marginal inherits the joint's normalization; re-normalize the float
  // round-off so the result passes the 1e-12 constructor check cleanly.
  std::vector<double> mass = marginal_;
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  for (double& m : mass) m /= total;
  return FiniteDistribution(domain_, std::move(mass));
}

std::vector<double> LabeledInDistribution::class_conditional(std::size_t x) const {
  const double px = marginal_[x];
  if (!(px > 0.0)) {
    throw UndefinedConditional("class conditional undefined at '" +
                               domain_->id(x) + "': p(x|i) = 0");
  }
  std::vector<double> cond(num_classes_);
  const std::size_t n = size();
  for (std::size_t y = 0; y < num_classes_; ++y) {
    cond[y] = joint_[y * n + x] / px;
  }
  return cond;
}

OODScenario::OODScenario(LabeledInDistribution in_dist,
                         FiniteDistribution out_dist, double prior_in)
    : in_dist_(std::move(in_dist)),
      out_dist_(std::move(out_dist)),
      prior_in_(prior_in) {
  if (!same_domain(in_dist_.domain(), out_dist_.domain())) {
    throw InvalidParams("OODScenario: in- and out-distribution domains differ");
  }
  if (!(prior_in_ > 0.0 && prior_in_ < 1.0)) {
    throw InvalidParams("OODScenario: prior_in must lie in (0,1)");
  }
}

double OODScenario::mixture(std::size_t x) const {
  return in_dist_.marginal(x) * prior_in_ + out_dist_.mass(x) * prior_out();
}

bool OODScenario::full_mixture_support() const {
  for (std::size_t x = 0; x < size(); ++x) {
    if (!(mixture(x) > 0.0)) return false;
  }
  return true;
}

double OODScenario::posterior_in(std::size_t x) const {
  const double in_part = in_dist_.marginal(x) * prior_in_;
  const double out_part = out_dist_.mass(x) * prior_out();
  const double px = in_part + out_part;
  if (!(px > 0.0)) {
    throw UndefinedPosterior("posterior undefined at '" + domain()->id(x) +
                             "': p(x) = 0");
  }
  return in_part / px;
}

double complement_alpha_max(const FiniteDistribution& in_marginal) {
  const double n = static_cast<double>(in_marginal.size());
  return 1.0 / (n * in_marginal.max_mass());
}

FiniteDistribution complement_distribution(const FiniteDistribution& in_marginal,
                                           double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw AlphaTooLarge("complement_distribution: alpha must lie in (0,1)");
  }
  const std::size_t n = in_marginal.size();
  const double uniform = 1.0 / static_cast<double>(n);
  std::vector<double> mass(n);
  for (std::size_t x = 0; x < n; ++x) {
    const double q = (uniform - alpha * in_marginal.mass(x)) / (1.0 - alpha);
    if (q < 0.0) {
      throw AlphaTooLarge("complement_distribution: alpha " +
                          std::to_string(alpha) + " drives mass negative at '" +
                          in_marginal.domain()->id(x) + "'");
    }
    mass[x] = q;
  }
  // Normalization is exact in the reals; absorb the float residue.
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  for (double& m : mass) m /= total;
  return FiniteDistribution(in_marginal.domain(), std::move(mass));
}

std::vector<std::size_t> sample(const FiniteDistribution& dist, std::size_t n,
                                std::uint64_t seed) {
  std::vector<double> cumulative(dist.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    acc += dist.mass(i);
    cumulative[i] = acc;
  }
  cumulative.back() = 1.0;

  Rng rng(seed);
  std::vector<std::size_t> draws(n);
  for (std::size_t i = 0; i < n; ++i) {
    draws[i] = rng.cumulative_index(cumulative);
  }
  return draws;
}

}  // namespace oodkit
