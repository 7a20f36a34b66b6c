// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oodkit/domain.hpp"
#include "oodkit/scores.hpp"

namespace oodkit {

/// Per-point probability table: the predictive distribution of a model or a
/// Bayes oracle. Width is 1 (binary head), K, or K+1. Rows at points with
/// zero mixture mass are marked absent instead of being invented.
class PredictiveTable {
 public:
  PredictiveTable(DomainPtr domain, std::size_t width, std::vector<double> probs,
                  std::vector<char> defined = {});

  const DomainPtr& domain() const { return domain_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return domain_->size(); }
  bool is_defined(std::size_t x) const {
    return defined_.empty() || defined_[x] != 0;
  }
  bool fully_defined() const;
  std::span<const double> row(std::size_t x) const {
    return {probs_.data() + x * width_, width_};
  }
  const std::vector<double>& values() const { return probs_; }

 private:
  DomainPtr domain_;
  std::size_t width_;
  std::vector<double> probs_;   // N * width, row-major
  std::vector<char> defined_;   // empty = all defined
};

/// Energy-margin hyper-parameters, m_in < m_out.
struct EnergyMargins {
  double m_in = 0.0;
  double m_out = 1.0;
  void validate() const;
};

enum class Method { Binary, OE, BGC, Energy, SharedCombo };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

// Closed-form Bayes optima on a scenario. All of them require p(x) > 0 at a
// point to produce a row; dead points come back marked absent.

/// Binary discriminator optimum: the posterior p(i|x) (width 1).
PredictiveTable oracle_binary(const OODScenario& scenario);

/// Confidence-loss / Outlier-Exposure optimum (width K):
/// p(i|x) p(y|x,i) + (1/K)(1 - p(i|x)).
PredictiveTable oracle_oe(const OODScenario& scenario);

/// Background-class optimum (width K+1): p(y|x,i) p(i|x) for y <= K and
/// 1 - p(i|x) for the background slot.
PredictiveTable oracle_bgc(const OODScenario& scenario);

struct EnergyOracle {
  PredictiveTable class_probs;  // width K, equal to p(.|x,i)
  ScoreVector neg_energy;       // -E*(x) = p(i|x)(m_out - m_in) - m_out
};

/// Energy-margin optimum. Class probabilities use the uniform convention at
/// points without in-support; endpoints p(i|x) in {0,1} pin -E* to
/// -m_out / -m_in.
EnergyOracle oracle_energy(const OODScenario& scenario, EnergyMargins margins);

/// The scoring functions each method's oracle can emit, keyed by canonical
/// name: binary -> {s1}; bgc -> {s1,s2,s3}; oe -> {msp}; energy ->
/// {neg_energy, msp}; shared_combo -> {s1,s2,s3}. Requires full mixture
/// support (propagates UndefinedPosterior otherwise).
std::map<std::string, ScoreVector> oracle_scores(
    const OODScenario& scenario, Method method,
    std::optional<EnergyMargins> margins = std::nullopt);

/// Expected accuracy of the Bayes classifier: sum_x p(x|i) max_y p(y|x,i).
double bayes_accuracy(const OODScenario& scenario);

/// Expected accuracy of an arbitrary K-wide (or K+1-wide) predictive table's
/// argmax decision over the first K slots.
double population_accuracy(const OODScenario& scenario,
                           const PredictiveTable& predictive);

/// Appendix-B Euro-coin scenario: K national sides (in-only, one-hot labels),
/// one common side (in-only, uniform labels), chips carrying all out-mass.
/// m_frac is the in-mass of the common side; chip_mass the mass of the first
/// chip (a second chip holds the remainder when chip_mass < 1).
struct CoinScenario {
  OODScenario scenario;
  std::vector<std::size_t> national;
  std::vector<std::size_t> common;
  std::vector<std::size_t> chips;

  /// In-distribution restricted and renormalized to the common-side points.
  FiniteDistribution common_distribution() const;
};

CoinScenario build_coin_scenario(std::size_t k, double m_frac, double chip_mass,
                                 double prior_in);

}  // namespace oodkit
