// SPDX-License-Identifier: Apache-2.0
#include "oodkit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace oodkit {

PredictiveTable::PredictiveTable(DomainPtr domain, std::size_t width,
                                 std::vector<double> probs,
                                 std::vector<char> defined)
    : domain_(std::move(domain)),
      width_(width),
      probs_(std::move(probs)),
      defined_(std::move(defined)) {
  if (!domain_) throw InvalidParams("PredictiveTable: null domain");
  if (width_ == 0) throw InvalidParams("PredictiveTable: zero width");
  if (probs_.size() != domain_->size() * width_) {
    throw InvalidParams("PredictiveTable: probs size != N * width");
  }
  if (!defined_.empty() && defined_.size() != domain_->size()) {
    throw InvalidParams("PredictiveTable: defined mask size != N");
  }
  for (std::size_t x = 0; x < domain_->size(); ++x) {
    if (!is_defined(x)) continue;
    const auto r = row(x);
    double total = 0.0;
    for (double p : r) {
      if (!(p >= 0.0) || p > 1.0 + 1e-12) {
        throw InvalidMass("PredictiveTable: probability outside [0,1]");
      }
      total += p;
    }
    if (width_ > 1 && std::fabs(total - 1.0) > 1e-12) {
      throw InvalidMass("PredictiveTable: row does not sum to 1");
    }
  }
}

bool PredictiveTable::fully_defined() const {
  if (defined_.empty()) return true;
  return std::all_of(defined_.begin(), defined_.end(),
                     [](char c) { return c != 0; });
}

void EnergyMargins::validate() const {
  if (!(m_in < m_out)) {
    throw InvalidParams("EnergyMargins: requires m_in < m_out");
  }
}

std::string method_name(Method m) {
  switch (m) {
    case Method::Binary: return "binary";
    case Method::OE: return "oe";
    case Method::BGC: return "bgc";
    case Method::Energy: return "energy";
    case Method::SharedCombo: return "shared_combo";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  if (name == "binary") return Method::Binary;
  if (name == "oe") return Method::OE;
  if (name == "bgc") return Method::BGC;
  if (name == "energy") return Method::Energy;
  if (name == "shared_combo") return Method::SharedCombo;
  throw InvalidParams("unknown method '" + name + "'");
}

namespace {

// Class conditional with the uniform convention where p(x|i) = 0.
std::vector<double> conditional_or_uniform(const OODScenario& s, std::size_t x) {
  if (s.in_dist().has_conditional(x)) return s.class_conditional(x);
  return std::vector<double>(s.num_classes(),
                             1.0 / static_cast<double>(s.num_classes()));
}

std::vector<char> support_mask(const OODScenario& s) {
  std::vector<char> mask(s.size(), 0);
  bool all = true;
  for (std::size_t x = 0; x < s.size(); ++x) {
    mask[x] = s.has_posterior(x) ? 1 : 0;
    all = all && mask[x];
  }
  if (all) mask.clear();  // empty = fully defined
  return mask;
}

}  // namespace

PredictiveTable oracle_binary(const OODScenario& scenario) {
  const std::size_t n = scenario.size();
  std::vector<double> probs(n, 0.0);
  auto mask = support_mask(scenario);
  for (std::size_t x = 0; x < n; ++x) {
    if (mask.empty() || mask[x]) probs[x] = scenario.posterior_in(x);
  }
  return PredictiveTable(scenario.domain(), 1, std::move(probs), std::move(mask));
}

PredictiveTable oracle_oe(const OODScenario& scenario) {
  const std::size_t n = scenario.size();
  const std::size_t k = scenario.num_classes();
  const double inv_k = 1.0 / static_cast<double>(k);
  std::vector<double> probs(n * k, 0.0);
  auto mask = support_mask(scenario);
  for (std::size_t x = 0; x < n; ++x) {
    if (!(mask.empty() || mask[x])) continue;
    const double p = scenario.posterior_in(x);
    const auto cond = conditional_or_uniform(scenario, x);
    for (std::size_t y = 0; y < k; ++y) {
      probs[x * k + y] = p * cond[y] + inv_k * (1.0 - p);
    }
  }
  return PredictiveTable(scenario.domain(), k, std::move(probs), std::move(mask));
}

PredictiveTable oracle_bgc(const OODScenario& scenario) {
  const std::size_t n = scenario.size();
  const std::size_t k = scenario.num_classes();
  const std::size_t w = k + 1;
  std::vector<double> probs(n * w, 0.0);
  auto mask = support_mask(scenario);
  for (std::size_t x = 0; x < n; ++x) {
    if (!(mask.empty() || mask[x])) continue;
    const double p = scenario.posterior_in(x);
    const auto cond = conditional_or_uniform(scenario, x);
    for (std::size_t y = 0; y < k; ++y) {
      probs[x * w + y] = cond[y] * p;
    }
    probs[x * w + k] = 1.0 - p;
  }
  return PredictiveTable(scenario.domain(), w, std::move(probs), std::move(mask));
}

EnergyOracle oracle_energy(const OODScenario& scenario, EnergyMargins margins) {
  margins.validate();
  const std::size_t n = scenario.size();
  const std::size_t k = scenario.num_classes();
  std::vector<double> probs(n * k, 0.0);
  std::vector<double> neg_energy(n, 0.0);
  auto mask = support_mask(scenario);
  for (std::size_t x = 0; x < n; ++x) {
    if (!(mask.empty() || mask[x])) continue;
    const double p = scenario.posterior_in(x);
    const auto cond = conditional_or_uniform(scenario, x);
    std::copy(cond.begin(), cond.end(), probs.begin() + x * k);
    neg_energy[x] = p * (margins.m_out - margins.m_in) - margins.m_out;
  }
  PredictiveTable table(scenario.domain(), k, std::move(probs), mask);
  return EnergyOracle{std::move(table),
                      ScoreVector(scenario.domain(), std::move(neg_energy))};
}

namespace {

void require_full_support(const OODScenario& s, const char* who) {
  if (!s.full_mixture_support()) {
    throw UndefinedPosterior(std::string(who) +
                             ": scenario has points with p(x) = 0");
  }
}

}  // namespace

std::map<std::string, ScoreVector> oracle_scores(
    const OODScenario& scenario, Method method,
    std::optional<EnergyMargins> margins) {
  require_full_support(scenario, "oracle_scores");
  const std::size_t n = scenario.size();
  std::map<std::string, ScoreVector> out;

  auto posterior_vector = [&] {
    std::vector<double> v(n);
    for (std::size_t x = 0; x < n; ++x) v[x] = scenario.posterior_in(x);
    return ScoreVector(scenario.domain(), std::move(v));
  };

  switch (method) {
    case Method::Binary: {
      out.emplace("s1", posterior_vector());
      break;
    }
    case Method::OE: {
      const auto table = oracle_oe(scenario);
      std::vector<double> msp(n);
      for (std::size_t x = 0; x < n; ++x) msp[x] = score_msp(table.row(x));
      out.emplace("msp", ScoreVector(scenario.domain(), std::move(msp)));
      break;
    }
    case Method::BGC: {
      const auto table = oracle_bgc(scenario);
      std::vector<double> s1(n), s2(n), s3(n);
      for (std::size_t x = 0; x < n; ++x) {
        const auto row = table.row(x);
        s1[x] = score_s1_from_bgc(row);
        s2[x] = score_msp(row.subspan(0, scenario.num_classes()));
        s3[x] = score_s3_from_bgc(row);
      }
      out.emplace("s1", ScoreVector(scenario.domain(), std::move(s1)));
      out.emplace("s2", ScoreVector(scenario.domain(), std::move(s2)));
      out.emplace("s3", ScoreVector(scenario.domain(), std::move(s3)));
      break;
    }
    case Method::Energy: {
      EnergyMargins m = margins.value_or(EnergyMargins{});
      const auto oracle = oracle_energy(scenario, m);
      out.emplace("neg_energy", oracle.neg_energy);
      std::vector<double> msp(n);
      for (std::size_t x = 0; x < n; ++x) {
        msp[x] = score_msp(oracle.class_probs.row(x));
      }
      out.emplace("msp", ScoreVector(scenario.domain(), std::move(msp)));
      break;
    }
    case Method::SharedCombo: {
      std::vector<double> s1(n), s2(n), s3(n);
      for (std::size_t x = 0; x < n; ++x) {
        const double p = scenario.posterior_in(x);
        const auto cond = conditional_or_uniform(scenario, x);
        s1[x] = p;
        s2[x] = score_s2(p, cond);
        s3[x] = score_s3(p, cond);
      }
      out.emplace("s1", ScoreVector(scenario.domain(), std::move(s1)));
      out.emplace("s2", ScoreVector(scenario.domain(), std::move(s2)));
      out.emplace("s3", ScoreVector(scenario.domain(), std::move(s3)));
      break;
    }
  }
  return out;
}

double bayes_accuracy(const OODScenario& scenario) {
  double acc = 0.0;
  for (std::size_t x = 0; x < scenario.size(); ++x) {
    if (!scenario.in_dist().has_conditional(x)) continue;
    const auto cond = scenario.class_conditional(x);
    acc += scenario.in_dist().marginal(x) *
           *std::max_element(cond.begin(), cond.end());
  }
  return acc;
}

double population_accuracy(const OODScenario& scenario,
                           const PredictiveTable& predictive) {
  if (!same_domain(scenario.domain(), predictive.domain())) {
    throw InvalidParams("population_accuracy: domain mismatch");
  }
  const std::size_t k = scenario.num_classes();
  if (predictive.width() < k) {
    throw ShapeMismatch("population_accuracy: table narrower than K");
  }
  double acc = 0.0;
  for (std::size_t x = 0; x < scenario.size(); ++x) {
    if (!scenario.in_dist().has_conditional(x)) continue;
    const auto row = predictive.row(x).subspan(0, k);
    const std::size_t argmax =
        std::max_element(row.begin(), row.end()) - row.begin();
    acc += scenario.in_dist().joint(argmax, x);
  }
  return acc;
}

CoinScenario build_coin_scenario(std::size_t k, double m_frac, double chip_mass,
                                 double prior_in) {
  if (k < 2) throw InvalidParams("build_coin_scenario: K >= 2 required");
  if (!(m_frac > 0.0 && m_frac < 1.0)) {
    throw InvalidMass("build_coin_scenario: m_frac must lie in (0,1)");
  }
  if (!(chip_mass > 0.0 && chip_mass <= 1.0)) {
    throw InvalidMass("build_coin_scenario: chip_mass must lie in (0,1]");
  }

  const bool two_chips = chip_mass < 1.0;
  const std::size_t n_chips = two_chips ? 2 : 1;
  const std::size_t n = k + 1 + n_chips;

  std::vector<std::string> ids;
  std::vector<std::size_t> national, common, chips;
  ids.reserve(n);
  for (std::size_t c = 0; c < k; ++c) {
    ids.push_back("national_" + std::to_string(c));
    national.push_back(c);
  }
  ids.push_back("common");
  common.push_back(k);
  for (std::size_t c = 0; c < n_chips; ++c) {
    ids.push_back("chip_" + std::to_string(c));
    chips.push_back(k + 1 + c);
  }
  auto domain = std::make_shared<DiscreteDomain>(std::move(ids));

  // National side of country c: one-hot label c, mass (1-m_frac)/K.
  // Common side: uniform labels, total mass m_frac.
  std::vector<double> joint(k * n, 0.0);
  const double national_mass = (1.0 - m_frac) / static_cast<double>(k);
  const double common_label_mass = m_frac / static_cast<double>(k);
  for (std::size_t c = 0; c < k; ++c) {
    joint[c * n + c] = national_mass;
    joint[c * n + k] = common_label_mass;
  }

  std::vector<double> out_mass(n, 0.0);
  out_mass[k + 1] = two_chips ? chip_mass : 1.0;
  if (two_chips) out_mass[k + 2] = 1.0 - chip_mass;

  return CoinScenario{
      OODScenario(LabeledInDistribution(domain, k, std::move(joint)),
                  FiniteDistribution(domain, std::move(out_mass)), prior_in),
      std::move(national), std::move(common), std::move(chips)};
}

FiniteDistribution CoinScenario::common_distribution() const {
  const auto& in = scenario.in_dist();
  std::vector<double> mass(scenario.size(), 0.0);
  double total = 0.0;
  for (std::size_t x : common) total += in.marginal(x);
  for (std::size_t x : common) mass[x] = in.marginal(x) / total;
  return FiniteDistribution(scenario.domain(), std::move(mass));
}

}  // namespace oodkit
