// SPDX-License-Identifier: Apache-2.0
#include "oodkit/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oodkit/kernels.hpp"
#include "oodkit/rng.hpp"

namespace oodkit {

std::string loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::ClassifierCE: return "classifier_ce";
    case LossKind::BinaryBalanced: return "binary_balanced";
    case LossKind::ConfidenceOE: return "confidence_oe";
    case LossKind::BackgroundClass: return "background_class";
    case LossKind::EnergyMargin: return "energy_margin";
    case LossKind::SharedCombo: return "shared_combo";
  }
  return "?";
}

LossKind loss_kind_from_name(const std::string& name) {
  if (name == "classifier_ce") return LossKind::ClassifierCE;
  if (name == "binary_balanced") return LossKind::BinaryBalanced;
  if (name == "confidence_oe") return LossKind::ConfidenceOE;
  if (name == "background_class") return LossKind::BackgroundClass;
  if (name == "energy_margin") return LossKind::EnergyMargin;
  if (name == "shared_combo") return LossKind::SharedCombo;
  throw InvalidParams("unknown loss kind '" + name + "'");
}

void LossSpec::validate() const {
  if (!(lambda > 0.0)) throw InvalidParams("LossSpec: lambda must be positive");
  if (kind == LossKind::EnergyMargin) margins.validate();
  if (!(labeled_fraction > 0.0 && labeled_fraction <= 1.0)) {
    throw InvalidParams("LossSpec: labeled_fraction must lie in (0,1]");
  }
}

std::size_t logit_width(LossKind kind, std::size_t num_classes) {
  switch (kind) {
    case LossKind::BinaryBalanced: return 1;
    case LossKind::ClassifierCE:
    case LossKind::ConfidenceOE:
    case LossKind::EnergyMargin: return num_classes;
    case LossKind::BackgroundClass:
    case LossKind::SharedCombo: return num_classes + 1;
  }
  return 0;
}

TabularLogits init_logits(DomainPtr domain, std::size_t width,
                          std::uint64_t seed) {
  Rng rng(seed);
  TabularLogits logits{domain, width, {}};
  logits.values.resize(domain->size() * width);
  for (double& v : logits.values) v = rng.uniform(-0.01, 0.01);
  return logits;
}

std::vector<bool> labeled_subset(const OODScenario& scenario, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw InvalidParams("labeled_subset: fraction must lie in (0,1]");
  }
  std::vector<bool> labeled(scenario.size(), false);
  std::vector<std::size_t> support;
  for (std::size_t x = 0; x < scenario.size(); ++x) {
    if (scenario.in_dist().marginal(x) > 0.0) support.push_back(x);
  }
  const auto count = static_cast<std::size_t>(std::ceil(
      fraction * static_cast<double>(support.size()) - 1e-12));
  for (std::size_t i = 0; i < std::min(count, support.size()); ++i) {
    labeled[support[i]] = true;
  }
  return labeled;
}

namespace {

double softplus(double z) {  // log(1 + e^z), overflow-safe
  return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z)));
}

double stable_sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log-softmax written into `out`; returns logsumexp.
double log_softmax(std::span<const double> logits, std::vector<double>& out) {
  const double lse = score_energy(logits);
  out.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return lse;
}

void check_shape(const OODScenario& scenario, const TabularLogits& logits,
                 const LossSpec& spec) {
  spec.validate();
  if (!same_domain(scenario.domain(), logits.domain)) {
    throw ShapeMismatch("logit table domain does not match scenario");
  }
  const std::size_t want = logit_width(spec.kind, scenario.num_classes());
  if (logits.width != want || logits.values.size() != scenario.size() * want) {
    throw ShapeMismatch("logit table width " + std::to_string(logits.width) +
                        ", loss kind needs " + std::to_string(want));
  }
}

// Accumulates the population loss per point. The three §3.3-style weights:
// in-terms carry p(x|i), out-terms carry lambda * p(x|o); the energy kind
// weighs by prior-scaled masses so its stationary point is the Thm-3 one.
struct LossAccum {
  const OODScenario& s;
  const LossSpec& spec;
  std::vector<bool> labeled;  // SharedCombo only
  std::vector<double> buf;    // scratch for log-softmax

  explicit LossAccum(const OODScenario& scenario, const LossSpec& sp)
      : s(scenario), spec(sp) {
    if (spec.kind == LossKind::SharedCombo) {
      labeled = labeled_subset(scenario, spec.labeled_fraction);
    }
  }

  double point_loss(const TabularLogits& logits, std::size_t x) {
    const std::size_t k = s.num_classes();
    const double w_in = s.in_dist().marginal(x);
    const double w_out = spec.lambda * s.out_dist().mass(x);
    const auto row = logits.row(x);

    switch (spec.kind) {
      case LossKind::ClassifierCE: {
        if (w_in <= 0.0) return 0.0;
        log_softmax(row, buf);
        double loss = 0.0;
        for (std::size_t y = 0; y < k; ++y) {
          loss -= s.in_dist().joint(y, x) * buf[y];
        }
        return loss;
      }
      case LossKind::BinaryBalanced: {
        const double d = row[0];
        double loss = 0.0;
        if (w_in > 0.0) loss += w_in * softplus(-d);
        if (w_out > 0.0) loss += w_out * softplus(d);
        return loss;
      }
      case LossKind::ConfidenceOE: {
        if (w_in <= 0.0 && w_out <= 0.0) return 0.0;
        log_softmax(row, buf);
        double loss = 0.0;
        for (std::size_t y = 0; y < k; ++y) {
          double weight = s.in_dist().joint(y, x);
          weight += w_out / static_cast<double>(k);
          loss -= weight * buf[y];
        }
        return loss;
      }
      case LossKind::BackgroundClass: {
        if (w_in <= 0.0 && w_out <= 0.0) return 0.0;
        log_softmax(row, buf);
        double loss = 0.0;
        for (std::size_t y = 0; y < k; ++y) {
          loss -= s.in_dist().joint(y, x) * buf[y];
        }
        loss -= w_out * buf[k];
        return loss;
      }
      case LossKind::EnergyMargin: {
        const double u_in = s.prior_in() * s.in_dist().marginal(x);
        const double u_out = s.prior_out() * s.out_dist().mass(x);
        if (u_in <= 0.0 && u_out <= 0.0) return 0.0;
        const double lse = log_softmax(row, buf);
        const double energy = -lse;
        double loss = 0.0;
        if (u_in > 0.0) {
          for (std::size_t y = 0; y < k; ++y) {
            loss -= s.prior_in() * s.in_dist().joint(y, x) * buf[y];
          }
          const double h_in = std::max(0.0, energy - spec.margins.m_in);
          loss += spec.lambda * u_in * h_in * h_in;
        }
        if (u_out > 0.0) {
          const double h_out = std::max(0.0, spec.margins.m_out - energy);
          loss += spec.lambda * u_out * h_out * h_out;
        }
        return loss;
      }
      case LossKind::SharedCombo: {
        const double d = row[k];
        double loss = 0.0;
        if (w_in > 0.0) loss += w_in * softplus(-d);
        if (w_out > 0.0) loss += w_out * softplus(d);
        if (w_in > 0.0 && labeled[x]) {
          log_softmax(row.subspan(0, k), buf);
          for (std::size_t y = 0; y < k; ++y) {
            loss -= s.in_dist().joint(y, x) * buf[y];
          }
        }
        return loss;
      }
    }
    return 0.0;
  }

  void point_gradient(const TabularLogits& logits, std::size_t x,
                      std::span<double> grad) {
    const std::size_t k = s.num_classes();
    const double w_in = s.in_dist().marginal(x);
    const double w_out = spec.lambda * s.out_dist().mass(x);
    const auto row = logits.row(x);
    std::fill(grad.begin(), grad.end(), 0.0);

    switch (spec.kind) {
      case LossKind::ClassifierCE: {
        if (w_in <= 0.0) return;
        log_softmax(row, buf);
        for (std::size_t y = 0; y < k; ++y) {
          grad[y] = w_in * std::exp(buf[y]) - s.in_dist().joint(y, x);
        }
        return;
      }
      case LossKind::BinaryBalanced: {
        const double sig = stable_sigmoid(row[0]);
        grad[0] = w_in * (sig - 1.0) + w_out * sig;
        return;
      }
      case LossKind::ConfidenceOE: {
        if (w_in <= 0.0 && w_out <= 0.0) return;
        log_softmax(row, buf);
        const double total = w_in + w_out;
        for (std::size_t y = 0; y < k; ++y) {
          grad[y] = total * std::exp(buf[y]) - s.in_dist().joint(y, x) -
                    w_out / static_cast<double>(k);
        }
        return;
      }
      case LossKind::BackgroundClass: {
        if (w_in <= 0.0 && w_out <= 0.0) return;
        log_softmax(row, buf);
        const double total = w_in + w_out;
        for (std::size_t y = 0; y < k; ++y) {
          grad[y] = total * std::exp(buf[y]) - s.in_dist().joint(y, x);
        }
        grad[k] = total * std::exp(buf[k]) - w_out;
        return;
      }
      case LossKind::EnergyMargin: {
        const double u_in = s.prior_in() * s.in_dist().marginal(x);
        const double u_out = s.prior_out() * s.out_dist().mass(x);
        if (u_in <= 0.0 && u_out <= 0.0) return;
        const double lse = log_softmax(row, buf);
        const double energy = -lse;
        const double h_in = std::max(0.0, energy - spec.margins.m_in);
        const double h_out = std::max(0.0, spec.margins.m_out - energy);
        // dLoss/dE, then dE/df_k = -softmax_k.
        const double dloss_de =
            2.0 * spec.lambda * (u_in * h_in - u_out * h_out);
        for (std::size_t y = 0; y < k; ++y) {
          const double p = std::exp(buf[y]);
          grad[y] = -dloss_de * p;
          if (u_in > 0.0) {
            grad[y] += s.prior_in() *
                       (s.in_dist().marginal(x) * p - s.in_dist().joint(y, x));
          }
        }
        return;
      }
      case LossKind::SharedCombo: {
        const double sig = stable_sigmoid(row[k]);
        grad[k] = w_in * (sig - 1.0) + w_out * sig;
        if (w_in > 0.0 && labeled[x]) {
          log_softmax(row.subspan(0, k), buf);
          for (std::size_t y = 0; y < k; ++y) {
            grad[y] = w_in * std::exp(buf[y]) - s.in_dist().joint(y, x);
          }
        }
        return;
      }
    }
  }
};

}  // namespace

double expected_loss(const OODScenario& scenario, const TabularLogits& logits,
                     const LossSpec& spec) {
  check_shape(scenario, logits, spec);
  LossAccum accum(scenario, spec);
  std::vector<double> per_point(scenario.size());
  for (std::size_t x = 0; x < scenario.size(); ++x) {
    per_point[x] = accum.point_loss(logits, x);
  }
  return kern::sum(per_point.data(), per_point.size());
}

TabularLogits loss_gradient(const OODScenario& scenario,
                            const TabularLogits& logits, const LossSpec& spec) {
  check_shape(scenario, logits, spec);
  LossAccum accum(scenario, spec);
  TabularLogits grad{logits.domain, logits.width,
                     std::vector<double>(logits.values.size(), 0.0)};
  for (std::size_t x = 0; x < scenario.size(); ++x) {
    accum.point_gradient(logits, x, grad.row(x));
  }
  return grad;
}

MinimizeResult tabular_minimize(const OODScenario& scenario, const LossSpec& spec,
                                const MinimizeOptions& options) {
  if (options.steps < 1) throw InvalidParams("tabular_minimize: steps >= 1");
  if (!(options.learning_rate > 0.0)) {
    throw InvalidParams("tabular_minimize: learning_rate must be positive");
  }
  const std::size_t width = logit_width(spec.kind, scenario.num_classes());
  TabularLogits logits = init_logits(scenario.domain(), width, options.seed);

  double lr = options.learning_rate;
  double loss = expected_loss(scenario, logits, spec);
  if (!std::isfinite(loss)) {
    throw DivergenceDetected("tabular_minimize: non-finite initial loss");
  }
  std::vector<double> trajectory;
  trajectory.reserve(options.steps + 1);
  trajectory.push_back(loss);

  const std::size_t total = logits.values.size();
  std::vector<double> backup(total);
  for (std::size_t step = 0; step < options.steps; ++step) {
    const TabularLogits grad = loss_gradient(scenario, logits, spec);
    std::copy(logits.values.begin(), logits.values.end(), backup.begin());

    int halvings = 0;
    for (;;) {
      kern::axpy(logits.values.data(), grad.values.data(), -lr, total);
      const double next = expected_loss(scenario, logits, spec);
      const bool bad = !std::isfinite(next) || next > loss;
      if (!bad) {
        loss = next;
        break;
      }
      if (!options.halve_on_increase) {
        if (!std::isfinite(next)) {
          throw DivergenceDetected("tabular_minimize: loss became non-finite");
        }
        loss = next;  // plain GD accepts uphill steps
        break;
      }
      std::copy(backup.begin(), backup.end(), logits.values.begin());
      lr *= 0.5;
      if (++halvings > 80) break;  // gradient numerically zero; stay put
    }
    trajectory.push_back(loss);
  }
  return MinimizeResult{std::move(logits), std::move(trajectory), lr};
}

double grad_check_tabular(const OODScenario& scenario, const TabularLogits& logits,
                          const LossSpec& spec, std::size_t n_probes,
                          double epsilon, std::uint64_t seed) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) {
    throw InvalidParams("grad_check: epsilon must lie in [1e-7, 1e-3]");
  }
  const TabularLogits analytic = loss_gradient(scenario, logits, spec);
  TabularLogits probe = logits;
  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t i = 0; i < n_probes; ++i) {
    const std::size_t idx = rng.index(probe.values.size());
    const double saved = probe.values[idx];
    probe.values[idx] = saved + epsilon;
    const double up = expected_loss(scenario, probe, spec);
    probe.values[idx] = saved - epsilon;
    const double down = expected_loss(scenario, probe, spec);
    probe.values[idx] = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double a = analytic.values[idx];
    const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
    worst = std::max(worst, std::fabs(a - numeric) / denom);
  }
  return worst;
}

namespace {

std::vector<double> softmax_row(std::span<const double> logits) {
  const double lse = score_energy(logits);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - lse);
  }
  return out;
}

}  // namespace

PredictiveTable class_probs_from_logits(const TabularLogits& logits,
                                        std::size_t num_classes) {
  if (logits.width < num_classes) {
    throw ShapeMismatch("class_probs_from_logits: table narrower than K");
  }
  const std::size_t n = logits.domain->size();
  std::vector<double> probs(n * num_classes);
  for (std::size_t x = 0; x < n; ++x) {
    const auto sm = softmax_row(logits.row(x).subspan(0, num_classes));
    std::copy(sm.begin(), sm.end(), probs.begin() + x * num_classes);
  }
  return PredictiveTable(logits.domain, num_classes, std::move(probs));
}

PredictiveTable bgc_probs_from_logits(const TabularLogits& logits) {
  return class_probs_from_logits(logits, logits.width);
}

PredictiveTable disc_probs_from_logits(const TabularLogits& logits) {
  const std::size_t n = logits.domain->size();
  std::vector<double> probs(n);
  for (std::size_t x = 0; x < n; ++x) {
    probs[x] = stable_sigmoid(logits.row(x).back());
  }
  return PredictiveTable(logits.domain, 1, std::move(probs));
}

ScoreVector neg_energy_from_logits(const TabularLogits& logits,
                                   std::size_t num_classes) {
  if (logits.width < num_classes) {
    throw ShapeMismatch("neg_energy_from_logits: table narrower than K");
  }
  const std::size_t n = logits.domain->size();
  std::vector<double> values(n);
  for (std::size_t x = 0; x < n; ++x) {
    values[x] = score_energy(logits.row(x).subspan(0, num_classes));
  }
  return ScoreVector(logits.domain, std::move(values));
}

std::map<std::string, ScoreVector> model_scores(const TabularLogits& logits,
                                                const LossSpec& spec,
                                                std::size_t num_classes) {
  std::map<std::string, ScoreVector> out;
  const std::size_t n = logits.domain->size();
  switch (spec.kind) {
    case LossKind::BinaryBalanced: {
      const auto disc = disc_probs_from_logits(logits);
      out.emplace("s1", ScoreVector(logits.domain, disc.values()));
      break;
    }
    case LossKind::ClassifierCE:
    case LossKind::ConfidenceOE: {
      const auto probs = class_probs_from_logits(logits, num_classes);
      std::vector<double> msp(n);
      for (std::size_t x = 0; x < n; ++x) msp[x] = score_msp(probs.row(x));
      out.emplace("msp", ScoreVector(logits.domain, std::move(msp)));
      break;
    }
    case LossKind::BackgroundClass: {
      const auto probs = bgc_probs_from_logits(logits);
      std::vector<double> s1(n), s2(n), s3(n);
      for (std::size_t x = 0; x < n; ++x) {
        const auto row = probs.row(x);
        s1[x] = score_s1_from_bgc(row);
        s2[x] = score_msp(row.subspan(0, num_classes));
        s3[x] = score_s3_from_bgc(row);
      }
      out.emplace("s1", ScoreVector(logits.domain, std::move(s1)));
      out.emplace("s2", ScoreVector(logits.domain, std::move(s2)));
      out.emplace("s3", ScoreVector(logits.domain, std::move(s3)));
      break;
    }
    case LossKind::EnergyMargin: {
      out.emplace("neg_energy", neg_energy_from_logits(logits, num_classes));
      const auto probs = class_probs_from_logits(logits, num_classes);
      std::vector<double> msp(n);
      for (std::size_t x = 0; x < n; ++x) msp[x] = score_msp(probs.row(x));
      out.emplace("msp", ScoreVector(logits.domain, std::move(msp)));
      break;
    }
    case LossKind::SharedCombo: {
      const auto disc = disc_probs_from_logits(logits);
      const auto probs = class_probs_from_logits(logits, num_classes);
      std::vector<double> s1(n), s2(n), s3(n);
      for (std::size_t x = 0; x < n; ++x) {
        const double p = disc.row(x)[0];
        s1[x] = p;
        s2[x] = score_s2(p, probs.row(x));
        s3[x] = score_s3(p, probs.row(x));
      }
      out.emplace("s1", ScoreVector(logits.domain, std::move(s1)));
      out.emplace("s2", ScoreVector(logits.domain, std::move(s2)));
      out.emplace("s3", ScoreVector(logits.domain, std::move(s3)));
      break;
    }
  }
  return out;
}

}  // namespace oodkit
