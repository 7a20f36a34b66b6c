// SPDX-License-Identifier: Apache-2.0
#include "oodkit/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oodkit/kernels.hpp"

namespace oodkit {

std::string activation_name(Activation a) {
  return a == Activation::Tanh ? "tanh" : "relu";
}

Activation activation_from_name(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  throw InvalidParams("unknown activation '" + name + "'");
}

void MlpArchitecture::validate() const {
  if (input_dim == 0) throw InvalidParams("MlpArchitecture: input_dim >= 1");
  if (hidden.empty()) throw InvalidParams("MlpArchitecture: needs hidden layers");
  for (std::size_t h : hidden) {
    if (h == 0) throw InvalidParams("MlpArchitecture: zero-width hidden layer");
  }
  if (num_classes < 2) throw InvalidParams("MlpArchitecture: K >= 2 required");
}

SharedMLP::SharedMLP(MlpArchitecture arch, std::uint64_t seed)
    : arch_(std::move(arch)) {
  arch_.validate();
  layer_sizes_.push_back(arch_.input_dim);
  for (std::size_t h : arch_.hidden) layer_sizes_.push_back(h);

  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
    weight_offset_.push_back(offset);
    offset += layer_sizes_[l + 1] * layer_sizes_[l];
    bias_offset_.push_back(offset);
    offset += layer_sizes_[l + 1];
  }
  const std::size_t h = layer_sizes_.back();
  class_w_ = offset;
  offset += arch_.num_classes * h;
  class_b_ = offset;
  offset += arch_.num_classes;
  disc_w_ = offset;
  offset += h;
  disc_b_ = offset;
  offset += 1;

  params_.resize(offset);
  Rng rng(seed);
  for (double& p : params_) p = rng.uniform(-0.01, 0.01);
}

namespace {

double activate(double z, Activation a) {
  return a == Activation::Tanh ? std::tanh(z) : std::max(0.0, z);
}

double activate_grad_from_output(double out, double pre, Activation a) {
  return a == Activation::Tanh ? 1.0 - out * out : (pre > 0.0 ? 1.0 : 0.0);
}

double stable_sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z)));
}

}  // namespace

// Per-sample forward/backward state. Kept out of SharedMLP so the model
// itself stays a plain immutable parameter bag.
struct MlpWorkspace {
  const SharedMLP& m;
  std::vector<std::vector<double>> pre;   // pre-activations per trunk layer
  std::vector<std::vector<double>> act;   // activations; act[0] = input copy
  std::vector<double> class_logits;
  double disc_logit = 0.0;

  explicit MlpWorkspace(const SharedMLP& model) : m(model) {
    act.resize(m.layer_sizes_.size());
    pre.resize(m.layer_sizes_.size());  // pre[0] unused
    for (std::size_t l = 0; l < m.layer_sizes_.size(); ++l) {
      act[l].resize(m.layer_sizes_[l]);
      pre[l].resize(m.layer_sizes_[l]);
    }
    class_logits.resize(m.arch_.num_classes);
  }

  void forward(std::span<const double> input) {
    std::copy(input.begin(), input.end(), act[0].begin());
    const auto& p = m.params_;
    for (std::size_t l = 0; l + 1 < m.layer_sizes_.size(); ++l) {
      const std::size_t in = m.layer_sizes_[l], out = m.layer_sizes_[l + 1];
      const double* w = p.data() + m.weight_offset_[l];
      const double* b = p.data() + m.bias_offset_[l];
      for (std::size_t j = 0; j < out; ++j) {
        const double z = kern::dot(w + j * in, act[l].data(), in) + b[j];
        pre[l + 1][j] = z;
        act[l + 1][j] = activate(z, m.arch_.activation);
      }
    }
    const std::size_t h = m.layer_sizes_.back();
    const double* cw = p.data() + m.class_w_;
    const double* cb = p.data() + m.class_b_;
    for (std::size_t kk = 0; kk < m.arch_.num_classes; ++kk) {
      class_logits[kk] = kern::dot(cw + kk * h, act.back().data(), h) + cb[kk];
    }
    disc_logit =
        kern::dot(p.data() + m.disc_w_, act.back().data(), h) + p[m.disc_b_];
  }

  /// Backpropagates head deltas into the parameter gradient. Either span may
  /// be empty when the loss kind does not touch that head.
  void backward(std::span<const double> class_delta, double disc_delta,
                bool use_disc, std::vector<double>& grad) {
    const auto& p = m.params_;
    const std::size_t h = m.layer_sizes_.back();
    std::vector<double> delta(h, 0.0);

    if (!class_delta.empty()) {
      const double* cw = p.data() + m.class_w_;
      double* gcw = grad.data() + m.class_w_;
      double* gcb = grad.data() + m.class_b_;
      for (std::size_t kk = 0; kk < m.arch_.num_classes; ++kk) {
        const double d = class_delta[kk];
        if (d == 0.0) continue;
        kern::axpy(gcw + kk * h, act.back().data(), d, h);
        gcb[kk] += d;
        kern::axpy(delta.data(), cw + kk * h, d, h);
      }
    }
    if (use_disc) {
      kern::axpy(grad.data() + m.disc_w_, act.back().data(), disc_delta, h);
      grad[m.disc_b_] += disc_delta;
      kern::axpy(delta.data(), p.data() + m.disc_w_, disc_delta, h);
    }

    for (std::size_t l = m.layer_sizes_.size() - 1; l >= 1; --l) {
      const std::size_t out = m.layer_sizes_[l], in = m.layer_sizes_[l - 1];
      for (std::size_t j = 0; j < out; ++j) {
        delta[j] *= activate_grad_from_output(act[l][j], pre[l][j],
                                              m.arch_.activation);
      }
      const double* w = p.data() + m.weight_offset_[l - 1];
      double* gw = grad.data() + m.weight_offset_[l - 1];
      double* gb = grad.data() + m.bias_offset_[l - 1];
      std::vector<double> prev_delta(in, 0.0);
      for (std::size_t j = 0; j < out; ++j) {
        const double d = delta[j];
        if (d == 0.0) continue;
        kern::axpy(gw + j * in, act[l - 1].data(), d, in);
        gb[j] += d;
        kern::axpy(prev_delta.data(), w + j * in, d, in);
      }
      delta.swap(prev_delta);
      delta.resize(in);
    }
  }
};

SharedMLP::Output SharedMLP::forward(std::span<const double> input) const {
  if (input.size() != arch_.input_dim) {
    throw ShapeMismatch("SharedMLP::forward: input dimension mismatch");
  }
  MlpWorkspace ws(*this);
  ws.forward(input);
  return Output{ws.class_logits, ws.disc_logit};
}

MlpBatch sample_batch(const OODScenario& scenario, std::size_t n_in,
                      std::size_t n_out, const std::vector<bool>& labeled,
                      Rng& rng) {
  const auto& domain = scenario.domain();
  if (!domain->has_coordinates()) {
    throw InvalidParams("sample_batch: scenario domain has no coordinates");
  }
  const std::size_t dim = domain->coord_dim();
  const std::size_t n = domain->size();

  std::vector<double> cum_in(n), cum_out(n);
  double a = 0.0, b = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    a += scenario.in_dist().marginal(x);
    b += scenario.out_dist().mass(x);
    cum_in[x] = a;
    cum_out[x] = b;
  }
  cum_in.back() = 1.0;
  cum_out.back() = 1.0;

  MlpBatch batch;
  batch.input_dim = dim;
  batch.in_coords.reserve(n_in * dim);
  for (std::size_t i = 0; i < n_in; ++i) {
    const std::size_t x = rng.cumulative_index(cum_in);
    const auto c = domain->coords(x);
    batch.in_coords.insert(batch.in_coords.end(), c.begin(), c.end());
    const auto cond = scenario.class_conditional(x);
    double u = rng.uniform(), acc = 0.0;
    std::size_t label = cond.size() - 1;
    for (std::size_t y = 0; y < cond.size(); ++y) {
      acc += cond[y];
      if (u < acc) {
        label = y;
        break;
      }
    }
    batch.in_labels.push_back(label);
    batch.in_labeled.push_back(labeled.empty() ? true : labeled[x]);
  }
  batch.out_coords.reserve(n_out * dim);
  for (std::size_t i = 0; i < n_out; ++i) {
    const std::size_t x = rng.cumulative_index(cum_out);
    const auto c = domain->coords(x);
    batch.out_coords.insert(batch.out_coords.end(), c.begin(), c.end());
  }
  return batch;
}

namespace {

// Shared implementation of batch loss and (optionally) gradient.
double batch_loss_impl(const SharedMLP& model, const MlpBatch& batch,
                       const LossSpec& spec, std::vector<double>* grad) {
  spec.validate();
  const std::size_t k = model.architecture().num_classes;
  const std::size_t n_in = batch.in_count();
  const std::size_t n_out = batch.out_count();
  if (batch.input_dim != model.architecture().input_dim) {
    throw ShapeMismatch("mlp batch: input dimension mismatch");
  }

  std::size_t n_labeled = 0;
  for (bool f : batch.in_labeled) n_labeled += f ? 1 : 0;

  const bool wants_class = spec.kind != LossKind::BinaryBalanced;
  const bool wants_disc = spec.kind == LossKind::BinaryBalanced ||
                          spec.kind == LossKind::SharedCombo ||
                          spec.kind == LossKind::BackgroundClass;

  const double inv_in = n_in > 0 ? 1.0 / static_cast<double>(n_in) : 0.0;
  const double inv_out = n_out > 0 ? 1.0 / static_cast<double>(n_out) : 0.0;
  const double inv_lab =
      n_labeled > 0 ? 1.0 / static_cast<double>(n_labeled) : 0.0;

  MlpWorkspace ws(model);
  std::vector<double> logits(k + 1);
  std::vector<double> probs;
  std::vector<double> class_delta(k);
  double loss = 0.0;

  auto softmax_into = [&](std::span<const double> in, std::vector<double>& out) {
    const double lse = score_energy(in);
    out.resize(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = std::exp(in[i] - lse);
    return lse;
  };

  for (std::size_t i = 0; i < n_in; ++i) {
    ws.forward({batch.in_coords.data() + i * batch.input_dim, batch.input_dim});
    std::fill(class_delta.begin(), class_delta.end(), 0.0);
    double disc_delta = 0.0;
    bool touch_class = false, touch_disc = false;
    const bool labeled = batch.in_labeled[i];
    const std::size_t label = batch.in_labels[i];

    switch (spec.kind) {
      case LossKind::ClassifierCE:
      case LossKind::ConfidenceOE: {
        if (labeled && n_labeled > 0) {
          const double lse = softmax_into(ws.class_logits, probs);
          loss += inv_lab * (lse - ws.class_logits[label]);
          if (grad) {
            for (std::size_t y = 0; y < k; ++y) {
              class_delta[y] = inv_lab * probs[y];
            }
            class_delta[label] -= inv_lab;
            touch_class = true;
          }
        }
        break;
      }
      case LossKind::BinaryBalanced: {
        loss += inv_in * softplus(-ws.disc_logit);
        if (grad) {
          disc_delta = inv_in * (stable_sigmoid(ws.disc_logit) - 1.0);
          touch_disc = true;
        }
        break;
      }
      case LossKind::BackgroundClass: {
        if (labeled && n_labeled > 0) {
          // K+1-way softmax over [class logits, disc slot].
          std::copy(ws.class_logits.begin(), ws.class_logits.end(),
                    logits.begin());
          logits[k] = ws.disc_logit;
          const double lse = softmax_into({logits.data(), k + 1}, probs);
          loss += inv_lab * (lse - logits[label]);
          if (grad) {
            for (std::size_t y = 0; y < k; ++y) {
              class_delta[y] = inv_lab * probs[y];
            }
            class_delta[label] -= inv_lab;
            disc_delta = inv_lab * probs[k];
            touch_class = true;
            touch_disc = true;
          }
        }
        break;
      }
      case LossKind::EnergyMargin: {
        const double lse = softmax_into(ws.class_logits, probs);
        if (labeled && n_labeled > 0) {
          loss += inv_lab * (lse - ws.class_logits[label]);
          if (grad) {
            for (std::size_t y = 0; y < k; ++y) {
              class_delta[y] += inv_lab * probs[y];
            }
            class_delta[label] -= inv_lab;
            touch_class = true;
          }
        }
        const double energy = -lse;
        const double h_in = std::max(0.0, energy - spec.margins.m_in);
        if (h_in > 0.0) {
          loss += spec.lambda * inv_in * h_in * h_in;
          if (grad) {
            const double dloss_de = 2.0 * spec.lambda * inv_in * h_in;
            for (std::size_t y = 0; y < k; ++y) {
              class_delta[y] += -dloss_de * probs[y];
            }
            touch_class = true;
          }
        }
        break;
      }
      case LossKind::SharedCombo: {
        loss += inv_in * softplus(-ws.disc_logit);
        if (grad) {
          disc_delta = inv_in * (stable_sigmoid(ws.disc_logit) - 1.0);
          touch_disc = true;
        }
        if (labeled && n_labeled > 0) {
          const double lse = softmax_into(ws.class_logits, probs);
          loss += inv_lab * (lse - ws.class_logits[label]);
          if (grad) {
            for (std::size_t y = 0; y < k; ++y) {
              class_delta[y] = inv_lab * probs[y];
            }
            class_delta[label] -= inv_lab;
            touch_class = true;
          }
        }
        break;
      }
    }
    if (grad && (touch_class || touch_disc)) {
      ws.backward(touch_class ? std::span<const double>(class_delta)
                              : std::span<const double>{},
                  disc_delta, touch_disc, *grad);
    }
  }

  for (std::size_t i = 0; i < n_out; ++i) {
    ws.forward({batch.out_coords.data() + i * batch.input_dim, batch.input_dim});
    std::fill(class_delta.begin(), class_delta.end(), 0.0);
    double disc_delta = 0.0;
    bool touch_class = false, touch_disc = false;

    switch (spec.kind) {
      case LossKind::ClassifierCE:
        break;  // no out-term
      case LossKind::ConfidenceOE: {
        const double lse = softmax_into(ws.class_logits, probs);
        double ce_u = 0.0;
        for (std::size_t y = 0; y < k; ++y) {
          ce_u += (lse - ws.class_logits[y]) / static_cast<double>(k);
        }
        loss += spec.lambda * inv_out * ce_u;
        if (grad) {
          const double w = spec.lambda * inv_out;
          for (std::size_t y = 0; y < k; ++y) {
            class_delta[y] = w * (probs[y] - 1.0 / static_cast<double>(k));
          }
          touch_class = true;
        }
        break;
      }
      case LossKind::BinaryBalanced: {
        loss += spec.lambda * inv_out * softplus(ws.disc_logit);
        if (grad) {
          disc_delta = spec.lambda * inv_out * stable_sigmoid(ws.disc_logit);
          touch_disc = true;
        }
        break;
      }
      case LossKind::BackgroundClass: {
        std::copy(ws.class_logits.begin(), ws.class_logits.end(), logits.begin());
        logits[k] = ws.disc_logit;
        const double lse = softmax_into({logits.data(), k + 1}, probs);
        loss += spec.lambda * inv_out * (lse - logits[k]);
        if (grad) {
          const double w = spec.lambda * inv_out;
          for (std::size_t y = 0; y < k; ++y) class_delta[y] = w * probs[y];
          disc_delta = w * (probs[k] - 1.0);
          touch_class = true;
          touch_disc = true;
        }
        break;
      }
      case LossKind::EnergyMargin: {
        const double lse = softmax_into(ws.class_logits, probs);
        const double energy = -lse;
        const double h_out = std::max(0.0, spec.margins.m_out - energy);
        if (h_out > 0.0) {
          loss += spec.lambda * inv_out * h_out * h_out;
          if (grad) {
            const double dloss_de = -2.0 * spec.lambda * inv_out * h_out;
            for (std::size_t y = 0; y < k; ++y) {
              class_delta[y] = -dloss_de * probs[y];
            }
            touch_class = true;
          }
        }
        break;
      }
      case LossKind::SharedCombo: {
        loss += spec.lambda * inv_out * softplus(ws.disc_logit);
        if (grad) {
          disc_delta = spec.lambda * inv_out * stable_sigmoid(ws.disc_logit);
          touch_disc = true;
        }
        break;
      }
    }
    if (grad && (touch_class || touch_disc)) {
      ws.backward(touch_class ? std::span<const double>(class_delta)
                              : std::span<const double>{},
                  disc_delta, touch_disc, *grad);
    }
  }
  return loss;
}

}  // namespace

double mlp_batch_loss(const SharedMLP& model, const MlpBatch& batch,
                      const LossSpec& spec) {
  return batch_loss_impl(model, batch, spec, nullptr);
}

double mlp_batch_loss_grad(const SharedMLP& model, const MlpBatch& batch,
                           const LossSpec& spec, std::vector<double>& grad) {
  grad.assign(model.parameter_count(), 0.0);
  return batch_loss_impl(model, batch, spec, &grad);
}

MlpTrainResult mlp_train(const OODScenario& scenario, const MlpArchitecture& arch,
                         const LossSpec& spec, const MlpTrainOptions& options) {
  arch.validate();
  spec.validate();
  if (!scenario.domain()->has_coordinates() ||
      scenario.domain()->coord_dim() != arch.input_dim) {
    throw ShapeMismatch("mlp_train: domain coordinates do not match input_dim");
  }
  if (arch.num_classes != scenario.num_classes()) {
    throw ShapeMismatch("mlp_train: architecture K != scenario K");
  }

  SharedMLP model(arch, options.seed);
  Rng rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  const std::vector<bool> labeled =
      labeled_subset(scenario, spec.labeled_fraction);

  std::vector<double> grad, velocity(model.parameter_count(), 0.0);
  std::vector<double> trajectory;
  const std::size_t total_steps = options.epochs * options.steps_per_epoch;
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (std::size_t s = 0; s < options.steps_per_epoch; ++s, ++step) {
      MlpBatch batch = sample_batch(scenario, options.batch_in,
                                    options.batch_out, labeled, rng);
      const double loss = mlp_batch_loss_grad(model, batch, spec, grad);
      if (!std::isfinite(loss)) {
        throw DivergenceDetected("mlp_train: non-finite batch loss at step " +
                                 std::to_string(step));
      }
      epoch_loss += loss;

      double lr = options.learning_rate;
      if (options.cosine_decay && total_steps > 1) {
        const double progress =
            static_cast<double>(step) / static_cast<double>(total_steps);
        lr *= 0.5 * (1.0 + std::cos(3.14159265358979323846 * progress));
      }
      auto& params = model.parameters();
      if (options.momentum > 0.0) {
        kern::scale(velocity.data(), options.momentum, velocity.size());
        kern::axpy(velocity.data(), grad.data(), -lr, grad.size());
        kern::axpy(params.data(), velocity.data(), 1.0, params.size());
      } else {
        kern::axpy(params.data(), grad.data(), -lr, grad.size());
      }
    }
    trajectory.push_back(epoch_loss /
                         static_cast<double>(options.steps_per_epoch));
  }
  return MlpTrainResult{std::move(model), std::move(trajectory)};
}

double grad_check_mlp(const SharedMLP& model, const MlpBatch& batch,
                      const LossSpec& spec, std::size_t n_probes, double epsilon,
                      std::uint64_t seed) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) {
    throw InvalidParams("grad_check: epsilon must lie in [1e-7, 1e-3]");
  }
  std::vector<double> analytic;
  mlp_batch_loss_grad(model, batch, spec, analytic);

  SharedMLP probe = model;
  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t i = 0; i < n_probes; ++i) {
    const std::size_t idx = rng.index(probe.parameter_count());
    const double saved = probe.parameters()[idx];
    probe.parameters()[idx] = saved + epsilon;
    const double up = mlp_batch_loss(probe, batch, spec);
    probe.parameters()[idx] = saved - epsilon;
    const double down = mlp_batch_loss(probe, batch, spec);
    probe.parameters()[idx] = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double a = analytic[idx];
    const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
    worst = std::max(worst, std::fabs(a - numeric) / denom);
  }
  return worst;
}

TabularLogits mlp_logit_table(const SharedMLP& model, const DomainPtr& domain,
                              const LossSpec& spec) {
  if (!domain->has_coordinates() ||
      domain->coord_dim() != model.architecture().input_dim) {
    throw ShapeMismatch("mlp_logit_table: domain coordinates mismatch");
  }
  const std::size_t k = model.architecture().num_classes;
  const std::size_t width = logit_width(spec.kind, k);
  TabularLogits table{domain, width, {}};
  table.values.resize(domain->size() * width);
  for (std::size_t x = 0; x < domain->size(); ++x) {
    const auto out = model.forward(domain->coords(x));
    auto row = table.row(x);
    if (spec.kind == LossKind::BinaryBalanced) {
      row[0] = out.disc_logit;
    } else {
      std::copy(out.class_logits.begin(), out.class_logits.end(), row.begin());
      if (width == k + 1) row[k] = out.disc_logit;
    }
  }
  return table;
}

std::map<std::string, ScoreVector> mlp_scores(const SharedMLP& model,
                                              const DomainPtr& domain,
                                              const LossSpec& spec) {
  return model_scores(mlp_logit_table(model, domain, spec), spec,
                      model.architecture().num_classes);
}

}  // namespace oodkit
