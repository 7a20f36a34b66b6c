// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "oodkit/domain.hpp"
#include "oodkit/scores.hpp"
#include "oodkit/train.hpp"

namespace oodkit {

enum class Activation { Tanh, Relu };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct MlpArchitecture {
  std::size_t input_dim = 2;
  std::vector<std::size_t> hidden = {64, 64};
  std::size_t num_classes = 2;
  Activation activation = Activation::Tanh;
  void validate() const;
};

/// Shared-trunk MLP with a K-logit classifier head and a 1-logit
/// discriminator head. Parameters live in one flat vector so gradient
/// checking and SGD updates can treat the model as a plain vector.
class SharedMLP {
 public:
  SharedMLP(MlpArchitecture arch, std::uint64_t seed);

  const MlpArchitecture& architecture() const { return arch_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }

  struct Output {
    std::vector<double> class_logits;
    double disc_logit = 0.0;
  };

  /// Deterministic forward pass for a single input.
  Output forward(std::span<const double> input) const;

 private:
  friend struct MlpWorkspace;
  MlpArchitecture arch_;
  std::vector<std::size_t> layer_sizes_;    // input, hidden..., trunk output
  std::vector<std::size_t> weight_offset_;  // per trunk layer
  std::vector<std::size_t> bias_offset_;
  std::size_t class_w_ = 0, class_b_ = 0;   // head offsets
  std::size_t disc_w_ = 0, disc_b_ = 0;
  std::vector<double> params_;
};

/// One sampled mini-batch: in-points (with labels and labeled flags) and
/// out-points, both as coordinate rows.
struct MlpBatch {
  std::size_t input_dim = 0;
  std::vector<double> in_coords;    // n_in * input_dim
  std::vector<std::size_t> in_labels;
  std::vector<bool> in_labeled;
  std::vector<double> out_coords;   // n_out * input_dim
  std::size_t in_count() const { return in_labels.size(); }
  std::size_t out_count() const {
    return input_dim == 0 ? 0 : out_coords.size() / input_dim;
  }
};

/// Draws a batch from the scenario's distributions; labels follow p(y|x,i)
/// and the labeled flags follow the deterministic labeled subset.
MlpBatch sample_batch(const OODScenario& scenario, std::size_t n_in,
                      std::size_t n_out, const std::vector<bool>& labeled,
                      Rng& rng);

/// Mini-batch loss: sample means of the same per-sample terms the tabular
/// losses integrate exactly (in-terms averaged over the in-batch, out-terms
/// averaged over the out-batch and scaled by lambda).
double mlp_batch_loss(const SharedMLP& model, const MlpBatch& batch,
                      const LossSpec& spec);

/// Batch loss and parameter gradient via backpropagation.
double mlp_batch_loss_grad(const SharedMLP& model, const MlpBatch& batch,
                           const LossSpec& spec, std::vector<double>& grad);

struct MlpTrainOptions {
  std::size_t epochs = 40;
  std::size_t steps_per_epoch = 100;
  std::size_t batch_in = 128;
  std::size_t batch_out = 256;  // 2:1 out-to-in default
  double learning_rate = 0.1;
  double momentum = 0.9;
  bool cosine_decay = true;
  std::uint64_t seed = 0;
};

struct MlpTrainResult {
  SharedMLP model;
  std::vector<double> loss_trajectory;  // mean loss per epoch
};

/// Mini-batch SGD on a scenario sampler. Deterministic per seed. Requires
/// domain coordinates matching the architecture's input dimension.
MlpTrainResult mlp_train(const OODScenario& scenario, const MlpArchitecture& arch,
                         const LossSpec& spec, const MlpTrainOptions& options);

/// Central-difference check of the backprop gradient on one fixed batch.
double grad_check_mlp(const SharedMLP& model, const MlpBatch& batch,
                      const LossSpec& spec, std::size_t n_probes, double epsilon,
                      std::uint64_t seed);

/// Evaluate the model on every domain point and emit the named scores the
/// loss kind supports (same keys as oracle_scores / model_scores).
std::map<std::string, ScoreVector> mlp_scores(const SharedMLP& model,
                                              const DomainPtr& domain,
                                              const LossSpec& spec);

/// Model logits across the domain as a TabularLogits view (class logits plus
/// disc logit where the kind has one).
TabularLogits mlp_logit_table(const SharedMLP& model, const DomainPtr& domain,
                              const LossSpec& spec);

}  // namespace oodkit
