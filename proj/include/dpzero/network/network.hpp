// Copyright 2026 The dpzero Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPZERO_NETWORK_NETWORK_HPP_
#define DPZERO_NETWORK_NETWORK_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpzero/numerics/precision.hpp"
#include "dpzero/numerics/types.hpp"

namespace dpzero {

enum class Activation { Identity, ReLU, Tanh };
enum class LossKind { SquaredError, CrossEntropy };

std::string_view to_string(Activation a);
std::optional<Activation> parse_activation(std::string_view name);
std::string_view to_string(LossKind l);
std::optional<LossKind> parse_loss(std::string_view name);

// One linear layer s = a W + b followed by an elementwise activation.
struct LayerSpec {
  Index d_in = 0;
  Index d_out = 0;
  Activation activation = Activation::Identity;
  bool train_weight = true;
  bool train_bias = true;

  Index weight_size() const { return d_in * d_out; }
  Index param_count() const { return weight_size() + d_out; }
  Index trainable_count() const {
    return (train_weight ? weight_size() : 0) + (train_bias ? d_out : 0);
  }
  bool trainable() const { return train_weight || train_bias; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct NetworkSpec {
  std::vector<LayerSpec> layers;
  LossKind loss = LossKind::SquaredError;
  Index tokens = 1;  // T; linear layers keep it unchanged

  Index depth() const { return static_cast<Index>(layers.size()); }
  Index input_dim() const { return layers.front().d_in; }
  Index output_dim() const { return layers.back().d_out; }
  // Psi_model and Psi_train.
  Index model_params() const;
  Index trainable_params() const;

  // Throws ContractViolation on empty stacks, mismatched widths or T <= 0.
  void validate() const;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

struct LayerParams {
  RowMatrix weight;  // d_in x d_out
  RowVector bias;    // d_out
};
using Parameters = std::vector<LayerParams>;

// W ~ N(0, 1/d_in), b ~ N(0, 0.1^2), drawn from the Init stream of `seed`.
Parameters init_parameters(const NetworkSpec& spec, std::uint64_t seed);
Parameters round_to(const Parameters& params, Precision p);

// A micro-batch of `samples` sequences of spec.tokens tokens, token-major.
struct Batch {
  RowMatrix inputs;         // (B*T) x d_0
  RowMatrix targets;        // squared error: (B*T) x p_L
  std::vector<int> labels;  // cross-entropy: one class per token
  Index samples = 0;
};

// Forward state kept for back-propagation. With checkpointing only the layer
// inputs a_l survive; pre-activations s_l are recomputed on demand.
struct ActivationCache {
  Index samples = 0;
  Index tokens = 0;
  Precision precision = Precision::F64;
  bool checkpointed = false;
  std::vector<RowMatrix> inputs;           // a_0 .. a_{L-1}
  std::vector<RowMatrix> pre_activations;  // s_0 .. s_{L-1}, empty when checkpointed
  RowMatrix output;                        // a_L
};

struct ForwardResult {
  Vector losses;  // L_i per sample
  ActivationCache cache;
};

struct ParamGrad {
  RowMatrix weight;
  RowVector bias;
};

// Parameter tensors in a fixed order: W_0, b_0, W_1, b_1, ... Slot 2l is the
// weight of layer l, slot 2l+1 its bias (stored as a 1 x p matrix).
struct ParamSlot {
  Index layer = 0;
  bool is_bias = false;
  Index rows = 0;
  Index cols = 0;
  bool trainable = false;

  Index size() const { return rows * cols; }
};

std::vector<ParamSlot> param_slots(const NetworkSpec& spec);
std::string slot_name(const ParamSlot& slot);

// Parameters as per-slot row-major matrices and back.
std::vector<RowMatrix> to_slots(const Parameters& params);
Parameters from_slots(const NetworkSpec& spec, const std::vector<RowMatrix>& slots);

RowMatrix layer_forward(const LayerParams& p, const RowMatrix& a, Precision precision);
RowMatrix activate(Activation act, const RowMatrix& s, Precision precision);
RowMatrix activation_derivative(Activation act, const RowMatrix& s, Precision precision);

// Runs the stack on `batch` with parameters already rounded to `precision`.
// Throws NumericFault if a loss is non-finite in F64.
ForwardResult forward(const NetworkSpec& spec, const Parameters& params, const Batch& batch,
                      Precision precision, bool checkpointing = false);

// s_l from the cache, recomputed from a_l when checkpointed.
RowMatrix pre_activation(const NetworkSpec& spec, const Parameters& params,
                         const ActivationCache& cache, Index layer);

Vector per_sample_losses(const NetworkSpec& spec, const RowMatrix& output, const Batch& batch,
                         Precision precision);

// S * dL/ds_{L-1}, with the loss side evaluated in master precision and the
// result rounded to the working precision.
RowMatrix loss_output_grad(const NetworkSpec& spec, const Parameters& params,
                           const ActivationCache& cache, const Batch& batch, double scale = 1.0);

// dL/ds_l = (dL/ds_{l+1} W_{l+1}^T) o phi_l'(s_l).
RowMatrix propagate_output_grad(const LayerSpec& below, const LayerParams& above,
                                const RowMatrix& grad_above, const RowMatrix& s_below,
                                Precision precision);

// dL/ds_l for every layer, from dL/ds_{L-1} = top_grad.
std::vector<RowMatrix> backward_output_grads(const NetworkSpec& spec, const Parameters& params,
                                             const ActivationCache& cache,
                                             const RowMatrix& top_grad);

// gW = a^T diag(c) g and gb = 1^T diag(c) g, where c repeats each sample's
// scale over its tokens.
ParamGrad param_grad(const RowMatrix& a, const RowMatrix& grad_s, const Vector& scale_per_sample,
                     Index tokens, Precision precision = Precision::F64);

}  // namespace dpzero

#endif  // DPZERO_NETWORK_NETWORK_HPP_
