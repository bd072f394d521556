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

#include "dpzero/network/network.hpp"

#include <cmath>
#include <string>

#include "dpzero/errors.hpp"
#include "dpzero/numerics/matmul.hpp"
#include "dpzero/numerics/rng.hpp"

namespace dpzero {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::ReLU: return "relu";
    case Activation::Tanh: return "tanh";
  }
  return "identity";
}

std::optional<Activation> parse_activation(std::string_view name) {
  if (name == "identity") return Activation::Identity;
  if (name == "relu") return Activation::ReLU;
  if (name == "tanh") return Activation::Tanh;
  return std::nullopt;
}

std::string_view to_string(LossKind l) {
  return l == LossKind::SquaredError ? "squared_error" : "cross_entropy";
}

std::optional<LossKind> parse_loss(std::string_view name) {
  if (name == "squared_error") return LossKind::SquaredError;
  if (name == "cross_entropy") return LossKind::CrossEntropy;
  return std::nullopt;
}

Index NetworkSpec::model_params() const {
  Index total = 0;
  for (const auto& l : layers) total += l.param_count();
  return total;
}

Index NetworkSpec::trainable_params() const {
  Index total = 0;
  for (const auto& l : layers) total += l.trainable_count();
  return total;
}

void NetworkSpec::validate() const {
  if (layers.empty()) throw ContractViolation("network has no layers");
  if (tokens <= 0) throw ContractViolation("token length must be positive");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].d_in <= 0 || layers[l].d_out <= 0) {
      throw ContractViolation("layer " + std::to_string(l) + " has a non-positive width");
    }
    if (l > 0 && layers[l].d_in != layers[l - 1].d_out) {
      throw ContractViolation("layer " + std::to_string(l) + " input width " +
                              std::to_string(layers[l].d_in) + " != previous output width " +
                              std::to_string(layers[l - 1].d_out));
    }
  }
}

Parameters init_parameters(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  Parameters params;
  params.reserve(spec.layers.size());
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const LayerSpec& layer = spec.layers[l];
    RngStream rng(seed, {0, Purpose::Init, 0, l});
    LayerParams p;
    p.weight = gaussian(rng, layer.d_in, layer.d_out, 1.0 / std::sqrt(double(layer.d_in)));
    p.bias = gaussian(rng, 1, layer.d_out, 0.1);
    params.push_back(std::move(p));
  }
  return params;
}

Parameters round_to(const Parameters& params, Precision p) {
  Parameters out = params;
  for (auto& layer : out) {
    round_in_place(layer.weight, p);
    round_in_place(layer.bias, p);
  }
  return out;
}

RowMatrix layer_forward(const LayerParams& p, const RowMatrix& a, Precision precision) {
  if (a.cols() != p.weight.rows()) {
    throw ContractViolation("layer input width " + std::to_string(a.cols()) +
                            " != weight rows " + std::to_string(p.weight.rows()));
  }
  const Precision acc = default_accumulate(precision);
  RowMatrix s = matmul(a, p.weight, acc, acc);
  s.rowwise() += p.bias;
  round_in_place(s, precision);
  return s;
}

RowMatrix activate(Activation act, const RowMatrix& s, Precision precision) {
  switch (act) {
    case Activation::Identity:
      return s;
    case Activation::ReLU:
      return s.cwiseMax(0.0);
    case Activation::Tanh:
      return round_to(s.array().tanh().matrix(), precision);
  }
  return s;
}

RowMatrix activation_derivative(Activation act, const RowMatrix& s, Precision precision) {
  switch (act) {
    case Activation::Identity:
      return RowMatrix::Ones(s.rows(), s.cols());
    case Activation::ReLU:
      return (s.array() > 0.0).cast<double>().matrix();
    case Activation::Tanh: {
      const RowMatrix t = round_to(s.array().tanh().matrix(), precision);
      return round_to((1.0 - t.array().square()).matrix(), precision);
    }
  }
  return RowMatrix::Ones(s.rows(), s.cols());
}

ForwardResult forward(const NetworkSpec& spec, const Parameters& params, const Batch& batch,
                      Precision precision, bool checkpointing) {
  spec.validate();
  if (params.size() != spec.layers.size()) {
    throw ContractViolation("parameter list does not match network depth");
  }
  if (batch.inputs.rows() != batch.samples * spec.tokens ||
      batch.inputs.cols() != spec.input_dim()) {
    throw ContractViolation("batch input shape does not match [B, T, d_0]");
  }

  ForwardResult result;
  ActivationCache& cache = result.cache;
  cache.samples = batch.samples;
  cache.tokens = spec.tokens;
  cache.precision = precision;
  cache.checkpointed = checkpointing;

  RowMatrix a = round_to(batch.inputs, precision);
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    RowMatrix s = layer_forward(params[l], a, precision);
    RowMatrix next = activate(spec.layers[l].activation, s, precision);
    cache.inputs.push_back(std::move(a));
    if (!checkpointing) cache.pre_activations.push_back(std::move(s));
    a = std::move(next);
  }
  cache.output = std::move(a);
  result.losses = per_sample_losses(spec, cache.output, batch, precision);
  if (precision == Precision::F64 && !result.losses.allFinite()) {
    throw NumericFault("non-finite per-sample loss in F64 forward pass");
  }
  return result;
}

RowMatrix pre_activation(const NetworkSpec& spec, const Parameters& params,
                         const ActivationCache& cache, Index layer) {
  if (layer < 0 || layer >= spec.depth() || static_cast<Index>(cache.inputs.size()) <= layer) {
    throw ContractViolation("activation cache does not cover layer " + std::to_string(layer));
  }
  if (!cache.checkpointed) return cache.pre_activations[layer];
  return layer_forward(params[layer], cache.inputs[layer], cache.precision);
}

Vector per_sample_losses(const NetworkSpec& spec, const RowMatrix& output, const Batch& batch,
                         Precision precision) {
  const Index T = spec.tokens;
  Vector losses = Vector::Zero(batch.samples);
  if (spec.loss == LossKind::SquaredError) {
    if (batch.targets.rows() != output.rows() || batch.targets.cols() != output.cols()) {
      throw ContractViolation("regression targets do not match output shape");
    }
    for (Index i = 0; i < batch.samples; ++i) {
      losses[i] = 0.5 * (sample_rows(output, i, T) - sample_rows(batch.targets, i, T)).squaredNorm();
    }
  } else {
    if (static_cast<Index>(batch.labels.size()) != output.rows()) {
      throw ContractViolation("class labels do not match output rows");
    }
    for (Index r = 0; r < output.rows(); ++r) {
      const int label = batch.labels[r];
      if (label < 0 || label >= output.cols()) throw ContractViolation("class label out of range");
      const double m = output.row(r).maxCoeff();
      const double lse = m + std::log((output.row(r).array() - m).exp().sum());
      losses[r / T] += lse - output(r, label);
    }
  }
  return round_to(losses, master_precision(precision));
}

RowMatrix loss_output_grad(const NetworkSpec& spec, const Parameters& params,
                           const ActivationCache& cache, const Batch& batch, double scale) {
  if (cache.inputs.size() != spec.layers.size()) {
    throw ContractViolation("loss gradient requested without a forward cache");
  }
  const Precision working = cache.precision;
  const Precision loss_precision = master_precision(working);
  const RowMatrix& out = cache.output;

  RowMatrix grad_a;
  if (spec.loss == LossKind::SquaredError) {
    grad_a = out - batch.targets;
  } else {
    grad_a.resize(out.rows(), out.cols());
    for (Index r = 0; r < out.rows(); ++r) {
      const double m = out.row(r).maxCoeff();
      const auto e = (out.row(r).array() - m).exp();
      grad_a.row(r) = (e / e.sum()).matrix();
      grad_a(r, batch.labels[r]) -= 1.0;
    }
  }
  round_in_place(grad_a, loss_precision);
  if (scale != 1.0) {
    grad_a *= round_to(scale, loss_precision);
    round_in_place(grad_a, loss_precision);
  }

  const Index top = spec.depth() - 1;
  const RowMatrix s = pre_activation(spec, params, cache, top);
  RowMatrix g = grad_a.cwiseProduct(activation_derivative(spec.layers[top].activation, s, working));
  round_in_place(g, working);
  return g;
}

RowMatrix propagate_output_grad(const LayerSpec& below, const LayerParams& above,
                                const RowMatrix& grad_above, const RowMatrix& s_below,
                                Precision precision) {
  const Precision acc = default_accumulate(precision);
  RowMatrix da = matmul(grad_above, above.weight.transpose(), acc, precision);
  RowMatrix g = da.cwiseProduct(activation_derivative(below.activation, s_below, precision));
  round_in_place(g, precision);
  return g;
}

std::vector<RowMatrix> backward_output_grads(const NetworkSpec& spec, const Parameters& params,
                                             const ActivationCache& cache,
                                             const RowMatrix& top_grad) {
  if (cache.inputs.size() != spec.layers.size()) {
    throw ContractViolation("backward requested without a forward cache");
  }
  const Index L = spec.depth();
  std::vector<RowMatrix> grads(L);
  grads[L - 1] = top_grad;
  for (Index l = L - 2; l >= 0; --l) {
    const RowMatrix s = pre_activation(spec, params, cache, l);
    grads[l] = propagate_output_grad(spec.layers[l], params[l + 1], grads[l + 1], s,
                                     cache.precision);
  }
  return grads;
}

std::vector<ParamSlot> param_slots(const NetworkSpec& spec) {
  std::vector<ParamSlot> slots;
  for (Index l = 0; l < spec.depth(); ++l) {
    const LayerSpec& layer = spec.layers[l];
    slots.push_back({l, false, layer.d_in, layer.d_out, layer.train_weight});
    slots.push_back({l, true, 1, layer.d_out, layer.train_bias});
  }
  return slots;
}

std::string slot_name(const ParamSlot& slot) {
  return (slot.is_bias ? "b" : "W") + std::to_string(slot.layer);
}

std::vector<RowMatrix> to_slots(const Parameters& params) {
  std::vector<RowMatrix> slots;
  for (const auto& p : params) {
    slots.push_back(p.weight);
    slots.push_back(p.bias);
  }
  return slots;
}

Parameters from_slots(const NetworkSpec& spec, const std::vector<RowMatrix>& slots) {
  if (static_cast<Index>(slots.size()) != 2 * spec.depth()) {
    throw ContractViolation("slot list does not match network depth");
  }
  Parameters params(spec.layers.size());
  for (std::size_t l = 0; l < params.size(); ++l) {
    params[l].weight = slots[2 * l];
    params[l].bias = slots[2 * l + 1].row(0);
  }
  return params;
}

ParamGrad param_grad(const RowMatrix& a, const RowMatrix& grad_s, const Vector& scale_per_sample,
                     Index tokens, Precision precision) {
  const Index B = scale_per_sample.size();
  if (a.rows() != B * tokens || grad_s.rows() != B * tokens) {
    throw ContractViolation("param_grad: activation/gradient rows do not match B*T");
  }
  RowMatrix scaled = grad_s;
  for (Index i = 0; i < B; ++i) sample_rows(scaled, i, tokens) *= scale_per_sample[i];
  round_in_place(scaled, precision);

  const Precision acc = default_accumulate(precision);
  ParamGrad g;
  g.weight = matmul(a.transpose(), scaled, acc, precision);
  if (acc == Precision::F64) {
    g.bias = scaled.colwise().sum();
  } else {
    g.bias = RowVector::Zero(scaled.cols());
    for (Index c = 0; c < scaled.cols(); ++c) {
      double sum = 0.0;
      for (Index r = 0; r < scaled.rows(); ++r) sum = round_to(sum + scaled(r, c), acc);
      g.bias[c] = sum;
    }
  }
  round_in_place(g.bias, precision);
  return g;
}

}  // namespace dpzero
