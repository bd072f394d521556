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

#include "dpzero/amp/pipeline.hpp"

#include <cmath>
#include <string>

#include "dpzero/errors.hpp"
#include "dpzero/numerics/matmul.hpp"

namespace dpzero {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Std136: return "std-136";
    case Variant::Std12356: return "std-12356";
    case Variant::Dp123456: return "dp-123456";
    case Variant::Dp1234s56: return "dp-1234s56";
    case Variant::Dp1346: return "dp-1346";
    case Variant::Dp12346: return "dp-12346";
  }
  return "dp-1346";
}

std::optional<Variant> parse_variant(std::string_view name) {
  for (Variant v : {Variant::Std136, Variant::Std12356, Variant::Dp123456, Variant::Dp1234s56,
                    Variant::Dp1346, Variant::Dp12346}) {
    if (name == to_string(v)) return v;
  }
  return std::nullopt;
}

StepFlags steps_of(Variant v) {
  switch (v) {
    case Variant::Std136: return {false, false, false, false};
    case Variant::Std12356: return {true, false, false, true};
    case Variant::Dp123456: return {true, true, false, true};
    case Variant::Dp1234s56: return {true, true, true, true};
    case Variant::Dp1346: return {false, true, false, false};
    case Variant::Dp12346: return {true, true, false, false};
  }
  return {};
}

void ScalingPipeline::validate() const {
  if (!(scale >= 1.0) || !std::isfinite(scale)) {
    throw ContractViolation("loss scale must be a finite value >= 1");
  }
}

void FlowStatus::merge(const FlowStatus& other) {
  overflow = overflow || other.overflow;
  underflow_fraction = std::max(underflow_fraction, other.underflow_fraction);
}

ClippedBackward::ClippedBackward(const ScalingPipeline& pipeline, const NetworkSpec& spec,
                                 const ClipPlan& plan, Precision precision, Index samples,
                                 DispatchRule rule)
    : pipeline_(pipeline),
      spec_(spec),
      plan_(plan),
      precision_(precision),
      samples_(samples),
      rule_(rule),
      streams_(!pipeline.is_private() || plan.streams_per_layer()),
      layer_norms_(spec.layers.size()),
      inputs_(spec.layers.size()),
      grads_(spec.layers.size()) {
  pipeline_.validate();
  if (pipeline_.is_private()) plan_.validate(spec_);
}

std::optional<ParamGrad> ClippedBackward::on_output_grad(Index layer, const RowMatrix& input,
                                                         RowMatrix grad_s) {
  const LayerSpec& spec = spec_.layers[layer];
  if (has_infinity(grad_s)) flow_.overflow = true;
  if (!spec.trainable()) return std::nullopt;

  if (!pipeline_.is_private()) {
    ParamGrad g = param_grad(input, grad_s, Vector::Ones(samples_), spec_.tokens, precision_);
    if (has_infinity(g.weight) || has_infinity(g.bias)) flow_.overflow = true;
    return g;
  }

  LayerNorms ln = layer_norms(spec, input, grad_s, spec_.tokens, precision_, rule_);
  if (has_infinity(ln.squared)) flow_.overflow = true;
  layer_norms_[layer] = std::move(ln);

  if (!streams_) {
    inputs_[layer] = input;
    grads_[layer] = std::move(grad_s);
    return std::nullopt;
  }
  const int group = plan_.group_of_layer[layer];
  const Vector c = clip_factors_for_group(layer_norms_[layer]->squared, plan_, group,
                                          pipeline_.threshold_scale(), precision_);
  if (factors_.size() == 0) {
    factors_ = Eigen::MatrixXd::Ones(samples_, plan_.groups());
    norms_.squared = Eigen::MatrixXd::Zero(samples_, plan_.groups());
    norms_.methods.assign(spec_.layers.size(), NormMethod::Ghost);
  }
  factors_.col(group) = c;
  norms_.squared.col(group) = layer_norms_[layer]->squared;
  norms_.methods[layer] = layer_norms_[layer]->method;
  ParamGrad g = param_grad(input, grad_s, c, spec_.tokens, precision_);
  if (has_infinity(g.weight) || has_infinity(g.bias)) flow_.overflow = true;
  return g;
}

void ClippedBackward::ensure_factors() {
  if (factors_ready_) return;
  std::vector<LayerNorms> all(spec_.layers.size());
  for (std::size_t l = 0; l < all.size(); ++l) {
    if (spec_.layers[l].trainable()) {
      if (!layer_norms_[l]) {
        throw ContractViolation("layer " + std::to_string(l) +
                                " has not reported its output gradient");
      }
      all[l] = *layer_norms_[l];
    } else {
      all[l].squared = Vector::Zero(samples_);
    }
  }
  norms_ = aggregate_norms(plan_, all);
  factors_ = clip_factors(norms_, plan_, pipeline_.threshold_scale(), precision_);
  factors_ready_ = true;
}

ParamGrad ClippedBackward::layer_grad(Index layer) {
  if (streams_) throw ContractViolation("layer_grad is only used when book-keeping");
  ensure_factors();
  const int group = plan_.group_of_layer[layer];
  ParamGrad g = param_grad(inputs_[layer], grads_[layer], factors_.col(group), spec_.tokens,
                           precision_);
  if (has_infinity(g.weight) || has_infinity(g.bias)) flow_.overflow = true;
  return g;
}

namespace {

void store_layer_grad(const LayerSpec& layer, Index l, ParamGrad g, std::vector<RowMatrix>& sums) {
  if (layer.train_weight) sums[2 * l] = std::move(g.weight);
  if (layer.train_bias) sums[2 * l + 1] = g.bias;
}

}  // namespace

MicroBatchGradient clipped_gradient(const ScalingPipeline& pipeline, const NetworkSpec& spec,
                                    const Parameters& params, const Batch& batch,
                                    const ClipPlan& plan, Precision precision, bool checkpointing,
                                    DispatchRule rule) {
  ForwardResult fwd = forward(spec, params, batch, precision, checkpointing);
  MicroBatchGradient out;
  out.losses = fwd.losses;
  out.sums.resize(2 * spec.layers.size());
  if (has_infinity(fwd.cache.output)) out.flow.overflow = true;

  ClippedBackward backward(pipeline, spec, plan, precision, batch.samples, rule);
  RowMatrix g = loss_output_grad(spec, params, fwd.cache, batch, pipeline.loss_scale());
  const Index L = spec.depth();
  for (Index l = L - 1; l >= 0; --l) {
    RowMatrix below;
    if (l > 0) {
      below = propagate_output_grad(spec.layers[l - 1], params[l], g,
                                    pre_activation(spec, params, fwd.cache, l - 1), precision);
    }
    if (auto grad = backward.on_output_grad(l, fwd.cache.inputs[l], std::move(g))) {
      store_layer_grad(spec.layers[l], l, std::move(*grad), out.sums);
    }
    g = std::move(below);
  }
  if (!backward.streams()) {
    for (Index l = 0; l < L; ++l) {
      if (spec.layers[l].trainable()) store_layer_grad(spec.layers[l], l, backward.layer_grad(l), out.sums);
    }
  }
  out.norms = backward.norms();
  out.factors = backward.factors();
  out.flow.merge(backward.flow());
  return out;
}

double underflow_fraction(const std::vector<RowMatrix>& reference,
                          const std::vector<RowMatrix>& emulated) {
  Index nonzero = 0;
  Index lost = 0;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    for (Index i = 0; i < reference[k].size(); ++i) {
      if (reference[k].data()[i] == 0.0) continue;
      ++nonzero;
      if (emulated[k].data()[i] == 0.0) ++lost;
    }
  }
  return nonzero == 0 ? 0.0 : static_cast<double>(lost) / static_cast<double>(nonzero);
}

PipelineResult run_pipeline(const ScalingPipeline& pipeline, const NetworkSpec& spec,
                            const Parameters& params, const Batch& batch, const ClipPlan& plan,
                            const NoisePolicy& noise, Precision precision, std::uint64_t step) {
  pipeline.validate();
  const Parameters working = round_to(params, precision);
  MicroBatchGradient mb = clipped_gradient(pipeline, spec, working, batch, plan, precision);

  const Precision master = master_precision(precision);
  const auto slots = param_slots(spec);
  PipelineResult result;
  result.gradient.resize(slots.size());
  for (std::size_t k = 0; k < slots.size(); ++k) {
    if (!slots[k].trainable) continue;
    RowMatrix g = mb.sums[k];
    if (pipeline.is_private()) {
      RngStream rng = noise.stream(0, step, k);
      g = add_gaussian_noise(g, noise.full_std() * pipeline.threshold_scale(), rng, precision);
    }
    round_in_place(g, master);
    if (pipeline.steps().scale_down) {
      g /= pipeline.scale;
      round_in_place(g, master);
    }
    if (has_infinity(g)) mb.flow.overflow = true;
    result.gradient[k] = std::move(g);
  }
  result.losses = std::move(mb.losses);
  result.norms = std::move(mb.norms);
  result.factors = std::move(mb.factors);
  result.flow = mb.flow;

  bool finite_params = true;
  for (const LayerParams& layer : params) {
    finite_params = finite_params && layer.weight.allFinite() && layer.bias.allFinite();
  }
  if (precision != Precision::F64 && finite_params && !result.flow.overflow) {
    const PipelineResult reference =
        run_pipeline(pipeline, spec, params, batch, plan, noise, Precision::F64, step);
    result.flow.underflow_fraction = underflow_fraction(reference.gradient, result.gradient);
  }
  return result;
}

FlowStatus detect_overflow_in_ghost_terms(const RowMatrix& a, const RowMatrix& grad_s_scaled,
                                          Index tokens, Precision precision) {
  const Index B = detail::checked_samples(a, grad_s_scaled, tokens);
  const Precision acc = default_accumulate(precision);
  const RowMatrix a_w = round_to(a, precision);
  const RowMatrix g_w = round_to(grad_s_scaled, precision);
  FlowStatus status;
  for (Index i = 0; i < B; ++i) {
    const auto ai = sample_rows(a_w, i, tokens);
    const auto gi = sample_rows(g_w, i, tokens);
    const RowMatrix gram_a = matmul(ai, ai.transpose(), acc, precision);
    const RowMatrix gram_g = matmul(gi, gi.transpose(), acc, precision);
    const double dot = round_to(frobenius_dot(gram_a, gram_g, acc), precision);
    if (has_infinity(gram_a) || has_infinity(gram_g) || !std::isfinite(dot)) status.overflow = true;
  }
  return status;
}

}  // namespace dpzero
