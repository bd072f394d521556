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

#ifndef DPZERO_AMP_PIPELINE_HPP_
#define DPZERO_AMP_PIPELINE_HPP_

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "dpzero/dp/clipping.hpp"
#include "dpzero/dp/noise.hpp"
#include "dpzero/dp/norms.hpp"
#include "dpzero/network/network.hpp"
#include "dpzero/numerics/precision.hpp"

namespace dpzero {

// Loss-scaling step sequences for mixed-precision training. Steps:
//   1 forward, 2 scale loss by S, 3 backward, 4 per-sample clip + noise
//   (4s: clipping threshold multiplied by S), 5 divide gradient by S,
//   6 update.
enum class Variant { Std136, Std12356, Dp123456, Dp1234s56, Dp1346, Dp12346 };

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view name);

struct StepFlags {
  bool scale_loss = false;        // step 2
  bool clip_and_noise = false;    // step 4
  bool scaled_threshold = false;  // step 4s
  bool scale_down = false;        // step 5
};

StepFlags steps_of(Variant v);

struct ScalingPipeline {
  Variant variant = Variant::Dp1346;
  double scale = 1.0;  // S

  StepFlags steps() const { return steps_of(variant); }
  bool is_private() const { return steps().clip_and_noise; }
  double loss_scale() const { return steps().scale_loss ? scale : 1.0; }
  double threshold_scale() const { return steps().scaled_threshold ? scale : 1.0; }
  double unscale() const { return steps().scale_down ? scale : 1.0; }

  // S >= 1.
  void validate() const;

  friend bool operator==(const ScalingPipeline&, const ScalingPipeline&) = default;
};

struct FlowStatus {
  bool overflow = false;          // any infinity produced; sticky within a step
  double underflow_fraction = 0;  // nonzero full-precision entries rounded to zero

  void merge(const FlowStatus& other);
};

// Per-layer clipping state for one micro-batch during back-propagation.
//
// In streaming mode (standard variants, or one layer per clipping group) a
// layer's clipped parameter gradient is available as soon as its output
// gradient is known. Otherwise output gradients are book-kept until every
// layer has reported, the group norms are formed and the factors applied.
class ClippedBackward {
 public:
  ClippedBackward(const ScalingPipeline& pipeline, const NetworkSpec& spec, const ClipPlan& plan,
                  Precision precision, Index samples, DispatchRule rule = ghost_dispatch);

  bool streams() const { return streams_; }

  // Records dL/ds_l (already scaled by the loss scale) together with a_l.
  // Returns the clipped parameter gradient of layer l in streaming mode.
  std::optional<ParamGrad> on_output_grad(Index layer, const RowMatrix& input, RowMatrix grad_s);

  // Book-keeping mode: once every layer has reported, the clipped parameter
  // gradient of `layer`.
  ParamGrad layer_grad(Index layer);

  const PerSampleNorms& norms() const { return norms_; }
  const Eigen::MatrixXd& factors() const { return factors_; }
  const FlowStatus& flow() const { return flow_; }

 private:
  void ensure_factors();

  ScalingPipeline pipeline_;
  const NetworkSpec& spec_;
  const ClipPlan& plan_;
  Precision precision_;
  Index samples_;
  DispatchRule rule_;
  bool streams_;
  std::vector<std::optional<LayerNorms>> layer_norms_;
  std::vector<RowMatrix> inputs_;
  std::vector<RowMatrix> grads_;
  PerSampleNorms norms_;
  Eigen::MatrixXd factors_;
  bool factors_ready_ = false;
  FlowStatus flow_;
};

// Clipped, not yet noised, gradient sum of one micro-batch.
struct MicroBatchGradient {
  std::vector<RowMatrix> sums;  // per parameter slot; 0 x 0 for frozen slots
  Vector losses;
  PerSampleNorms norms;
  Eigen::MatrixXd factors;
  FlowStatus flow;
};

// Steps 1-4 (without noise) on one micro-batch. `params` must already be
// rounded to `precision`.
MicroBatchGradient clipped_gradient(const ScalingPipeline& pipeline, const NetworkSpec& spec,
                                    const Parameters& params, const Batch& batch,
                                    const ClipPlan& plan, Precision precision,
                                    bool checkpointing = false, DispatchRule rule = ghost_dispatch);

struct PipelineResult {
  std::vector<RowMatrix> gradient;  // per slot, master precision, ready for step 6
  Vector losses;
  PerSampleNorms norms;
  Eigen::MatrixXd factors;
  FlowStatus flow;
};

// Runs the variant's steps on a single device. Noise for slot k is drawn from
// noise.stream(0, step, k). In F64 no rounding occurs, isolating the pipeline
// algebra. Underflow is measured against the same pipeline run in F64.
PipelineResult run_pipeline(const ScalingPipeline& pipeline, const NetworkSpec& spec,
                            const Parameters& params, const Batch& batch, const ClipPlan& plan,
                            const NoisePolicy& noise, Precision precision,
                            std::uint64_t step = 0);

// Builds the ghost-norm Gram matrices a_i a_i^T and g_i g_i^T in `precision`
// and reports whether any entry (or their inner product) overflowed.
FlowStatus detect_overflow_in_ghost_terms(const RowMatrix& a, const RowMatrix& grad_s_scaled,
                                          Index tokens, Precision precision);

// Fraction of entries nonzero in `reference` that are exactly zero in
// `emulated`; 0 when the reference has no nonzero entries.
double underflow_fraction(const std::vector<RowMatrix>& reference,
                          const std::vector<RowMatrix>& emulated);

}  // namespace dpzero

#endif  // DPZERO_AMP_PIPELINE_HPP_
