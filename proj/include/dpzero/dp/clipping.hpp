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

#ifndef DPZERO_DP_CLIPPING_HPP_
#define DPZERO_DP_CLIPPING_HPP_

#include <optional>
#include <string_view>
#include <vector>

#include "dpzero/dp/norms.hpp"
#include "dpzero/network/network.hpp"
#include "dpzero/numerics/types.hpp"

namespace dpzero {

enum class ClipFunction { Vanilla, Automatic };
enum class Partition { AllLayer, LayerWise, Custom };

std::string_view to_string(ClipFunction f);
std::optional<ClipFunction> parse_clip_function(std::string_view name);
std::string_view to_string(Partition p);
std::optional<Partition> parse_partition(std::string_view name);

// Mathematical partition of the trainable parameters into M clipping groups,
// with one threshold R_m per group.
//
//   Vanilla:   C_i = min(R_m / ||g_[m],i||, 1)
//   Automatic: C_i = 1 / (||g_[m],i|| + gamma)
//
// R_m only sets the noise sensitivity for Automatic clipping.
struct ClipPlan {
  Partition partition = Partition::LayerWise;
  ClipFunction function = ClipFunction::Vanilla;
  std::vector<double> thresholds;  // R_m, one per group
  double gamma = 0.01;
  std::vector<int> group_of_layer;  // -1 for layers with nothing trainable

  static ClipPlan all_layer(const NetworkSpec& spec, ClipFunction fn, double threshold,
                            double gamma = 0.01);
  // `thresholds` may hold one value (broadcast) or one per trainable layer.
  static ClipPlan layer_wise(const NetworkSpec& spec, ClipFunction fn,
                             std::vector<double> thresholds, double gamma = 0.01);

  int groups() const { return static_cast<int>(thresholds.size()); }
  // ||[R_1, ..., R_M]||
  double sensitivity() const;
  // True when every group holds exactly one layer, so clipping can stream
  // layer by layer without book-keeping all output gradients.
  bool streams_per_layer() const;

  // Every trainable layer in exactly one group, every group non-empty,
  // Vanilla thresholds positive, gamma >= 0.
  void validate(const NetworkSpec& spec) const;

  friend bool operator==(const ClipPlan&, const ClipPlan&) = default;
};

// Squared per-sample norms, B x M.
struct PerSampleNorms {
  Eigen::MatrixXd squared;
  std::vector<NormMethod> methods;  // per layer
};

// Sum of member-layer squared norms for one group, members in ascending order.
Vector group_squared_norm(const ClipPlan& plan, int group, const std::vector<Vector>& per_layer);

PerSampleNorms aggregate_norms(const ClipPlan& plan, const std::vector<LayerNorms>& per_layer);

// Per-sample, per-group factors C_i(R_m), B x M. `threshold_scale` multiplies
// every threshold (Vanilla) or the numerator (Automatic); it is S in the
// loss-scaled variant whose clipping threshold moves with the loss scale.
// Throws ContractViolation on a negative squared norm.
Eigen::MatrixXd clip_factors(const PerSampleNorms& norms, const ClipPlan& plan,
                             double threshold_scale = 1.0, Precision precision = Precision::F64);

// Factor column for one group.
Vector clip_factors_for_group(const Vector& squared_norms, const ClipPlan& plan, int group,
                              double threshold_scale = 1.0, Precision precision = Precision::F64);

}  // namespace dpzero

#endif  // DPZERO_DP_CLIPPING_HPP_
