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

#include "dpzero/dp/clipping.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dpzero/errors.hpp"

namespace dpzero {

std::string_view to_string(ClipFunction f) {
  return f == ClipFunction::Vanilla ? "vanilla" : "automatic";
}

std::optional<ClipFunction> parse_clip_function(std::string_view name) {
  if (name == "vanilla") return ClipFunction::Vanilla;
  if (name == "automatic") return ClipFunction::Automatic;
  return std::nullopt;
}

std::string_view to_string(Partition p) {
  switch (p) {
    case Partition::AllLayer: return "all-layer";
    case Partition::LayerWise: return "layer-wise";
    case Partition::Custom: return "custom";
  }
  return "layer-wise";
}

std::optional<Partition> parse_partition(std::string_view name) {
  if (name == "all-layer") return Partition::AllLayer;
  if (name == "layer-wise") return Partition::LayerWise;
  if (name == "custom") return Partition::Custom;
  return std::nullopt;
}

ClipPlan ClipPlan::all_layer(const NetworkSpec& spec, ClipFunction fn, double threshold,
                             double gamma) {
  ClipPlan plan;
  plan.partition = Partition::AllLayer;
  plan.function = fn;
  plan.gamma = gamma;
  plan.thresholds = {threshold};
  for (const auto& layer : spec.layers) plan.group_of_layer.push_back(layer.trainable() ? 0 : -1);
  return plan;
}

ClipPlan ClipPlan::layer_wise(const NetworkSpec& spec, ClipFunction fn,
                              std::vector<double> thresholds, double gamma) {
  ClipPlan plan;
  plan.partition = Partition::LayerWise;
  plan.function = fn;
  plan.gamma = gamma;
  int next = 0;
  for (const auto& layer : spec.layers) plan.group_of_layer.push_back(layer.trainable() ? next++ : -1);
  if (thresholds.size() == 1 && next > 1) thresholds.assign(next, thresholds.front());
  plan.thresholds = std::move(thresholds);
  return plan;
}

double ClipPlan::sensitivity() const {
  double sq = 0.0;
  for (double r : thresholds) sq += r * r;
  return std::sqrt(sq);
}

bool ClipPlan::streams_per_layer() const {
  std::vector<int> members(thresholds.size(), 0);
  for (int g : group_of_layer) {
    if (g >= 0) ++members[g];
  }
  for (int m : members) {
    if (m != 1) return false;
  }
  return true;
}

void ClipPlan::validate(const NetworkSpec& spec) const {
  if (group_of_layer.size() != spec.layers.size()) {
    throw ContractViolation("clip plan covers " + std::to_string(group_of_layer.size()) +
                            " layers, network has " + std::to_string(spec.layers.size()));
  }
  if (thresholds.empty()) throw ContractViolation("clip plan has no groups");
  std::vector<int> members(thresholds.size(), 0);
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const int g = group_of_layer[l];
    if (spec.layers[l].trainable()) {
      if (g < 0 || g >= groups()) {
        throw ContractViolation("trainable layer " + std::to_string(l) + " has no clipping group");
      }
      ++members[g];
    } else if (g >= groups()) {
      throw ContractViolation("layer " + std::to_string(l) + " maps to a missing group");
    }
  }
  for (std::size_t g = 0; g < members.size(); ++g) {
    if (members[g] == 0) throw ContractViolation("clipping group " + std::to_string(g) + " is empty");
  }
  for (double r : thresholds) {
    if (!(r > 0.0)) throw ContractViolation("clipping thresholds must be positive");
  }
  if (!(gamma >= 0.0)) throw ContractViolation("automatic clipping gamma must be nonnegative");
}

Vector group_squared_norm(const ClipPlan& plan, int group, const std::vector<Vector>& per_layer) {
  Vector total;
  for (std::size_t l = 0; l < plan.group_of_layer.size(); ++l) {
    if (plan.group_of_layer[l] != group) continue;
    if (total.size() == 0) {
      total = per_layer[l];
    } else {
      total += per_layer[l];
    }
  }
  return total;
}

PerSampleNorms aggregate_norms(const ClipPlan& plan, const std::vector<LayerNorms>& per_layer) {
  if (per_layer.size() != plan.group_of_layer.size()) {
    throw ContractViolation("per-layer norms do not cover the clip plan");
  }
  std::vector<Vector> squared;
  PerSampleNorms out;
  for (const auto& ln : per_layer) {
    squared.push_back(ln.squared);
    out.methods.push_back(ln.method);
  }
  const Index B = per_layer.empty() ? 0 : per_layer.front().squared.size();
  out.squared.resize(B, plan.groups());
  for (int g = 0; g < plan.groups(); ++g) out.squared.col(g) = group_squared_norm(plan, g, squared);
  return out;
}

Vector clip_factors_for_group(const Vector& squared_norms, const ClipPlan& plan, int group,
                              double threshold_scale, Precision precision) {
  const Precision p = master_precision(precision);
  Vector factors(squared_norms.size());
  for (Index i = 0; i < squared_norms.size(); ++i) {
    const double sq = squared_norms[i];
    if (sq < 0.0) throw ContractViolation("negative squared per-sample norm");
    const double norm = round_to(std::sqrt(sq), p);
    double c = 1.0;
    if (plan.function == ClipFunction::Vanilla) {
      const double bound = round_to(plan.thresholds[group] * threshold_scale, p);
      if (norm > 0.0) c = std::min(round_to(bound / norm, p), 1.0);
    } else {
      const double denom = round_to(norm + round_to(plan.gamma * threshold_scale, p), p);
      c = round_to(threshold_scale / denom, p);
    }
    factors[i] = c;
  }
  return factors;
}

Eigen::MatrixXd clip_factors(const PerSampleNorms& norms, const ClipPlan& plan,
                             double threshold_scale, Precision precision) {
  if (norms.squared.cols() != plan.groups()) {
    throw ContractViolation("norms do not cover every clipping group");
  }
  Eigen::MatrixXd factors(norms.squared.rows(), norms.squared.cols());
  for (int g = 0; g < plan.groups(); ++g) {
    factors.col(g) = clip_factors_for_group(norms.squared.col(g), plan, g, threshold_scale, precision);
  }
  return factors;
}

}  // namespace dpzero
