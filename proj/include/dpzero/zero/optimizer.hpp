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

#ifndef DPZERO_ZERO_OPTIMIZER_HPP_
#define DPZERO_ZERO_OPTIMIZER_HPP_

#include <cstdint>
#include <optional>
#include <string_view>

#include "dpzero/numerics/precision.hpp"
#include "dpzero/numerics/types.hpp"

namespace dpzero {

enum class OptimizerKind { SGD, Adam, AdamW };

std::string_view to_string(OptimizerKind k);
std::optional<OptimizerKind> parse_optimizer(std::string_view name);

struct OptimizerSpec {
  OptimizerKind kind = OptimizerKind::SGD;
  double lr = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;

  // Per-parameter tensors kept in master precision: the master copy, plus
  // first and second moments for the Adam family.
  int state_count() const { return kind == OptimizerKind::SGD ? 1 : 3; }
  bool has_moments() const { return kind != OptimizerKind::SGD; }

  void validate() const;

  friend bool operator==(const OptimizerSpec&, const OptimizerSpec&) = default;
};

// Updates one contiguous region of master weights in place from gradient g
// (already averaged over the logical batch). Step t counts from 1. Every
// intermediate is rounded to `master`. m and v may be empty for SGD.
//
//   SGD:   w -= lr * (g + wd w)
//   Adam:  g' = g + wd w, moments of g', w -= lr * m_hat / (sqrt(v_hat) + eps)
//   AdamW: moments of g,  w -= lr * (m_hat / (sqrt(v_hat) + eps) + wd w)
void apply_update(const OptimizerSpec& opt, std::uint64_t t, Precision master,
                  Eigen::Ref<Vector> w, Eigen::Ref<Vector> m, Eigen::Ref<Vector> v,
                  const Eigen::Ref<const Vector>& g);

}  // namespace dpzero

#endif  // DPZERO_ZERO_OPTIMIZER_HPP_
