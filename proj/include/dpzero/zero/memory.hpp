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

#ifndef DPZERO_ZERO_MEMORY_HPP_
#define DPZERO_ZERO_MEMORY_HPP_

#include "dpzero/numerics/precision.hpp"
#include "dpzero/zero/shard.hpp"

namespace dpzero {

// Model-state bytes held by one worker.
struct MemoryFootprint {
  double parameters = 0;  // working-precision weights
  double gradients = 0;   // working-precision gradients of trainable weights
  double optimizer = 0;   // master copy and moments, master precision

  double total() const { return parameters + gradients + optimizer; }

  friend bool operator==(const MemoryFootprint&, const MemoryFootprint&) = default;
};

// Closed form with h = bytes of the working precision and K = master bytes
// times the optimizer's state count:
//
//   parameters  h * Psi_model   (/ N at stage 3)
//   gradients   h * Psi_train   (/ N at stages 2, 3)
//   optimizer   K * Psi_train   (/ N at stages 1, 2, 3)
//
// Mixed-precision Adam with Psi_train = Psi_model gives 16, 4 + 12/N,
// 2 + 14/N and 16/N bytes per parameter for stages 0..3.
MemoryFootprint memory_footprint(Stage stage, int workers, double psi_model, double psi_train,
                                 int optimizer_states = 3, Precision working = Precision::F16);

}  // namespace dpzero

#endif  // DPZERO_ZERO_MEMORY_HPP_
