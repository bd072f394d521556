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

#include "dpzero/zero/memory.hpp"

#include "dpzero/errors.hpp"

namespace dpzero {

MemoryFootprint memory_footprint(Stage stage, int workers, double psi_model, double psi_train,
                                 int optimizer_states, Precision working) {
  if (workers <= 0) throw ContractViolation("memory footprint needs at least one worker");
  if (psi_model < 0 || psi_train < 0 || psi_train > psi_model) {
    throw ContractViolation("parameter counts must satisfy 0 <= Psi_train <= Psi_model");
  }
  const double h = static_cast<double>(bytes_per_element(working));
  const double k = static_cast<double>(bytes_per_element(master_precision(working))) *
                   optimizer_states;
  const double n = workers;
  MemoryFootprint f;
  f.parameters = shards_parameters(stage) ? h * psi_model / n : h * psi_model;
  f.gradients = shards_gradients(stage) ? h * psi_train / n : h * psi_train;
  f.optimizer = shards_optimizer(stage) ? k * psi_train / n : k * psi_train;
  return f;
}

}  // namespace dpzero
