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

#ifndef DPZERO_ZERO_REFERENCE_HPP_
#define DPZERO_ZERO_REFERENCE_HPP_

#include <cstdint>
#include <vector>

#include "dpzero/zero/engine.hpp"

namespace dpzero {

// Single-device DP trainer used as the oracle for the sharded engine.
//
// It sees the same logical batch as N_d groups of `accumulation`
// micro-batches, accumulates clipped sums inside a group, adds the group's
// noise share and folds the groups in ascending order. No sharding, no
// collectives, one full copy of every state.
class ReferenceTrainer {
 public:
  ReferenceTrainer(TrainingSetup setup, const Parameters& initial);

  StepReport train_step();

  Parameters master_parameters() const;
  Parameters working_parameters() const;

 private:
  TrainingSetup setup_;
  std::vector<ParamSlot> slots_;
  std::vector<RowMatrix> working_;
  std::vector<RowMatrix> master_;
  std::vector<RowMatrix> m_;
  std::vector<RowMatrix> v_;
  std::uint64_t step_ = 0;
};

}  // namespace dpzero

#endif  // DPZERO_ZERO_REFERENCE_HPP_
