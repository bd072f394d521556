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

#ifndef DPZERO_ZERO_ENGINE_HPP_
#define DPZERO_ZERO_ENGINE_HPP_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dpzero/amp/pipeline.hpp"
#include "dpzero/dp/clipping.hpp"
#include "dpzero/dp/noise.hpp"
#include "dpzero/network/network.hpp"
#include "dpzero/zero/collectives.hpp"
#include "dpzero/zero/memory.hpp"
#include "dpzero/zero/optimizer.hpp"
#include "dpzero/zero/shard.hpp"

namespace dpzero {

// Everything that defines a training run apart from the initial weights.
struct TrainingSetup {
  NetworkSpec network;
  Stage stage = Stage::DDP;
  int workers = 1;        // N_d
  int accumulation = 1;   // micro-batches per worker per step
  Index micro_batch = 1;  // B
  ClipPlan clip;
  NoisePolicy noise;
  OptimizerSpec optimizer;
  ScalingPipeline amp;
  Precision precision = Precision::F64;
  bool checkpointing = false;
  std::uint64_t data_seed = 0;
  DispatchRule dispatch = ghost_dispatch;

  // B * N_d * accumulation.
  Index logical_batch() const { return micro_batch * workers * accumulation; }

  // Throws ContractViolation on malformed fields and UnsupportedConfiguration
  // for clipping groups spanning several layers on stages 2 and 3.
  void validate() const;

  friend bool operator==(const TrainingSetup&, const TrainingSetup&) = default;
};

struct StepReport {
  std::uint64_t step = 0;
  // Privatized gradient sum per slot in master precision after the loss
  // scale is removed, before averaging; 0 x 0 for frozen slots.
  std::vector<RowMatrix> gradient;
  Vector losses;  // per sample, in logical-batch order
  FlowStatus flow;
  Index communicated = 0;  // elements per worker this step
};

// Adds each worker's noise share to its clipped sum and reduce-scatters the
// result. worker_sums[r] is rank r's flattened slot tensor; the share has std
// noise.worker_std(N) * threshold_scale and is drawn from
// noise.stream(r, step, slot).
std::vector<OwnedShard> noisy_reduce_scatter(Communicator& comm,
                                             std::span<const Vector> worker_sums,
                                             const ShardLayout& layout, const NoisePolicy& noise,
                                             double threshold_scale, std::uint64_t step,
                                             std::uint64_t slot, std::string_view tensor,
                                             Precision precision);

// N_d lockstep workers running DP training under a ZeRO stage.
//
// Per micro-batch and layer: gather parameters (stage 3), forward; then top
// down: gather parameters (stage 3), output gradient, per-sample norms and
// clip factors, clipped parameter gradient. After the last micro-batch each
// worker adds its noise share and the sums are reduce-scattered; owners
// update their optimizer shards and, below stage 3, re-gather the updated
// parameters.
class ZeroEngine {
 public:
  ZeroEngine(TrainingSetup setup, const Parameters& initial);

  StepReport train_step();

  std::uint64_t steps_done() const { return step_; }
  const TrainingSetup& setup() const { return setup_; }
  const CollectiveLog& log() const { return comm_.log(); }

  // Observer views assembled from every worker's shards. Frozen slots report
  // their working values as master values.
  Parameters master_parameters() const;
  Parameters working_parameters() const;

  // Bytes per worker, averaged over workers, counted from the shards the
  // engine actually holds.
  MemoryFootprint memory_audit() const;

 private:
  struct SlotState {
    OwnedShard param;   // working precision
    OwnedShard grad;    // reduced gradient, working precision
    OwnedShard master;  // optimizer state, master precision
    OwnedShard m;
    OwnedShard v;
  };
  using Worker = std::vector<SlotState>;

  ShardLayout param_layout(Index numel) const;
  ShardLayout grad_layout(Index numel) const;
  ShardLayout optimizer_layout(Index numel) const;
  LayerParams gather_layer(Index layer);
  LayerParams local_layer(int rank, Index layer) const;
  std::vector<OwnedShard> slot_shards(std::size_t slot,
                                      OwnedShard SlotState::*member) const;

  TrainingSetup setup_;
  std::vector<ParamSlot> slots_;
  std::vector<Worker> workers_;
  Communicator comm_;
  std::uint64_t step_ = 0;
};

}  // namespace dpzero

#endif  // DPZERO_ZERO_ENGINE_HPP_
