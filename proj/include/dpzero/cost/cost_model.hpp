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

#ifndef DPZERO_COST_COST_MODEL_HPP_
#define DPZERO_COST_COST_MODEL_HPP_

#include <string>
#include <vector>

#include "dpzero/zero/memory.hpp"
#include "dpzero/zero/shard.hpp"

namespace dpzero {

struct Bandwidth {
  double intra_node_gbps = 300.0;  // GB/s between workers of one node
  double inter_node_gbps = 25.0;   // GB/s across nodes
  int workers_per_node = 8;

  friend bool operator==(const Bandwidth&, const Bandwidth&) = default;
};

struct CostInputs {
  double batch = 1;   // B
  double tokens = 1;  // T
  double psi_model = 1;
  double psi_train = 1;
  int workers = 1;  // N_d
  Stage stage = Stage::DDP;
  bool dp_enabled = true;
  double dp_overhead_coeff = 0.666;  // c
  bool checkpointing = false;
  double attention_coeff = 0;  // flops per B T^2
  Bandwidth bandwidth;
  int bytes_per_element = 2;
  bool peft = false;
  int accumulation = 1;  // stage-3 gathers repeat per micro-batch
  int optimizer_states = 3;
  double flops_per_second = 1e14;
  double memory_budget_bytes = 0;  // when positive, report the largest model that fits

  // Throws ContractViolation unless 0 <= Psi_train <= Psi_model, c >= 0 and
  // every count is positive.
  void validate() const;

  friend bool operator==(const CostInputs&, const CostInputs&) = default;
};

struct CostReport {
  double forward = 0;      // 2 B T Psi_model, doubled with checkpointing
  double output_grad = 0;  // 2 B T Psi_model
  double param_grad = 0;   // 2 B T Psi_train
  double dp_overhead = 0;  // c B T Psi_train
  double attention = 0;    // coeff B T^2
  double comm_elements = 0;
  double comm_seconds = 0;
  MemoryFootprint memory;  // bytes per worker
  double relative_speed = 1;
  double max_trainable = 0;  // Psi_max for memory_budget_bytes, 0 without a budget
};

// Flop counts only; communication and memory are left zero.
CostReport time_components(const CostInputs& in);

// Elements moved per worker per optimizer step:
//   stages 0, 1, 2: 2 Psi_train (gradient reduce plus gradient or parameter gather)
//   stage 3:        2 A Psi_model + Psi_train (gathers before forward and
//                   backward of each of A micro-batches, gradient reduce)
// and 0 for a single worker.
double comm_volume(const CostInputs& in);
double comm_seconds(const CostInputs& in);

// DP speed over non-DP speed: (bp + fwd + comm) / (bp + dp + fwd + comm),
// with flops converted to seconds at flops_per_second.
double relative_speed(const CostInputs& in);

// Largest Psi (trainable = total) whose model states fit `budget_bytes` per
// worker.
double max_trainable_model(double budget_bytes, int workers, Stage stage,
                           int optimizer_states = 3, int bytes_per_element = 2);

CostReport evaluate(const CostInputs& in);

// Field names in emission order, inputs first.
std::vector<std::string> cost_columns();
std::string to_csv(const std::vector<CostInputs>& rows);
std::string to_json(const std::vector<CostInputs>& rows);

}  // namespace dpzero

#endif  // DPZERO_COST_COST_MODEL_HPP_
