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

#include "dpzero/cost/cost_model.hpp"

#include <charconv>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dpzero/errors.hpp"

namespace dpzero {

namespace {

Precision precision_for_bytes(int bytes) {
  switch (bytes) {
    case 2: return Precision::F16;
    case 4: return Precision::F32;
    case 8: return Precision::F64;
  }
  throw ContractViolation("bytes per element must be 2, 4 or 8");
}

// Shortest text that reads back to the same double.
std::string number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void CostInputs::validate() const {
  if (!(batch > 0) || !(tokens > 0)) throw ContractViolation("B and T must be positive");
  if (!(psi_train >= 0) || psi_train > psi_model) {
    throw ContractViolation("parameter counts must satisfy 0 <= Psi_train <= Psi_model");
  }
  if (!(dp_overhead_coeff >= 0)) throw ContractViolation("DP overhead coefficient must be >= 0");
  if (!(attention_coeff >= 0)) throw ContractViolation("attention coefficient must be >= 0");
  if (workers <= 0 || accumulation <= 0 || optimizer_states <= 0) {
    throw ContractViolation("worker, accumulation and state counts must be positive");
  }
  if (!(bandwidth.intra_node_gbps > 0) || !(bandwidth.inter_node_gbps > 0) ||
      bandwidth.workers_per_node <= 0) {
    throw ContractViolation("bandwidths and workers per node must be positive");
  }
  if (!(flops_per_second > 0)) throw ContractViolation("flops_per_second must be positive");
  if (!(memory_budget_bytes >= 0)) throw ContractViolation("memory budget must be >= 0");
  precision_for_bytes(bytes_per_element);
}

CostReport time_components(const CostInputs& in) {
  in.validate();
  const double bt = in.batch * in.tokens;
  CostReport r;
  r.forward = 2 * bt * in.psi_model * (in.checkpointing ? 2 : 1);
  r.output_grad = 2 * bt * in.psi_model;
  r.param_grad = 2 * bt * in.psi_train;
  r.dp_overhead = in.dp_enabled ? in.dp_overhead_coeff * bt * in.psi_train : 0;
  r.attention = in.attention_coeff * in.batch * in.tokens * in.tokens;
  return r;
}

double comm_volume(const CostInputs& in) {
  in.validate();
  if (in.workers == 1) return 0;
  if (shards_parameters(in.stage)) return 2 * in.accumulation * in.psi_model + in.psi_train;
  return 2 * in.psi_train;
}

double comm_seconds(const CostInputs& in) {
  const double bytes = comm_volume(in) * in.bytes_per_element;
  const double gbps = in.workers <= in.bandwidth.workers_per_node ? in.bandwidth.intra_node_gbps
                                                                   : in.bandwidth.inter_node_gbps;
  return bytes / (gbps * 1e9);
}

double relative_speed(const CostInputs& in) {
  const CostReport t = time_components(in);
  const double fwd = (t.forward + t.attention) / in.flops_per_second;
  const double bp = (t.output_grad + t.param_grad) / in.flops_per_second;
  const double dp = t.dp_overhead / in.flops_per_second;
  const double comm = comm_seconds(in);
  return (bp + fwd + comm) / (bp + dp + fwd + comm);
}

double max_trainable_model(double budget_bytes, int workers, Stage stage, int optimizer_states,
                           int bytes_per_element) {
  if (!(budget_bytes >= 0)) throw ContractViolation("memory budget must be >= 0");
  const MemoryFootprint unit = memory_footprint(stage, workers, 1, 1, optimizer_states,
                                                precision_for_bytes(bytes_per_element));
  return budget_bytes / unit.total();
}

CostReport evaluate(const CostInputs& in) {
  CostReport r = time_components(in);
  r.comm_elements = comm_volume(in);
  r.comm_seconds = comm_seconds(in);
  r.memory = memory_footprint(in.stage, in.workers, in.psi_model, in.psi_train,
                              in.optimizer_states, precision_for_bytes(in.bytes_per_element));
  r.relative_speed = relative_speed(in);
  if (in.memory_budget_bytes > 0) {
    r.max_trainable = max_trainable_model(in.memory_budget_bytes, in.workers, in.stage,
                                          in.optimizer_states, in.bytes_per_element);
  }
  return r;
}

std::vector<std::string> cost_columns() {
  return {
      "batch", "tokens", "psi_model", "psi_train", "workers", "stage", "dp_enabled",
      "dp_overhead_coeff", "checkpointing", "attention_coeff", "intra_node_gbps",
      "inter_node_gbps", "workers_per_node", "bytes_per_element", "peft", "accumulation",
      "optimizer_states", "flops_per_second", "memory_budget_bytes", "forward", "output_grad",
      "param_grad", "dp_overhead", "attention", "comm_elements", "comm_seconds",
      "memory_parameters", "memory_gradients", "memory_optimizer", "memory_total",
      "relative_speed", "max_trainable"};
}

namespace {

std::vector<std::string> row_values(const CostInputs& in) {
  const CostReport r = evaluate(in);
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  return {number(in.batch),
          number(in.tokens),
          number(in.psi_model),
          number(in.psi_train),
          std::to_string(in.workers),
          std::to_string(static_cast<int>(in.stage)),
          b(in.dp_enabled),
          number(in.dp_overhead_coeff),
          b(in.checkpointing),
          number(in.attention_coeff),
          number(in.bandwidth.intra_node_gbps),
          number(in.bandwidth.inter_node_gbps),
          std::to_string(in.bandwidth.workers_per_node),
          std::to_string(in.bytes_per_element),
          b(in.peft),
          std::to_string(in.accumulation),
          std::to_string(in.optimizer_states),
          number(in.flops_per_second),
          number(in.memory_budget_bytes),
          number(r.forward),
          number(r.output_grad),
          number(r.param_grad),
          number(r.dp_overhead),
          number(r.attention),
          number(r.comm_elements),
          number(r.comm_seconds),
          number(r.memory.parameters),
          number(r.memory.gradients),
          number(r.memory.optimizer),
          number(r.memory.total()),
          number(r.relative_speed),
          number(r.max_trainable)};
}

}  // namespace

std::string to_csv(const std::vector<CostInputs>& rows) {
  std::ostringstream out;
  const auto cols = cost_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const CostInputs& in : rows) {
    const auto values = row_values(in);
    for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << values[i];
    out << '\n';
  }
  return out.str();
}

std::string to_json(const std::vector<CostInputs>& rows) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  const auto cols = cost_columns();
  for (const CostInputs& in : rows) {
    const auto values = row_values(in);
    nlohmann::ordered_json row;
    for (std::size_t i = 0; i < cols.size(); ++i) row[cols[i]] = nlohmann::ordered_json::parse(values[i]);
    out.push_back(std::move(row));
  }
  return out.dump(2) + "\n";
}

}  // namespace dpzero
