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

#ifndef DPZERO_IO_SIMULATION_HPP_
#define DPZERO_IO_SIMULATION_HPP_

#include <filesystem>
#include <string>

#include "dpzero/io/config.hpp"
#include "dpzero/zero/collectives.hpp"
#include "dpzero/zero/engine.hpp"

namespace dpzero {

// Contents of the files a simulation writes. Each trace is JSON lines.
struct SimulationOutputs {
  std::string trajectory;   // per step: losses, privatized gradient, master weights
  std::string collectives;  // one record per collective
  std::string flow;         // per step: overflow, underflow, volume
  std::string summary;      // JSON document

  static constexpr const char* kTrajectoryFile = "trajectory.jsonl";
  static constexpr const char* kCollectivesFile = "collectives.jsonl";
  static constexpr const char* kFlowFile = "flow.jsonl";
  static constexpr const char* kSummaryFile = "summary.json";
};

Json parameters_json(const NetworkSpec& spec, const Parameters& params);
std::string collective_line(const CollectiveRecord& record);

// Runs `config.steps` engine steps from init_parameters(config.init_seed).
// Half-precision runs also measure, before each step, the underflow of the
// clipped gradient against full precision on the same logical batch.
SimulationOutputs simulate(const RunConfig& config);

void write_outputs(const SimulationOutputs& out, const std::filesystem::path& dir);

}  // namespace dpzero

#endif  // DPZERO_IO_SIMULATION_HPP_
