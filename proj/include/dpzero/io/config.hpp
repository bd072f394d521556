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

#ifndef DPZERO_IO_CONFIG_HPP_
#define DPZERO_IO_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpzero/cost/cost_model.hpp"
#include "dpzero/zero/engine.hpp"

namespace dpzero {

using Json = nlohmann::ordered_json;

// A simulation run as described by a JSON config:
//
//   {
//     "network":   {"input_dim": 8, "tokens": 4, "loss": "squared_error",
//                   "layers": [{"out": 16, "activation": "tanh"}, ...]},
//     "data":      {"micro_batch": 4, "accumulation": 1},
//     "shard":     {"stage": 2, "workers": 4},
//     "clipping":  {"partition": "layer-wise", "function": "vanilla", "R": [1.0]},
//     "noise":     {"sigma": 1.0, "mode": "shared"},
//     "optimizer": {"kind": "adamw", "lr": 0.001},
//     "amp":       {"variant": "dp-1346", "scale": 1.0, "precision": "bf16"},
//     "steps": 10,
//     "seed": 0
//   }
//
// Every section and most fields are optional. "seed" seeds initialization,
// data and noise unless network.init_seed, data.seed or noise.seed are given.
struct RunConfig {
  TrainingSetup setup;
  std::uint64_t init_seed = 0;
  std::uint64_t steps = 1;
  std::uint64_t seed = 0;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Throws ConfigError naming the offending field (e.g. "clipping.R[1]") for
// malformed input, and UnsupportedConfiguration for valid fields that cannot
// be combined. A config without "seed" uses `default_seed`.
RunConfig parse_run_config(const Json& j, std::uint64_t default_seed = 0);
RunConfig load_run_config(const std::filesystem::path& path, std::uint64_t default_seed = 0);

// Writes every field explicitly; parsing the result gives the same config.
Json to_json(const RunConfig& config);

// Cost rows from a JSON object of CostInputs fields. An optional "sweep"
// object maps field names to value lists; rows are the cartesian product in
// the order the fields appear, the last varying fastest.
std::vector<CostInputs> parse_cost_config(const Json& j);
std::vector<CostInputs> load_cost_config(const std::filesystem::path& path);

// Reads a whole file as JSON; ConfigError on I/O or syntax errors.
Json read_json_file(const std::filesystem::path& path);

}  // namespace dpzero

#endif  // DPZERO_IO_CONFIG_HPP_
