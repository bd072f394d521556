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

#include "dpzero/zero/shard.hpp"

#include <algorithm>
#include <string>

#include "dpzero/errors.hpp"

namespace dpzero {

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::DDP: return "ddp";
    case Stage::Zero1: return "zero1";
    case Stage::Zero2: return "zero2";
    case Stage::Zero3: return "zero3";
  }
  return "ddp";
}

std::optional<Stage> stage_from_int(int value) {
  if (value < 0 || value > 3) return std::nullopt;
  return static_cast<Stage>(value);
}

ShardLayout ShardLayout::make(Index numel, int workers) {
  if (numel < 0 || workers <= 0) throw ContractViolation("invalid shard layout");
  return {numel, workers, (numel + workers - 1) / workers};
}

Index ShardLayout::begin(int rank) const { return std::min(Index{rank} * shard_size, numel); }

Index ShardLayout::end(int rank) const { return std::min(Index{rank + 1} * shard_size, numel); }

OwnedShard::OwnedShard(ShardLayout layout, int rank)
    : layout_(layout), rank_(rank), values_(Vector::Zero(layout.shard_size)) {
  if (rank < 0 || rank >= layout.workers) throw ContractViolation("rank outside the shard layout");
}

OwnedShard OwnedShard::slice(ShardLayout layout, int rank, const Vector& full) {
  if (full.size() != layout.numel) throw ContractViolation("slice: tensor length differs from layout");
  OwnedShard shard(layout, rank);
  shard.owned() = full.segment(shard.begin(), layout.owned(rank));
  return shard;
}

void OwnedShard::check(Index global) const {
  if (!owns(global)) {
    throw OwnershipViolation("rank " + std::to_string(rank_) + " read index " +
                             std::to_string(global) + " outside its shard [" +
                             std::to_string(begin()) + ", " + std::to_string(end()) + ")");
  }
}

double OwnedShard::at(Index global) const {
  check(global);
  return values_[global - begin()];
}

double& OwnedShard::at(Index global) {
  check(global);
  return values_[global - begin()];
}

}  // namespace dpzero
