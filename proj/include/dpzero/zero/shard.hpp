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

#ifndef DPZERO_ZERO_SHARD_HPP_
#define DPZERO_ZERO_SHARD_HPP_

#include <optional>
#include <string_view>

#include "dpzero/numerics/types.hpp"

namespace dpzero {

// DDP replicates all model states; ZeRO1 shards optimizer states, ZeRO2 also
// gradients, ZeRO3 also parameters.
enum class Stage { DDP = 0, Zero1 = 1, Zero2 = 2, Zero3 = 3 };

std::string_view to_string(Stage s);
std::optional<Stage> stage_from_int(int value);

inline bool shards_optimizer(Stage s) { return s >= Stage::Zero1; }
inline bool shards_gradients(Stage s) { return s >= Stage::Zero2; }
inline bool shards_parameters(Stage s) { return s == Stage::Zero3; }

// Contiguous equal-size chunks of a flattened tensor. The last chunks are
// zero-padded; rank r owns [begin(r), end(r)).
struct ShardLayout {
  Index numel = 0;
  int workers = 1;
  Index shard_size = 0;

  static ShardLayout make(Index numel, int workers);
  static ShardLayout whole(Index numel) { return make(numel, 1); }

  Index begin(int rank) const;
  Index end(int rank) const;
  Index owned(int rank) const { return end(rank) - begin(rank); }

  friend bool operator==(const ShardLayout&, const ShardLayout&) = default;
};

// One rank's chunk of a tensor. Indexing is by global flat index; touching
// an index the rank does not own throws OwnershipViolation.
class OwnedShard {
 public:
  OwnedShard() = default;
  OwnedShard(ShardLayout layout, int rank);
  // Copies the owned region of `full` (length layout.numel).
  static OwnedShard slice(ShardLayout layout, int rank, const Vector& full);

  const ShardLayout& layout() const { return layout_; }
  int rank() const { return rank_; }
  Index begin() const { return layout_.begin(rank_); }
  Index end() const { return layout_.end(rank_); }
  bool owns(Index global) const { return global >= begin() && global < end(); }

  double at(Index global) const;
  double& at(Index global);

  // Owned values without padding.
  auto owned() { return values_.head(layout_.owned(rank_)); }
  auto owned() const { return values_.head(layout_.owned(rank_)); }
  // Padded storage, shard_size elements.
  const Vector& storage() const { return values_; }

 private:
  void check(Index global) const;

  ShardLayout layout_;
  int rank_ = 0;
  Vector values_;
};

}  // namespace dpzero

#endif  // DPZERO_ZERO_SHARD_HPP_
