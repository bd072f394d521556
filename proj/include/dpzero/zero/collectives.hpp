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

#ifndef DPZERO_ZERO_COLLECTIVES_HPP_
#define DPZERO_ZERO_COLLECTIVES_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpzero/numerics/precision.hpp"
#include "dpzero/numerics/types.hpp"
#include "dpzero/zero/shard.hpp"

namespace dpzero {

enum class CollectiveOp { AllGather, ReduceScatter, Reduce };

std::string_view to_string(CollectiveOp op);

struct CollectiveRecord {
  CollectiveOp op = CollectiveOp::AllGather;
  Index elements = 0;  // logical tensor size moved per worker
  std::uint64_t step = 0;
  Index layer = -1;
  std::string tensor;

  friend bool operator==(const CollectiveRecord&, const CollectiveRecord&) = default;
};

// Append-only record of every collective issued.
class CollectiveLog {
 public:
  void append(CollectiveRecord record);
  const std::vector<CollectiveRecord>& records() const { return records_; }

  // Elements moved per worker, optionally restricted to one step and/or op.
  Index volume(std::optional<std::uint64_t> step = std::nullopt,
               std::optional<CollectiveOp> op = std::nullopt) const;

 private:
  std::vector<CollectiveRecord> records_;
};

// Lockstep collectives among `size` simulated workers. Reductions fold in
// ascending rank order so every run produces the same bits. A single worker
// needs no communication, so nothing is logged when size() == 1.
class Communicator {
 public:
  explicit Communicator(int size);

  int size() const { return size_; }
  const CollectiveLog& log() const { return log_; }

  // Tags subsequent records.
  void set_context(std::uint64_t step, Index layer) {
    step_ = step;
    layer_ = layer;
  }

  // Concatenates one shard per rank; every rank receives this tensor.
  Vector all_gather(std::span<const OwnedShard> shards, std::string_view tensor);

  // contributions[r] is rank r's full-length tensor. Returns, per rank, its
  // shard of the elementwise sum, each partial sum rounded to `precision`.
  std::vector<OwnedShard> reduce_scatter(std::span<const Vector> contributions,
                                         const ShardLayout& layout, std::string_view tensor,
                                         Precision precision = Precision::F64);

  // Elementwise sum delivered to `root`.
  Vector reduce(std::span<const Vector> contributions, int root, std::string_view tensor,
                Precision precision = Precision::F64);

 private:
  void record(CollectiveOp op, Index elements, std::string_view tensor);
  Vector fold(std::span<const Vector> contributions, Index begin, Index count,
              Precision precision) const;

  int size_;
  CollectiveLog log_;
  std::uint64_t step_ = 0;
  Index layer_ = -1;
};

}  // namespace dpzero

#endif  // DPZERO_ZERO_COLLECTIVES_HPP_
