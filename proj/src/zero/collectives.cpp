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

#include "dpzero/zero/collectives.hpp"

#include "dpzero/errors.hpp"

namespace dpzero {

std::string_view to_string(CollectiveOp op) {
  switch (op) {
    case CollectiveOp::AllGather: return "all_gather";
    case CollectiveOp::ReduceScatter: return "reduce_scatter";
    case CollectiveOp::Reduce: return "reduce";
  }
  return "all_gather";
}

void CollectiveLog::append(CollectiveRecord record) {
  if (record.elements < 0) throw ContractViolation("collective volume must be nonnegative");
  records_.push_back(std::move(record));
}

Index CollectiveLog::volume(std::optional<std::uint64_t> step,
                            std::optional<CollectiveOp> op) const {
  Index total = 0;
  for (const auto& r : records_) {
    if (step && r.step != *step) continue;
    if (op && r.op != *op) continue;
    total += r.elements;
  }
  return total;
}

Communicator::Communicator(int size) : size_(size) {
  if (size <= 0) throw ContractViolation("communicator needs at least one worker");
}

void Communicator::record(CollectiveOp op, Index elements, std::string_view tensor) {
  if (size_ == 1) return;
  log_.append({op, elements, step_, layer_, std::string(tensor)});
}

Vector Communicator::all_gather(std::span<const OwnedShard> shards, std::string_view tensor) {
  if (static_cast<int>(shards.size()) != size_) {
    throw ContractViolation("all_gather: expected one shard per worker");
  }
  const ShardLayout& layout = shards.front().layout();
  if (layout.workers != size_) throw ContractViolation("all_gather: layout does not match worker count");
  Vector full(layout.numel);
  for (int r = 0; r < size_; ++r) {
    const OwnedShard& s = shards[r];
    if (s.rank() != r || !(s.layout() == layout)) {
      throw ContractViolation("all_gather: missing shard for rank " + std::to_string(r));
    }
    full.segment(s.begin(), layout.owned(r)) = s.owned();
  }
  record(CollectiveOp::AllGather, layout.numel, tensor);
  return full;
}

Vector Communicator::fold(std::span<const Vector> contributions, Index begin, Index count,
                          Precision precision) const {
  Vector acc = contributions[0].segment(begin, count);
  for (int r = 1; r < size_; ++r) {
    acc += contributions[r].segment(begin, count);
    round_in_place(acc, precision);
  }
  return acc;
}

std::vector<OwnedShard> Communicator::reduce_scatter(std::span<const Vector> contributions,
                                                     const ShardLayout& layout,
                                                     std::string_view tensor, Precision precision) {
  if (static_cast<int>(contributions.size()) != size_ || layout.workers != size_) {
    throw ContractViolation("reduce_scatter: expected one contribution per worker");
  }
  for (const Vector& c : contributions) {
    if (c.size() != layout.numel) throw ContractViolation("reduce_scatter: shape mismatch");
  }
  std::vector<OwnedShard> out;
  out.reserve(size_);
  for (int r = 0; r < size_; ++r) {
    OwnedShard shard(layout, r);
    shard.owned() = fold(contributions, layout.begin(r), layout.owned(r), precision);
    out.push_back(std::move(shard));
  }
  record(CollectiveOp::ReduceScatter, layout.numel, tensor);
  return out;
}

Vector Communicator::reduce(std::span<const Vector> contributions, int root,
                            std::string_view tensor, Precision precision) {
  if (static_cast<int>(contributions.size()) != size_) {
    throw ContractViolation("reduce: expected one contribution per worker");
  }
  if (root < 0 || root >= size_) throw ContractViolation("reduce: root outside the group");
  const Index n = contributions.front().size();
  for (const Vector& c : contributions) {
    if (c.size() != n) throw ContractViolation("reduce: shape mismatch");
  }
  Vector sum = fold(contributions, 0, n, precision);
  record(CollectiveOp::Reduce, n, tensor);
  return sum;
}

}  // namespace dpzero
