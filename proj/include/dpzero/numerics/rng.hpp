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

#ifndef DPZERO_NUMERICS_RNG_HPP_
#define DPZERO_NUMERICS_RNG_HPP_

#include <cstdint>
#include <optional>
#include <random>

#include "dpzero/numerics/tensor.hpp"
#include "dpzero/numerics/types.hpp"

namespace dpzero {

enum class Purpose : std::uint32_t { Data = 1, Noise = 2, Init = 3, Test = 4 };

// Rank used for streams every worker must draw identically.
inline constexpr std::uint32_t kSharedRank = 0xFFFFFFFFu;

struct StreamId {
  std::uint32_t rank = 0;
  Purpose purpose = Purpose::Test;
  std::uint64_t step = 0;
  std::uint64_t slot = 0;  // e.g. parameter tensor index
};

// Reproducible random stream: identical (seed, id) gives identical draws on
// every platform. mt19937_64 with hand-written uniform/normal transforms.
class RngStream {
 public:
  RngStream(std::uint64_t seed, StreamId id);

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

// i.i.d. N(0, std^2) samples; std = 0 yields exact zeros without drawing.
RowMatrix gaussian(RngStream& rng, Index rows, Index cols, double std);
Tensor gaussian(RngStream& rng, const Shape& shape, double std);

}  // namespace dpzero

#endif  // DPZERO_NUMERICS_RNG_HPP_
