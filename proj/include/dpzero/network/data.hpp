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

#ifndef DPZERO_NETWORK_DATA_HPP_
#define DPZERO_NETWORK_DATA_HPP_

#include <cstdint>

#include "dpzero/network/network.hpp"

namespace dpzero {

// Synthetic samples for step `step`: inputs and regression targets are
// standard normal, class labels uniform. Sample i of a step is drawn from its
// own stream, so a batch does not depend on how the logical batch is split
// across workers or micro-batches.
Batch synthetic_batch(const NetworkSpec& spec, std::uint64_t seed, std::uint64_t step,
                      Index first_sample, Index count);

}  // namespace dpzero

#endif  // DPZERO_NETWORK_DATA_HPP_
