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

#include "dpzero/network/data.hpp"

#include "dpzero/errors.hpp"
#include "dpzero/numerics/rng.hpp"

namespace dpzero {

Batch synthetic_batch(const NetworkSpec& spec, std::uint64_t seed, std::uint64_t step,
                      Index first_sample, Index count) {
  spec.validate();
  if (count <= 0 || first_sample < 0) throw ContractViolation("synthetic batch needs samples");
  const Index T = spec.tokens;
  const Index d = spec.input_dim();
  const Index p = spec.output_dim();

  Batch batch;
  batch.samples = count;
  batch.inputs.resize(count * T, d);
  if (spec.loss == LossKind::SquaredError) {
    batch.targets.resize(count * T, p);
  } else {
    batch.labels.resize(count * T);
  }
  for (Index i = 0; i < count; ++i) {
    RngStream rng(seed, {0, Purpose::Data, step, static_cast<std::uint64_t>(first_sample + i)});
    sample_rows(batch.inputs, i, T) = gaussian(rng, T, d, 1.0);
    if (spec.loss == LossKind::SquaredError) {
      sample_rows(batch.targets, i, T) = gaussian(rng, T, p, 1.0);
    } else {
      for (Index t = 0; t < T; ++t) {
        batch.labels[i * T + t] = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(p));
      }
    }
  }
  return batch;
}

}  // namespace dpzero
