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

#ifndef DPZERO_DP_NOISE_HPP_
#define DPZERO_DP_NOISE_HPP_

#include <cstdint>
#include <optional>
#include <string_view>

#include "dpzero/dp/clipping.hpp"
#include "dpzero/numerics/precision.hpp"
#include "dpzero/numerics/rng.hpp"
#include "dpzero/numerics/types.hpp"

namespace dpzero {

// How workers share the Gaussian noise of one optimizer step.
//   SharedSeed:       every worker draws the same vector z and adds
//                     sigma * sens / N_d * z; the sum is sigma * sens * z.
//   IndependentSeeds: worker r draws its own z_r and adds
//                     sigma * sens / sqrt(N_d) * z_r; the sum has std
//                     sigma * sens.
enum class NoiseMode { SharedSeed, IndependentSeeds };

std::string_view to_string(NoiseMode m);
std::optional<NoiseMode> parse_noise_mode(std::string_view name);

struct NoisePolicy {
  double sigma = 0.0;        // sigma_DP; 0 means non-private
  NoiseMode mode = NoiseMode::SharedSeed;
  double sensitivity = 1.0;  // ||[R_1, ..., R_M]||
  std::uint64_t seed = 0;

  static NoisePolicy for_plan(double sigma, NoiseMode mode, const ClipPlan& plan,
                              std::uint64_t seed);

  double full_std() const { return sigma * sensitivity; }
  // Std of the share one of `workers` workers adds.
  double worker_std(int workers) const;

  // Stream worker `rank` draws from for parameter tensor `slot` at `step`.
  RngStream stream(int rank, std::uint64_t step, std::uint64_t slot) const;

  friend bool operator==(const NoisePolicy&, const NoisePolicy&) = default;
};

// clipped_sum + std * N(0, I), rounded to `precision`. std = 0 returns the
// input unchanged.
RowMatrix add_gaussian_noise(const RowMatrix& clipped_sum, double std, RngStream& rng,
                             Precision precision = Precision::F64);

// Full single-device privatization: std = sigma * ||R|| * threshold_scale.
RowMatrix privatize(const RowMatrix& clipped_sum, const NoisePolicy& policy, RngStream& rng,
                    double threshold_scale = 1.0, Precision precision = Precision::F64);

}  // namespace dpzero

#endif  // DPZERO_DP_NOISE_HPP_
