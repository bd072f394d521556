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

#include "dpzero/dp/noise.hpp"

#include <cmath>

#include "dpzero/errors.hpp"

namespace dpzero {

std::string_view to_string(NoiseMode m) {
  return m == NoiseMode::SharedSeed ? "shared" : "independent";
}

std::optional<NoiseMode> parse_noise_mode(std::string_view name) {
  if (name == "shared") return NoiseMode::SharedSeed;
  if (name == "independent") return NoiseMode::IndependentSeeds;
  return std::nullopt;
}

NoisePolicy NoisePolicy::for_plan(double sigma, NoiseMode mode, const ClipPlan& plan,
                                  std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ContractViolation("noise multiplier must be nonnegative");
  return NoisePolicy{sigma, mode, plan.sensitivity(), seed};
}

double NoisePolicy::worker_std(int workers) const {
  if (workers <= 0) throw ContractViolation("worker count must be positive");
  if (workers == 1) return full_std();
  return mode == NoiseMode::SharedSeed ? full_std() / workers
                                       : full_std() / std::sqrt(static_cast<double>(workers));
}

RngStream NoisePolicy::stream(int rank, std::uint64_t step, std::uint64_t slot) const {
  const std::uint32_t r = mode == NoiseMode::SharedSeed ? kSharedRank
                                                        : static_cast<std::uint32_t>(rank);
  return RngStream(seed, {r, Purpose::Noise, step, slot});
}

RowMatrix add_gaussian_noise(const RowMatrix& clipped_sum, double std, RngStream& rng,
                             Precision precision) {
  if (std == 0.0) return clipped_sum;
  RowMatrix out = clipped_sum + gaussian(rng, clipped_sum.rows(), clipped_sum.cols(), std);
  round_in_place(out, precision);
  return out;
}

RowMatrix privatize(const RowMatrix& clipped_sum, const NoisePolicy& policy, RngStream& rng,
                    double threshold_scale, Precision precision) {
  return add_gaussian_noise(clipped_sum, policy.full_std() * threshold_scale, rng, precision);
}

}  // namespace dpzero
