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

#include "dpzero/numerics/rng.hpp"

#include <cmath>
#include <numbers>

#include "dpzero/errors.hpp"

namespace dpzero {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_key(std::uint64_t seed, const StreamId& id) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ id.rank);
  h = splitmix64(h ^ static_cast<std::uint64_t>(id.purpose));
  h = splitmix64(h ^ id.step);
  h = splitmix64(h ^ id.slot);
  return h;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, StreamId id) : engine_(derive_key(seed, id)) {}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u1 = uniform();
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

RowMatrix gaussian(RngStream& rng, Index rows, Index cols, double std) {
  if (!(std >= 0.0)) throw ContractViolation("gaussian: std must be nonnegative");
  RowMatrix out = RowMatrix::Zero(rows, cols);
  if (std == 0.0) return out;
  for (Index i = 0; i < out.size(); ++i) out.data()[i] = std * rng.normal();
  return out;
}

Tensor gaussian(RngStream& rng, const Shape& shape, double std) {
  const Index n = shape_size(shape);
  RowMatrix draws = gaussian(rng, 1, n, std);
  return Tensor(shape, draws.transpose(), Precision::F64);
}

}  // namespace dpzero
