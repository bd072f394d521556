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

#ifndef DPZERO_NUMERICS_PRECISION_HPP_
#define DPZERO_NUMERICS_PRECISION_HPP_

#include <cstddef>
#include <optional>
#include <string_view>

#include <Eigen/Dense>

namespace dpzero {

// Logical floating-point format of a value stored on a double carrier.
enum class Precision { F64, F32, F16, BF16 };

std::string_view to_string(Precision p);
std::optional<Precision> parse_precision(std::string_view name);

// Largest finite magnitude of the format (65504 for F16).
double max_finite(Precision p);

// Smallest positive subnormal of the format.
double min_subnormal(Precision p);

std::size_t bytes_per_element(Precision p);

inline bool is_half(Precision p) { return p == Precision::F16 || p == Precision::BF16; }

// Accumulator used by matmul for operands in `working` precision: F32 for
// half formats, otherwise the format itself.
inline Precision default_accumulate(Precision working) {
  return is_half(working) ? Precision::F32 : working;
}

// Format of master weights and optimizer state, and of loss evaluation.
inline Precision master_precision(Precision working) {
  return working == Precision::F64 ? Precision::F64 : Precision::F32;
}

// Round to nearest representable value of `p`, ties to even. Magnitudes past
// the largest finite value become signed infinity; values below half the
// smallest subnormal become signed zero. NaN and infinities pass through.
double round_to(double x, Precision p);

template <typename Derived>
typename Derived::PlainObject round_to(const Eigen::DenseBase<Derived>& x, Precision p) {
  typename Derived::PlainObject out = x;
  if (p == Precision::F64) return out;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out.data()[i] = round_to(out.data()[i], p);
  }
  return out;
}

template <typename Derived>
void round_in_place(Eigen::DenseBase<Derived>& x, Precision p) {
  if (p == Precision::F64) return;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      x.coeffRef(r, c) = round_to(x.coeff(r, c), p);
    }
  }
}

inline bool is_representable(double x, Precision p) {
  const double r = round_to(x, p);
  return r == x || (r != r && x != x);
}

template <typename Derived>
bool has_infinity(const Eigen::DenseBase<Derived>& x) {
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double v = x.coeff(r, c);
      if (!(v - v == 0.0)) return true;  // inf or nan
    }
  }
  return false;
}

}  // namespace dpzero

#endif  // DPZERO_NUMERICS_PRECISION_HPP_
