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

#ifndef DPZERO_TESTS_ORACLES_HPP_
#define DPZERO_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <vector>

#include "dpzero/numerics/precision.hpp"
#include "dpzero/numerics/types.hpp"

namespace dpzero::oracle {

inline double decode_f16(std::uint16_t bits) {
  const int exponent = (bits >> 10) & 0x1F;
  const int fraction = bits & 0x3FF;
  const double sign = (bits & 0x8000) ? -1.0 : 1.0;
  if (exponent == 0x1F) {
    return fraction ? std::numeric_limits<double>::quiet_NaN()
                    : sign * std::numeric_limits<double>::infinity();
  }
  if (exponent == 0) return sign * std::ldexp(fraction, -24);
  return sign * std::ldexp(1024 + fraction, exponent - 25);
}

inline double decode_bf16(std::uint16_t bits) {
  const std::uint32_t wide = static_cast<std::uint32_t>(bits) << 16;
  float f;
  std::memcpy(&f, &wide, sizeof f);
  return f;
}

// Nonnegative values of a 16-bit format indexed by bit pattern, up to and
// including the first pattern that decodes to infinity.
inline const std::vector<double>& positive_table(Precision p) {
  static const auto build = [](double (*decode)(std::uint16_t)) {
    std::vector<double> values;
    for (std::uint32_t b = 0; b < 0x8000; ++b) {
      const double v = decode(static_cast<std::uint16_t>(b));
      values.push_back(v);
      if (std::isinf(v)) break;
    }
    return values;
  };
  static const std::vector<double> f16 = build(decode_f16);
  static const std::vector<double> bf16 = build(decode_bf16);
  return p == Precision::F16 ? f16 : bf16;
}

// Round-to-nearest-even by table lookup; the value one step past the largest
// finite number is the overflow boundary.
inline double round_half(double x, Precision p) {
  if (std::isnan(x) || std::isinf(x)) return x;
  const auto& table = positive_table(p);
  const double ax = std::fabs(x);
  const std::size_t inf_index = table.size() - 1;
  const double max = table[inf_index - 1];
  const double next = 2 * max - table[inf_index - 2];
  double result;
  if (ax >= next) {
    result = std::numeric_limits<double>::infinity();
  } else if (ax > max) {
    const double mid = (max + next) / 2;
    result = ax < mid ? max : std::numeric_limits<double>::infinity();
  } else {
    const auto hi = std::lower_bound(table.begin(), table.begin() + inf_index, ax);
    if (*hi == ax) {
      result = ax;
    } else {
      const auto lo = hi - 1;
      const double dl = ax - *lo;
      const double dh = *hi - ax;
      if (dl < dh) {
        result = *lo;
      } else if (dh < dl) {
        result = *hi;
      } else {
        result = ((lo - table.begin()) % 2 == 0) ? *lo : *hi;
      }
    }
  }
  return std::copysign(result, x);
}

inline double round_any(double x, Precision p) {
  switch (p) {
    case Precision::F64: return x;
    case Precision::F32: return static_cast<float>(x);
    default: return round_half(x, p);
  }
}

// Per-sample weight gradient a_i^T g_i by explicit loops.
inline RowMatrix per_sample_weight_grad(const RowMatrix& a, const RowMatrix& g, Index sample,
                                        Index tokens) {
  RowMatrix out = RowMatrix::Zero(a.cols(), g.cols());
  for (Index t = 0; t < tokens; ++t) {
    const Index row = sample * tokens + t;
    for (Index i = 0; i < a.cols(); ++i) {
      for (Index j = 0; j < g.cols(); ++j) out(i, j) += a(row, i) * g(row, j);
    }
  }
  return out;
}

inline double squared_frobenius(const RowMatrix& m) {
  double s = 0;
  for (Index i = 0; i < m.size(); ++i) s += m.data()[i] * m.data()[i];
  return s;
}

inline RowMatrix naive_matmul(const RowMatrix& a, const RowMatrix& b) {
  RowMatrix out = RowMatrix::Zero(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.cols(); ++j) {
      for (Index k = 0; k < a.cols(); ++k) out(i, j) += a(i, k) * b(k, j);
    }
  }
  return out;
}

}  // namespace dpzero::oracle

#endif  // DPZERO_TESTS_ORACLES_HPP_
