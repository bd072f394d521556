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

#include "dpzero/numerics/precision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dpzero {
namespace {

struct Format {
  int fraction_bits;  // explicit mantissa bits
  int min_exponent;   // exponent of the smallest normal
  double max_finite;
};

Format format_of(Precision p) {
  switch (p) {
    case Precision::F32:
      return {23, -126, static_cast<double>(std::numeric_limits<float>::max())};
    case Precision::F16:
      return {10, -14, 65504.0};
    case Precision::BF16:
      return {7, -126, std::ldexp(255.0, 120)};  // (2 - 2^-7) * 2^127
    case Precision::F64:
      break;
  }
  return {52, -1022, std::numeric_limits<double>::max()};
}

}  // namespace

std::string_view to_string(Precision p) {
  switch (p) {
    case Precision::F64: return "f64";
    case Precision::F32: return "f32";
    case Precision::F16: return "f16";
    case Precision::BF16: return "bf16";
  }
  return "f64";
}

std::optional<Precision> parse_precision(std::string_view name) {
  if (name == "f64" || name == "f64-audit") return Precision::F64;
  if (name == "f32") return Precision::F32;
  if (name == "f16") return Precision::F16;
  if (name == "bf16") return Precision::BF16;
  return std::nullopt;
}

double max_finite(Precision p) { return format_of(p).max_finite; }

double min_subnormal(Precision p) {
  const Format f = format_of(p);
  return std::ldexp(1.0, f.min_exponent - f.fraction_bits);
}

std::size_t bytes_per_element(Precision p) {
  switch (p) {
    case Precision::F64: return 8;
    case Precision::F32: return 4;
    case Precision::F16:
    case Precision::BF16: return 2;
  }
  return 8;
}

double round_to(double x, Precision p) {
  if (p == Precision::F64 || x == 0.0 || !std::isfinite(x)) return x;
  const Format f = format_of(p);

  int exp2 = 0;
  std::frexp(std::fabs(x), &exp2);  // |x| = m * 2^exp2, m in [0.5, 1)
  const int lead = std::max(exp2 - 1, f.min_exponent);
  const double quantum = std::ldexp(1.0, lead - f.fraction_bits);

  // nearbyint rounds ties to even under the default rounding mode.
  const double r = std::nearbyint(std::fabs(x) / quantum) * quantum;
  if (r > f.max_finite) return std::copysign(std::numeric_limits<double>::infinity(), x);
  return std::copysign(r, x);
}

}  // namespace dpzero
