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

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "dpzero/errors.hpp"
#include "dpzero/numerics/matmul.hpp"
#include "dpzero/numerics/precision.hpp"
#include "dpzero/numerics/rng.hpp"
#include "dpzero/numerics/tensor.hpp"
#include "oracles.hpp"

namespace dpzero {
namespace {

const double kInf = std::numeric_limits<double>::infinity();

TEST(RoundTo, Float16Boundaries) {
  EXPECT_EQ(round_to(65504.0, Precision::F16), 65504.0);
  EXPECT_EQ(round_to(65519.0, Precision::F16), 65504.0);
  EXPECT_EQ(round_to(65520.0, Precision::F16), kInf);
  EXPECT_EQ(round_to(-1e6, Precision::F16), -kInf);
  EXPECT_EQ(round_to(1.0 + std::ldexp(1.0, -11), Precision::F16), 1.0);
  EXPECT_EQ(round_to(1.0 + 3 * std::ldexp(1.0, -11), Precision::F16), 1.0 + std::ldexp(1.0, -9));
}

TEST(RoundTo, Float16Underflow) {
  EXPECT_EQ(min_subnormal(Precision::F16), std::ldexp(1.0, -24));
  EXPECT_EQ(round_to(1e-8, Precision::F16), 0.0);
  EXPECT_EQ(round_to(std::ldexp(1.0, -25), Precision::F16), 0.0);
  EXPECT_EQ(round_to(3 * std::ldexp(1.0, -25), Precision::F16), std::ldexp(1.0, -23));
  const double neg = round_to(-1e-9, Precision::F16);
  EXPECT_EQ(neg, 0.0);
  EXPECT_TRUE(std::signbit(neg));
}

TEST(RoundTo, MatchesBitPatternOracle) {
  RngStream rng(7, {0, Purpose::Test, 0, 0});
  for (Precision p : {Precision::F16, Precision::BF16, Precision::F32}) {
    for (int k = 0; k < 200000; ++k) {
      const double mag = std::ldexp(rng.uniform() + 0.5, static_cast<int>(rng.next_u64() % 300) - 150);
      const double x = rng.uniform() < 0.5 ? -mag : mag;
      ASSERT_EQ(round_to(x, p), oracle::round_any(x, p)) << to_string(p) << " x=" << x;
    }
  }
}

TEST(RoundTo, ExactTiesAgreeWithOracle) {
  for (Precision p : {Precision::F16, Precision::BF16}) {
    const auto& table = oracle::positive_table(p);
    for (std::size_t i = 0; i + 2 < table.size(); i += 97) {
      const double mid = (table[i] + table[i + 1]) / 2;
      ASSERT_EQ(round_to(mid, p), oracle::round_half(mid, p)) << to_string(p) << " i=" << i;
      ASSERT_EQ(round_to(-mid, p), oracle::round_half(-mid, p));
    }
  }
}

TEST(RoundTo, Idempotent) {
  RngStream rng(8, {0, Purpose::Test, 0, 0});
  for (Precision p : {Precision::F64, Precision::F32, Precision::F16, Precision::BF16}) {
    for (int k = 0; k < 10000; ++k) {
      const double x = std::ldexp(rng.normal(), static_cast<int>(rng.next_u64() % 80) - 40);
      const double once = round_to(x, p);
      ASSERT_EQ(round_to(once, p), once);
      ASSERT_TRUE(is_representable(once, p));
    }
  }
}

TEST(RoundTo, BFloat16KeepsFloat32Range) {
  RngStream rng(9, {0, Purpose::Test, 0, 0});
  for (int k = 0; k < 10000; ++k) {
    const double x = std::ldexp(rng.uniform() + 1.0, static_cast<int>(rng.next_u64() % 127));
    ASSERT_FALSE(std::isinf(round_to(x, Precision::BF16)));
  }
  EXPECT_EQ(max_finite(Precision::BF16), oracle::decode_bf16(0x7F7F));
  EXPECT_EQ(round_to(1e38, Precision::BF16), oracle::round_half(1e38, Precision::BF16));
  EXPECT_TRUE(std::isinf(round_to(std::numeric_limits<float>::max(), Precision::BF16)));
}

TEST(RoundTo, NonFiniteAndZeroPassThrough) {
  EXPECT_EQ(round_to(kInf, Precision::F16), kInf);
  EXPECT_TRUE(std::isnan(round_to(std::nan(""), Precision::BF16)));
  EXPECT_TRUE(std::signbit(round_to(-0.0, Precision::F16)));
}

TEST(Precision, ParseAndBytes) {
  EXPECT_EQ(parse_precision("f16"), Precision::F16);
  EXPECT_EQ(parse_precision("f64-audit"), Precision::F64);
  EXPECT_FALSE(parse_precision("fp8"));
  EXPECT_EQ(bytes_per_element(Precision::BF16), 2u);
  EXPECT_EQ(master_precision(Precision::F16), Precision::F32);
  EXPECT_EQ(master_precision(Precision::F64), Precision::F64);
  EXPECT_EQ(default_accumulate(Precision::BF16), Precision::F32);
}

TEST(Matmul, FullPrecisionMatchesLoops) {
  RngStream rng(10, {0, Purpose::Test, 0, 0});
  const RowMatrix a = gaussian(rng, 5, 7, 1.0);
  const RowMatrix b = gaussian(rng, 7, 3, 1.0);
  const RowMatrix got = matmul(a, b);
  const RowMatrix want = oracle::naive_matmul(a, b);
  EXPECT_LT((got - want).norm(), 1e-13 * want.norm());
}

TEST(Matmul, Float32AccumulationMatchesFloatFma) {
  RngStream rng(11, {0, Purpose::Test, 0, 0});
  const RowMatrix a = round_to(gaussian(rng, 4, 9, 1.0), Precision::F16);
  const RowMatrix b = round_to(gaussian(rng, 9, 5, 1.0), Precision::F16);
  const RowMatrix got = matmul(a, b, Precision::F32, Precision::F16);
  for (Index i = 0; i < 4; ++i) {
    for (Index j = 0; j < 5; ++j) {
      float acc = 0.0f;
      for (Index k = 0; k < 9; ++k) {
        acc = std::fmaf(static_cast<float>(a(i, k)), static_cast<float>(b(k, j)), acc);
      }
      EXPECT_EQ(got(i, j), oracle::round_half(acc, Precision::F16));
    }
  }
}

TEST(Matmul, ShapeMismatchThrows) {
  EXPECT_THROW(matmul(RowMatrix::Zero(2, 3), RowMatrix::Zero(2, 3)), ContractViolation);
}

TEST(Tensor, InvariantsAndRounding) {
  EXPECT_EQ(shape_size({2, 3, 4}), 24);
  EXPECT_THROW(Tensor({2, 3}, Vector::Zero(5)), ContractViolation);
  EXPECT_THROW(shape_size({2, -1}), ContractViolation);
  Vector v(2);
  v << 1.0 + 1e-5, 70000.0;
  const Tensor t({2}, v, Precision::F16);
  EXPECT_EQ(t[0], 1.0);
  EXPECT_EQ(t[1], kInf);
  Tensor u({1}, Precision::BF16);
  u.set(0, 1.0 / 3);
  EXPECT_EQ(u[0], round_to(1.0 / 3, Precision::BF16));
}

TEST(Tensor, MatmulRank2Only) {
  const Tensor a({2, 3}, Vector::Ones(6));
  const Tensor b({3, 2}, Vector::Ones(6));
  const Tensor c = matmul(a, b, Precision::F64, Precision::F64);
  EXPECT_EQ(c.shape(), (Shape{2, 2}));
  EXPECT_EQ(c[3], 3.0);
  EXPECT_THROW(matmul(Tensor({6}, Vector::Ones(6)), b, Precision::F64, Precision::F64),
               ContractViolation);
}

TEST(Rng, SameStreamSameDraws) {
  RngStream a(42, {3, Purpose::Noise, 5, 1});
  RngStream b(42, {3, Purpose::Noise, 5, 1});
  EXPECT_EQ(gaussian(a, 10, 10, 1.0), gaussian(b, 10, 10, 1.0));
}

TEST(Rng, DistinctStreamsDiffer) {
  const StreamId base{3, Purpose::Noise, 5, 1};
  RngStream ref(42, base);
  const double first = ref.normal();
  for (StreamId id : {StreamId{4, Purpose::Noise, 5, 1}, StreamId{3, Purpose::Data, 5, 1},
                      StreamId{3, Purpose::Noise, 6, 1}, StreamId{3, Purpose::Noise, 5, 2}}) {
    RngStream other(42, id);
    EXPECT_NE(other.normal(), first);
  }
  RngStream seed(43, base);
  EXPECT_NE(seed.normal(), first);
}

TEST(Rng, ZeroStdIsExactlyZero) {
  RngStream rng(1, {});
  EXPECT_TRUE((gaussian(rng, 3, 4, 0.0).array() == 0.0).all());
}

TEST(Rng, UnitNormalMoments) {
  RngStream rng(2024, {0, Purpose::Test, 0, 0});
  const RowMatrix x = gaussian(rng, 1000, 1000, 1.0);
  const double mean = x.mean();
  const double std = std::sqrt((x.array() - mean).square().mean());
  EXPECT_GE(std, 0.997);
  EXPECT_LE(std, 1.003);
  EXPECT_LT(std::abs(mean), 0.005);
}

TEST(Rng, UniformRange) {
  RngStream rng(5, {});
  for (int k = 0; k < 100000; ++k) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

}  // namespace
}  // namespace dpzero
