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

#ifndef DPZERO_NUMERICS_MATMUL_HPP_
#define DPZERO_NUMERICS_MATMUL_HPP_

#include <cmath>

#include "dpzero/errors.hpp"
#include "dpzero/numerics/precision.hpp"
#include "dpzero/numerics/types.hpp"

namespace dpzero {

// a * b with products and partial sums carried in `accumulate` precision.
// For accumulate != F64 every fused multiply-add is rounded to that format
// (k ascending); the result is rounded to `out`.
template <typename DA, typename DB>
RowMatrix matmul(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b,
                 Precision accumulate = Precision::F64, Precision out = Precision::F64) {
  if (a.cols() != b.rows()) {
    throw ContractViolation("matmul: inner dimensions differ (" + std::to_string(a.cols()) +
                            " vs " + std::to_string(b.rows()) + ")");
  }
  if (accumulate == Precision::F64) {
    RowMatrix result = a * b;
    round_in_place(result, out);
    return result;
  }
  RowMatrix result(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (Index k = 0; k < a.cols(); ++k) {
        acc = round_to(std::fma(a.coeff(i, k), b.coeff(k, j), acc), accumulate);
      }
      result(i, j) = round_to(acc, out);
    }
  }
  return result;
}

// Sum of all entries of the elementwise product of x and y (a Frobenius inner
// product), accumulated like matmul.
template <typename DX, typename DY>
double frobenius_dot(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y,
                     Precision accumulate = Precision::F64) {
  if (accumulate == Precision::F64) return x.cwiseProduct(y).sum();
  double acc = 0.0;
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      acc = round_to(std::fma(x.coeff(i, j), y.coeff(i, j), acc), accumulate);
    }
  }
  return acc;
}

}  // namespace dpzero

#endif  // DPZERO_NUMERICS_MATMUL_HPP_
