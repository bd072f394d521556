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

#ifndef DPZERO_NUMERICS_TYPES_HPP_
#define DPZERO_NUMERICS_TYPES_HPP_

#include <Eigen/Dense>

namespace dpzero {

using Index = Eigen::Index;

// A [B, T, d] activation is stored as a (B*T) x d row-major matrix; sample i
// is the row block [i*T, (i+1)*T).
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;
using Vector = Eigen::VectorXd;

// Rows [i*tokens, (i+1)*tokens) of a token-major batch matrix: sample i.
template <typename Derived>
auto sample_rows(Eigen::MatrixBase<Derived>& m, Index sample, Index tokens) {
  return m.middleRows(sample * tokens, tokens);
}

template <typename Derived>
auto sample_rows(const Eigen::MatrixBase<Derived>& m, Index sample, Index tokens) {
  return m.middleRows(sample * tokens, tokens);
}

}  // namespace dpzero

#endif  // DPZERO_NUMERICS_TYPES_HPP_
