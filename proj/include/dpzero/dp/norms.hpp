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

#ifndef DPZERO_DP_NORMS_HPP_
#define DPZERO_DP_NORMS_HPP_

#include <string_view>

#include "dpzero/errors.hpp"
#include "dpzero/network/network.hpp"
#include "dpzero/numerics/matmul.hpp"
#include "dpzero/numerics/precision.hpp"
#include "dpzero/numerics/types.hpp"

namespace dpzero {

// Per-sample squared Frobenius norms of linear-layer weight gradients
// a_i^T g_i, where a is (B*T) x d and g is (B*T) x p.
//
// Two routes give the same number:
//   instantiated: form a_i^T g_i (d x p), then sum its squares;
//   ghost:        form the T x T Grams a_i a_i^T and g_i g_i^T, then take
//                 their Frobenius inner product.
// The first costs ~2Tdp per sample, the second ~2T^2(d+p); the mixed rule
// picks whichever is cheaper per layer.

enum class NormMethod { Instantiated, Ghost };

std::string_view to_string(NormMethod m);

// Ghost iff 2 T^2 <= d p (ties go to Ghost).
NormMethod ghost_dispatch(Index tokens, Index d, Index p);

using DispatchRule = NormMethod (*)(Index tokens, Index d, Index p);

namespace detail {

template <typename DA, typename DG>
Index checked_samples(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DG>& g,
                      Index tokens) {
  if (tokens <= 0) throw ContractViolation("token length must be positive");
  if (a.rows() != g.rows() || a.rows() % tokens != 0) {
    throw ContractViolation("per-sample norm: activation and output-gradient rows differ "
                            "or are not a multiple of T");
  }
  return a.rows() / tokens;
}

}  // namespace detail

template <typename DA, typename DG>
Vector psg_norm_instantiated(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DG>& g,
                             Index tokens, Precision precision = Precision::F64) {
  const Index B = detail::checked_samples(a, g, tokens);
  const Precision acc = default_accumulate(precision);
  Vector out(B);
  for (Index i = 0; i < B; ++i) {
    const RowMatrix grad = matmul(sample_rows(a, i, tokens).transpose(), sample_rows(g, i, tokens),
                                  acc, precision);
    out[i] = frobenius_dot(grad, grad, acc);
  }
  return out;
}

template <typename DA, typename DG>
Vector psg_norm_ghost(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DG>& g,
                      Index tokens, Precision precision = Precision::F64) {
  const Index B = detail::checked_samples(a, g, tokens);
  const Precision acc = default_accumulate(precision);
  Vector out(B);
  for (Index i = 0; i < B; ++i) {
    const auto ai = sample_rows(a, i, tokens);
    const auto gi = sample_rows(g, i, tokens);
    const RowMatrix gram_a = matmul(ai, ai.transpose(), acc, precision);
    const RowMatrix gram_g = matmul(gi, gi.transpose(), acc, precision);
    out[i] = frobenius_dot(gram_a, gram_g, acc);
  }
  return out;
}

// ||1^T g_i||^2: the bias gradient is a token sum, instantiated directly.
template <typename DG>
Vector psg_norm_bias(const Eigen::MatrixBase<DG>& g, Index tokens,
                     Precision precision = Precision::F64) {
  if (tokens <= 0 || g.rows() % tokens != 0) {
    throw ContractViolation("bias norm: rows are not a multiple of T");
  }
  const Index B = g.rows() / tokens;
  const Precision acc = default_accumulate(precision);
  Vector out(B);
  for (Index i = 0; i < B; ++i) {
    RowVector sum = sample_rows(g, i, tokens).colwise().sum();
    if (acc != Precision::F64) {
      sum.setZero();
      for (Index t = 0; t < tokens; ++t) {
        for (Index c = 0; c < g.cols(); ++c) {
          sum[c] = round_to(sum[c] + g.coeff(i * tokens + t, c), acc);
        }
      }
    }
    round_in_place(sum, precision);
    out[i] = frobenius_dot(sum, sum, acc);
  }
  return out;
}

template <typename DA, typename DG>
Vector psg_norm_mixed(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DG>& g,
                      Index tokens, Precision precision = Precision::F64,
                      DispatchRule rule = ghost_dispatch) {
  return rule(tokens, a.cols(), g.cols()) == NormMethod::Ghost
             ? psg_norm_ghost(a, g, tokens, precision)
             : psg_norm_instantiated(a, g, tokens, precision);
}

// Squared per-sample norm of one layer's trainable parameters.
struct LayerNorms {
  Vector squared;  // weight part + bias part, per sample
  NormMethod method = NormMethod::Ghost;
};

LayerNorms layer_norms(const LayerSpec& layer, const RowMatrix& a, const RowMatrix& grad_s,
                       Index tokens, Precision precision = Precision::F64,
                       DispatchRule rule = ghost_dispatch);

}  // namespace dpzero

#endif  // DPZERO_DP_NORMS_HPP_
