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

#include "dpzero/dp/norms.hpp"

namespace dpzero {

std::string_view to_string(NormMethod m) {
  return m == NormMethod::Ghost ? "ghost" : "instantiated";
}

NormMethod ghost_dispatch(Index tokens, Index d, Index p) {
  return 2 * tokens * tokens <= d * p ? NormMethod::Ghost : NormMethod::Instantiated;
}

LayerNorms layer_norms(const LayerSpec& layer, const RowMatrix& a, const RowMatrix& grad_s,
                       Index tokens, Precision precision, DispatchRule rule) {
  LayerNorms out;
  out.method = rule(tokens, layer.d_in, layer.d_out);
  const Index B = detail::checked_samples(a, grad_s, tokens);
  out.squared = Vector::Zero(B);
  const Precision acc = default_accumulate(precision);
  if (layer.train_weight) {
    out.squared = out.method == NormMethod::Ghost
                      ? psg_norm_ghost(a, grad_s, tokens, precision)
                      : psg_norm_instantiated(a, grad_s, tokens, precision);
  }
  if (layer.train_bias) {
    const Vector bias = psg_norm_bias(grad_s, tokens, precision);
    for (Index i = 0; i < B; ++i) out.squared[i] = round_to(out.squared[i] + bias[i], acc);
  }
  return out;
}

}  // namespace dpzero
