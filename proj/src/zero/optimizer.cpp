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

#include "dpzero/zero/optimizer.hpp"

#include <cmath>

#include "dpzero/errors.hpp"

namespace dpzero {

std::string_view to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::SGD: return "sgd";
    case OptimizerKind::Adam: return "adam";
    case OptimizerKind::AdamW: return "adamw";
  }
  return "sgd";
}

std::optional<OptimizerKind> parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::SGD;
  if (name == "adam") return OptimizerKind::Adam;
  if (name == "adamw") return OptimizerKind::AdamW;
  return std::nullopt;
}

void OptimizerSpec::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ContractViolation("learning rate must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ContractViolation("Adam betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw ContractViolation("Adam eps must be positive");
  if (!(weight_decay >= 0.0)) throw ContractViolation("weight decay must be >= 0");
}

void apply_update(const OptimizerSpec& opt, std::uint64_t t, Precision master,
                  Eigen::Ref<Vector> w, Eigen::Ref<Vector> m, Eigen::Ref<Vector> v,
                  const Eigen::Ref<const Vector>& g) {
  if (g.size() != w.size()) throw ContractViolation("optimizer: gradient and weight sizes differ");
  auto r = [master](double x) { return round_to(x, master); };
  const double wd = opt.weight_decay;

  if (opt.kind == OptimizerKind::SGD) {
    for (Index i = 0; i < w.size(); ++i) {
      const double step = wd == 0.0 ? g[i] : r(g[i] + r(wd * w[i]));
      w[i] = r(w[i] - r(opt.lr * step));
    }
    return;
  }

  if (m.size() != w.size() || v.size() != w.size()) {
    throw ContractViolation("optimizer: moment buffers do not match the weights");
  }
  if (t == 0) throw ContractViolation("optimizer step counts from 1");
  const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(t));
  const bool decoupled = opt.kind == OptimizerKind::AdamW;
  for (Index i = 0; i < w.size(); ++i) {
    double gi = g[i];
    if (!decoupled && wd != 0.0) gi = r(gi + r(wd * w[i]));
    m[i] = r(r(opt.beta1 * m[i]) + r((1.0 - opt.beta1) * gi));
    v[i] = r(r(opt.beta2 * v[i]) + r((1.0 - opt.beta2) * r(gi * gi)));
    const double m_hat = r(m[i] / bc1);
    const double v_hat = r(v[i] / bc2);
    double step = r(m_hat / r(r(std::sqrt(v_hat)) + opt.eps));
    if (decoupled && wd != 0.0) step = r(step + r(wd * w[i]));
    w[i] = r(w[i] - r(opt.lr * step));
  }
}

}  // namespace dpzero
