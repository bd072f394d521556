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

#include "dpzero/zero/reference.hpp"

#include "dpzero/errors.hpp"
#include "dpzero/network/data.hpp"

namespace dpzero {

ReferenceTrainer::ReferenceTrainer(TrainingSetup setup, const Parameters& initial)
    : setup_(std::move(setup)) {
  setup_.validate();
  slots_ = param_slots(setup_.network);
  const std::vector<RowMatrix> init = to_slots(initial);
  if (init.size() != slots_.size()) throw ContractViolation("initial parameters do not match");
  const Precision p = setup_.precision;
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    working_.push_back(round_to(init[k], p));
    master_.push_back(slots_[k].trainable ? round_to(init[k], master_precision(p)) : working_[k]);
    const RowMatrix zero = RowMatrix::Zero(slots_[k].rows, slots_[k].cols);
    m_.push_back(zero);
    v_.push_back(zero);
  }
}

StepReport ReferenceTrainer::train_step() {
  const NetworkSpec& net = setup_.network;
  const ScalingPipeline& amp = setup_.amp;
  const int groups = setup_.workers;
  const int A = setup_.accumulation;
  const Index B = setup_.micro_batch;
  const Precision p = setup_.precision;
  const Precision mp = master_precision(p);
  const Parameters params = from_slots(net, working_);

  StepReport report;
  report.step = step_;
  report.gradient.resize(slots_.size());
  report.losses.resize(setup_.logical_batch());

  std::vector<RowMatrix> total(slots_.size());
  for (int r = 0; r < groups; ++r) {
    std::vector<RowMatrix> group(slots_.size());
    for (int j = 0; j < A; ++j) {
      const Index micro = static_cast<Index>(r) * A + j;
      const Batch batch = synthetic_batch(net, setup_.data_seed, step_, micro * B, B);
      MicroBatchGradient mb = clipped_gradient(amp, net, params, batch, setup_.clip, p,
                                               setup_.checkpointing, setup_.dispatch);
      report.losses.segment(micro * B, B) = mb.losses;
      report.flow.merge(mb.flow);
      for (std::size_t k = 0; k < slots_.size(); ++k) {
        if (!slots_[k].trainable) continue;
        if (j == 0) {
          group[k] = std::move(mb.sums[k]);
        } else {
          group[k] += mb.sums[k];
          round_in_place(group[k], p);
        }
      }
    }
    for (std::size_t k = 0; k < slots_.size(); ++k) {
      if (!slots_[k].trainable) continue;
      if (amp.is_private()) {
        RngStream rng = setup_.noise.stream(r, step_, k);
        group[k] = add_gaussian_noise(
            group[k], setup_.noise.worker_std(groups) * amp.threshold_scale(), rng, p);
      }
      if (r == 0) {
        total[k] = std::move(group[k]);
      } else {
        total[k] += group[k];
        round_in_place(total[k], p);
      }
    }
  }

  const double batch = static_cast<double>(setup_.logical_batch());
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    if (!slots_[k].trainable) continue;
    RowMatrix g = round_to(total[k], mp);
    if (amp.steps().scale_down) {
      g /= amp.scale;
      round_in_place(g, mp);
    }
    if (has_infinity(g)) report.flow.overflow = true;
    report.gradient[k] = g;
    g /= batch;
    round_in_place(g, mp);
    Eigen::Map<Vector> w(master_[k].data(), master_[k].size());
    Eigen::Map<Vector> m(m_[k].data(), setup_.optimizer.has_moments() ? m_[k].size() : 0);
    Eigen::Map<Vector> v(v_[k].data(), setup_.optimizer.has_moments() ? v_[k].size() : 0);
    apply_update(setup_.optimizer, step_ + 1, mp, w, m, v,
                 Eigen::Map<const Vector>(g.data(), g.size()));
    working_[k] = round_to(master_[k], p);
  }
  ++step_;
  return report;
}

Parameters ReferenceTrainer::master_parameters() const { return from_slots(setup_.network, master_); }

Parameters ReferenceTrainer::working_parameters() const {
  return from_slots(setup_.network, working_);
}

}  // namespace dpzero
