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

#include "dpzero/zero/engine.hpp"

#include <string>
#include <utility>

#include "dpzero/errors.hpp"
#include "dpzero/network/data.hpp"

namespace dpzero {

namespace {

Vector flatten(const RowMatrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

RowMatrix unflatten(const Vector& v, Index rows, Index cols) {
  return Eigen::Map<const RowMatrix>(v.data(), rows, cols);
}

int rank_in(const ShardLayout& layout, int rank) { return layout.workers == 1 ? 0 : rank; }

}  // namespace

void TrainingSetup::validate() const {
  network.validate();
  if (workers <= 0) throw ContractViolation("worker count must be positive");
  if (accumulation <= 0) throw ContractViolation("accumulation steps must be positive");
  if (micro_batch <= 0) throw ContractViolation("micro-batch size must be positive");
  if (!(noise.sigma >= 0.0)) throw ContractViolation("noise multiplier must be >= 0");
  amp.validate();
  optimizer.validate();
  if (network.trainable_params() == 0) throw ContractViolation("network has no trainable parameters");
  if (!amp.is_private()) return;
  clip.validate(network);
  if (!clip.streams_per_layer() && shards_gradients(stage)) {
    throw UnsupportedConfiguration(
        "clipping groups spanning several layers are not supported with " +
        std::string(to_string(stage)) + "; use layer-wise clipping or stage 0/1");
  }
}

std::vector<OwnedShard> noisy_reduce_scatter(Communicator& comm,
                                             std::span<const Vector> worker_sums,
                                             const ShardLayout& layout, const NoisePolicy& noise,
                                             double threshold_scale, std::uint64_t step,
                                             std::uint64_t slot, std::string_view tensor,
                                             Precision precision) {
  const int n = comm.size();
  if (static_cast<int>(worker_sums.size()) != n) {
    throw ContractViolation("noisy_reduce_scatter: expected one sum per worker");
  }
  const double share = noise.worker_std(n) * threshold_scale;
  std::vector<Vector> noisy(n);
  for (int r = 0; r < n; ++r) {
    RngStream rng = noise.stream(r, step, slot);
    const RowMatrix row = worker_sums[r].transpose();
    noisy[r] = add_gaussian_noise(row, share, rng, precision).transpose();
  }
  return comm.reduce_scatter(noisy, layout, tensor, precision);
}

ZeroEngine::ZeroEngine(TrainingSetup setup, const Parameters& initial)
    : setup_(std::move(setup)), comm_(setup_.workers) {
  setup_.validate();
  if (static_cast<Index>(initial.size()) != setup_.network.depth()) {
    throw ContractViolation("initial parameters do not match network depth");
  }
  slots_ = param_slots(setup_.network);
  const std::vector<RowMatrix> init = to_slots(initial);
  const Precision p = setup_.precision;
  const Precision mp = master_precision(p);
  const int n = setup_.workers;

  workers_.assign(n, Worker(slots_.size()));
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    const ParamSlot& slot = slots_[k];
    if (init[k].rows() != slot.rows || init[k].cols() != slot.cols) {
      throw ContractViolation("initial " + slot_name(slot) + " has the wrong shape");
    }
    const Vector full = flatten(init[k]);
    const Vector working = round_to(full, p);
    const Vector master = round_to(full, mp);
    const ShardLayout pl = param_layout(slot.size());
    const ShardLayout gl = grad_layout(slot.size());
    const ShardLayout ol = optimizer_layout(slot.size());
    for (int r = 0; r < n; ++r) {
      SlotState& s = workers_[r][k];
      s.param = OwnedShard::slice(pl, rank_in(pl, r), working);
      if (!slot.trainable) continue;
      s.grad = OwnedShard(gl, rank_in(gl, r));
      s.master = OwnedShard::slice(ol, rank_in(ol, r), master);
      if (setup_.optimizer.has_moments()) {
        s.m = OwnedShard(ol, rank_in(ol, r));
        s.v = OwnedShard(ol, rank_in(ol, r));
      }
    }
  }
}

ShardLayout ZeroEngine::param_layout(Index numel) const {
  return shards_parameters(setup_.stage) ? ShardLayout::make(numel, setup_.workers)
                                         : ShardLayout::whole(numel);
}

ShardLayout ZeroEngine::grad_layout(Index numel) const {
  return shards_gradients(setup_.stage) ? ShardLayout::make(numel, setup_.workers)
                                        : ShardLayout::whole(numel);
}

ShardLayout ZeroEngine::optimizer_layout(Index numel) const {
  return shards_optimizer(setup_.stage) ? ShardLayout::make(numel, setup_.workers)
                                        : ShardLayout::whole(numel);
}

std::vector<OwnedShard> ZeroEngine::slot_shards(std::size_t slot,
                                                OwnedShard SlotState::*member) const {
  std::vector<OwnedShard> shards;
  shards.reserve(workers_.size());
  for (const Worker& w : workers_) shards.push_back(w[slot].*member);
  return shards;
}

LayerParams ZeroEngine::gather_layer(Index layer) {
  LayerParams out;
  for (int part = 0; part < 2; ++part) {
    const std::size_t k = 2 * layer + part;
    const std::vector<OwnedShard> shards = slot_shards(k, &SlotState::param);
    const Vector full = comm_.all_gather(shards, slot_name(slots_[k]));
    const RowMatrix m = unflatten(full, slots_[k].rows, slots_[k].cols);
    if (part == 0) {
      out.weight = m;
    } else {
      out.bias = m.row(0);
    }
  }
  return out;
}

LayerParams ZeroEngine::local_layer(int rank, Index layer) const {
  const SlotState& w = workers_[rank][2 * layer];
  const SlotState& b = workers_[rank][2 * layer + 1];
  if (w.param.layout().workers != 1) {
    throw OwnershipViolation("rank " + std::to_string(rank) + " holds only a shard of layer " +
                             std::to_string(layer) + "; gather it first");
  }
  LayerParams out;
  out.weight = unflatten(w.param.owned(), slots_[2 * layer].rows, slots_[2 * layer].cols);
  out.bias = b.param.owned().transpose();
  return out;
}

StepReport ZeroEngine::train_step() {
  const NetworkSpec& net = setup_.network;
  const int n = setup_.workers;
  const int A = setup_.accumulation;
  const Index B = setup_.micro_batch;
  const Index L = net.depth();
  const Precision p = setup_.precision;
  const Precision mp = master_precision(p);
  const bool gathers = shards_parameters(setup_.stage);
  const std::uint64_t step = step_;
  const Index volume_before = comm_.log().volume();

  StepReport report;
  report.step = step;
  report.gradient.resize(slots_.size());
  report.losses.resize(setup_.logical_batch());

  std::vector<Parameters> replicas(n);
  if (!gathers) {
    for (int r = 0; r < n; ++r) {
      for (Index l = 0; l < L; ++l) replicas[r].push_back(local_layer(r, l));
    }
  }
  Parameters held(L);
  auto params_of = [&](int r) -> const Parameters& { return gathers ? held : replicas[r]; };
  auto gather = [&](Index l) {
    comm_.set_context(step, l);
    held[l] = gather_layer(l);
  };

  std::vector<std::vector<RowMatrix>> accumulated(n, std::vector<RowMatrix>(slots_.size()));
  for (int j = 0; j < A; ++j) {
    std::vector<Batch> batches(n);
    std::vector<ActivationCache> caches(n);
    std::vector<RowMatrix> a(n);
    for (int r = 0; r < n; ++r) {
      const Index micro = static_cast<Index>(r) * A + j;
      batches[r] = synthetic_batch(net, setup_.data_seed, step, micro * B, B);
      caches[r].samples = B;
      caches[r].tokens = net.tokens;
      caches[r].precision = p;
      caches[r].checkpointed = setup_.checkpointing;
      a[r] = round_to(batches[r].inputs, p);
    }

    for (Index l = 0; l < L; ++l) {
      if (gathers) gather(l);
      for (int r = 0; r < n; ++r) {
        RowMatrix s = layer_forward(params_of(r)[l], a[r], p);
        RowMatrix next = activate(net.layers[l].activation, s, p);
        caches[r].inputs.push_back(std::move(a[r]));
        if (!setup_.checkpointing) caches[r].pre_activations.push_back(std::move(s));
        a[r] = std::move(next);
      }
      if (gathers) held[l] = LayerParams{};
    }
    for (int r = 0; r < n; ++r) {
      caches[r].output = std::move(a[r]);
      const Vector losses = per_sample_losses(net, caches[r].output, batches[r], p);
      if (p == Precision::F64 && !losses.allFinite()) {
        throw NumericFault("non-finite per-sample loss in F64 forward pass");
      }
      if (has_infinity(caches[r].output)) report.flow.overflow = true;
      report.losses.segment((static_cast<Index>(r) * A + j) * B, B) = losses;
    }

    std::vector<ClippedBackward> backward;
    backward.reserve(n);
    for (int r = 0; r < n; ++r) {
      backward.emplace_back(setup_.amp, net, setup_.clip, p, B, setup_.dispatch);
    }
    std::vector<std::vector<RowMatrix>> sums(n, std::vector<RowMatrix>(slots_.size()));
    auto store = [&](int r, Index l, ParamGrad g) {
      if (net.layers[l].train_weight) sums[r][2 * l] = std::move(g.weight);
      if (net.layers[l].train_bias) sums[r][2 * l + 1] = g.bias;
    };

    const Index top = L - 1;
    std::vector<RowMatrix> grad_s(n);
    if (gathers) gather(top);
    for (int r = 0; r < n; ++r) {
      grad_s[r] = loss_output_grad(net, params_of(r), caches[r], batches[r], setup_.amp.loss_scale());
    }
    for (Index l = top; l >= 0; --l) {
      if (l < top) {
        if (gathers) gather(l);
        for (int r = 0; r < n; ++r) {
          const RowMatrix s = pre_activation(net, params_of(r), caches[r], l);
          grad_s[r] = propagate_output_grad(net.layers[l], params_of(r)[l + 1], grad_s[r], s, p);
        }
        if (gathers) held[l + 1] = LayerParams{};
      }
      for (int r = 0; r < n; ++r) {
        if (auto g = backward[r].on_output_grad(l, caches[r].inputs[l], grad_s[r])) {
          store(r, l, std::move(*g));
        }
      }
    }
    if (gathers) held[0] = LayerParams{};
    for (int r = 0; r < n; ++r) {
      if (!backward[r].streams()) {
        for (Index l = 0; l < L; ++l) {
          if (net.layers[l].trainable()) store(r, l, backward[r].layer_grad(l));
        }
      }
      report.flow.merge(backward[r].flow());
    }

    for (int r = 0; r < n; ++r) {
      for (std::size_t k = 0; k < slots_.size(); ++k) {
        if (!slots_[k].trainable) continue;
        if (j == 0) {
          accumulated[r][k] = std::move(sums[r][k]);
        } else {
          accumulated[r][k] += sums[r][k];
          round_in_place(accumulated[r][k], p);
        }
      }
    }
  }

  const ScalingPipeline& amp = setup_.amp;
  const double batch = static_cast<double>(setup_.logical_batch());
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    const ParamSlot& slot = slots_[k];
    if (!slot.trainable) continue;
    const std::string name = slot_name(slot);
    comm_.set_context(step, slot.layer);

    std::vector<Vector> contributions(n);
    for (int r = 0; r < n; ++r) contributions[r] = flatten(accumulated[r][k]);
    const ShardLayout reduce_layout = ShardLayout::make(slot.size(), n);
    std::vector<OwnedShard> reduced =
        amp.is_private()
            ? noisy_reduce_scatter(comm_, contributions, reduce_layout, setup_.noise,
                                   amp.threshold_scale(), step, k, name, p)
            : comm_.reduce_scatter(contributions, reduce_layout, name, p);

    if (setup_.stage == Stage::DDP) {
      const Vector full = comm_.all_gather(reduced, name);
      for (int r = 0; r < n; ++r) workers_[r][k].grad.owned() = full;
    } else if (setup_.stage == Stage::Zero1) {
      for (int r = 0; r < n; ++r) {
        OwnedShard& g = workers_[r][k].grad;
        g.owned().setZero();
        g.owned().segment(reduced[r].begin(), reduce_layout.owned(r)) = reduced[r].owned();
      }
    } else {
      for (int r = 0; r < n; ++r) workers_[r][k].grad = std::move(reduced[r]);
    }

    Vector observed = Vector::Zero(slot.size());
    for (int r = 0; r < n; ++r) {
      SlotState& s = workers_[r][k];
      const Index begin = s.master.begin();
      const Index count = s.master.end() - begin;
      Vector g = s.grad.layout() == s.master.layout()
                     ? Vector(s.grad.owned())
                     : Vector(s.grad.owned().segment(begin, count));
      round_in_place(g, mp);
      if (amp.steps().scale_down) {
        g /= amp.scale;
        round_in_place(g, mp);
      }
      if (has_infinity(g)) report.flow.overflow = true;
      observed.segment(begin, count) = g;
      g /= batch;
      round_in_place(g, mp);
      apply_update(setup_.optimizer, step + 1, mp, s.master.owned(), s.m.owned(), s.v.owned(), g);
    }
    report.gradient[k] = unflatten(observed, slot.rows, slot.cols);

    switch (setup_.stage) {
      case Stage::DDP:
        for (int r = 0; r < n; ++r) {
          workers_[r][k].param.owned() = round_to(workers_[r][k].master.owned(), p);
        }
        break;
      case Stage::Zero1:
      case Stage::Zero2: {
        std::vector<OwnedShard> updated;
        updated.reserve(n);
        for (int r = 0; r < n; ++r) {
          OwnedShard shard(workers_[r][k].master.layout(), r);
          shard.owned() = round_to(workers_[r][k].master.owned(), p);
          updated.push_back(std::move(shard));
        }
        const Vector full = comm_.all_gather(updated, name);
        for (int r = 0; r < n; ++r) workers_[r][k].param.owned() = full;
        break;
      }
      case Stage::Zero3:
        for (int r = 0; r < n; ++r) {
          workers_[r][k].param.owned() = round_to(workers_[r][k].master.owned(), p);
        }
        break;
    }
  }

  report.communicated = comm_.log().volume() - volume_before;
  ++step_;
  return report;
}

namespace {

Vector assemble(const std::vector<OwnedShard>& shards) {
  const ShardLayout& layout = shards.front().layout();
  if (layout.workers == 1) return shards.front().owned();
  Vector full(layout.numel);
  for (const OwnedShard& s : shards) full.segment(s.begin(), s.end() - s.begin()) = s.owned();
  return full;
}

}  // namespace

Parameters ZeroEngine::working_parameters() const {
  std::vector<RowMatrix> out(slots_.size());
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    out[k] = unflatten(assemble(slot_shards(k, &SlotState::param)), slots_[k].rows, slots_[k].cols);
  }
  return from_slots(setup_.network, out);
}

Parameters ZeroEngine::master_parameters() const {
  std::vector<RowMatrix> out(slots_.size());
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    auto member = slots_[k].trainable ? &SlotState::master : &SlotState::param;
    out[k] = unflatten(assemble(slot_shards(k, member)), slots_[k].rows, slots_[k].cols);
  }
  return from_slots(setup_.network, out);
}

MemoryFootprint ZeroEngine::memory_audit() const {
  auto held = [](const OwnedShard& s) { return static_cast<double>(s.end() - s.begin()); };
  double params = 0;
  double grads = 0;
  double states = 0;
  for (const Worker& w : workers_) {
    for (std::size_t k = 0; k < slots_.size(); ++k) {
      params += held(w[k].param);
      if (!slots_[k].trainable) continue;
      grads += held(w[k].grad);
      states += held(w[k].master);
      if (setup_.optimizer.has_moments()) states += held(w[k].m) + held(w[k].v);
    }
  }
  const double h = static_cast<double>(bytes_per_element(setup_.precision));
  const double mb = static_cast<double>(bytes_per_element(master_precision(setup_.precision)));
  const double n = setup_.workers;
  return {params * h / n, grads * h / n, states * mb / n};
}

}  // namespace dpzero
