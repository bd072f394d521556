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

#include "dpzero/verify/suites.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "dpzero/amp/pipeline.hpp"
#include "dpzero/cost/cost_model.hpp"
#include "dpzero/io/simulation.hpp"
#include "dpzero/network/data.hpp"
#include "dpzero/numerics/rng.hpp"
#include "dpzero/zero/engine.hpp"
#include "dpzero/zero/reference.hpp"

namespace dpzero::verify {

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

Check check(std::string name, bool passed, std::string detail = {}) {
  return {std::move(name), passed, std::move(detail)};
}

Index uniform_int(RngStream& rng, Index lo, Index hi) {
  return lo + static_cast<Index>(rng.next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
}

double relative(double x, double ref) {
  const double scale = std::max(std::abs(ref), 1e-300);
  return std::abs(x - ref) / scale;
}

bool same_bits(const std::vector<RowMatrix>& a, const std::vector<RowMatrix>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].rows() != b[k].rows() || a[k].cols() != b[k].cols()) return false;
    if (!(a[k].array() == b[k].array()).all()) return false;
  }
  return true;
}

NetworkSpec random_smooth_network(RngStream& rng, Index tokens, LossKind loss) {
  NetworkSpec net;
  net.tokens = tokens;
  net.loss = loss;
  const Index depth = uniform_int(rng, 1, 3);
  Index d = uniform_int(rng, 1, 5);
  for (Index l = 0; l < depth; ++l) {
    const Index p = uniform_int(rng, 1, 5) + (loss == LossKind::CrossEntropy ? 1 : 0);
    const Activation act =
        (l + 1 == depth || rng.uniform() < 0.3) ? Activation::Identity : Activation::Tanh;
    net.layers.push_back({d, p, act, true, true});
    d = p;
  }
  return net;
}

NetworkSpec three_layer_network() {
  NetworkSpec net;
  net.tokens = 3;
  net.layers = {{5, 7, Activation::Tanh, true, true},
                {7, 6, Activation::ReLU, true, true},
                {6, 3, Activation::Identity, true, true}};
  return net;
}

}  // namespace

bool SuiteResult::passed() const {
  if (checks.empty()) return false;
  for (const Check& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "ghost-oracle",  "gradient-check", "sharding-transparency", "noise-calibration",
      "memory-formulas", "comm-accounting", "cost-agreement",    "amp-laws",
      "overflow",      "clipping-bound", "determinism"};
  return names;
}

SuiteResult ghost_oracle(const Options& options) {
  SuiteResult result{"ghost-oracle", {}};
  RngStream rng(options.seed, {0, Purpose::Test, 1, 0});
  double worst = 0;
  const int cases = 1000;
  for (int c = 0; c < cases; ++c) {
    const Index B = uniform_int(rng, 1, 8);
    const Index T = uniform_int(rng, 1, 16);
    const Index d = uniform_int(rng, 1, 32);
    const Index p = uniform_int(rng, 1, 32);
    const RowMatrix a = gaussian(rng, B * T, d, 1.0);
    const RowMatrix g = gaussian(rng, B * T, p, 1.0);
    const Vector ghost = psg_norm_ghost(a, g, T);
    const Vector inst = psg_norm_instantiated(a, g, T);
    const Vector mixed = psg_norm_mixed(a, g, T, Precision::F64, options.dispatch);
    for (Index i = 0; i < B; ++i) {
      worst = std::max({worst, relative(ghost[i], inst[i]), relative(mixed[i], inst[i])});
    }
  }
  result.checks.push_back(check("ghost equals instantiated on " + std::to_string(cases) +
                                    " random cases (rel < 1e-10)",
                                worst < 1e-10, "max relative error " + fmt(worst)));

  Index disagreements = 0;
  std::string first;
  for (Index T = 1; T <= 64; ++T) {
    for (Index d = 1; d <= 64; ++d) {
      for (Index p = 1; p <= 64; p += 3) {
        const NormMethod want = 2 * T * T <= d * p ? NormMethod::Ghost : NormMethod::Instantiated;
        if (options.dispatch(T, d, p) != want) {
          if (disagreements++ == 0) {
            first = "T=" + std::to_string(T) + " d=" + std::to_string(d) + " p=" + std::to_string(p);
          }
        }
      }
    }
  }
  result.checks.push_back(check("dispatch picks ghost iff 2T^2 <= d p", disagreements == 0,
                                disagreements == 0 ? "grid T, d <= 64 agrees"
                                                   : std::to_string(disagreements) +
                                                         " grid points disagree, first at " + first));
  return result;
}

SuiteResult gradient_check(const Options& options) {
  SuiteResult result{"gradient-check", {}};
  RngStream rng(options.seed, {0, Purpose::Test, 2, 0});
  const double h = 1e-5;
  double worst_sum = 0;
  double worst_sample = 0;
  const int configs = 100;
  for (int c = 0; c < configs; ++c) {
    const Index T = uniform_int(rng, 1, 3);
    const LossKind loss = c % 2 == 0 ? LossKind::SquaredError : LossKind::CrossEntropy;
    const NetworkSpec net = random_smooth_network(rng, T, loss);
    const Index B = uniform_int(rng, 1, 3);
    const Parameters params = init_parameters(net, options.seed + 100 + c);
    const Batch batch = synthetic_batch(net, options.seed + 200 + c, 0, 0, B);
    const Index j = uniform_int(rng, 0, B - 1);

    const ScalingPipeline plain{Variant::Std136, 1.0};
    const ClipPlan plan = ClipPlan::layer_wise(net, ClipFunction::Vanilla, {1.0});
    const MicroBatchGradient summed = clipped_gradient(plain, net, params, batch, plan, Precision::F64);

    const ForwardResult fwd = forward(net, params, batch, Precision::F64);
    const RowMatrix top = loss_output_grad(net, params, fwd.cache, batch);
    const auto grads = backward_output_grads(net, params, fwd.cache, top);
    Vector onehot = Vector::Zero(B);
    onehot[j] = 1.0;

    std::vector<RowMatrix> values = to_slots(params);
    auto objective = [&](const std::vector<RowMatrix>& v, bool one_sample) {
      const Vector losses = forward(net, from_slots(net, v), batch, Precision::F64).losses;
      return one_sample ? losses[j] : losses.sum();
    };
    for (std::size_t k = 0; k < values.size(); ++k) {
      const Index layer = static_cast<Index>(k / 2);
      const ParamGrad sample = param_grad(fwd.cache.inputs[layer], grads[layer], onehot, T);
      const RowMatrix analytic_sample = k % 2 == 0 ? sample.weight : RowMatrix(sample.bias);
      RowMatrix fd_sum(values[k].rows(), values[k].cols());
      RowMatrix fd_sample(values[k].rows(), values[k].cols());
      for (Index e = 0; e < values[k].size(); ++e) {
        const double saved = values[k].data()[e];
        values[k].data()[e] = saved + h;
        const double up_sum = objective(values, false);
        const double up_one = objective(values, true);
        values[k].data()[e] = saved - h;
        const double down_sum = objective(values, false);
        const double down_one = objective(values, true);
        values[k].data()[e] = saved;
        fd_sum.data()[e] = (up_sum - down_sum) / (2 * h);
        fd_sample.data()[e] = (up_one - down_one) / (2 * h);
      }
      auto err = [](const RowMatrix& x, const RowMatrix& fd) {
        return (x - fd).norm() / std::max(fd.norm(), 1e-8);
      };
      worst_sum = std::max(worst_sum, err(summed.sums[k], fd_sum));
      worst_sample = std::max(worst_sample, err(analytic_sample, fd_sample));
    }
  }
  result.checks.push_back(check("summed gradient matches central differences on " +
                                    std::to_string(configs) + " nets (rel < 1e-6)",
                                worst_sum < 1e-6, "max relative error " + fmt(worst_sum)));
  result.checks.push_back(check("per-sample gradient matches central differences (rel < 1e-6)",
                                worst_sample < 1e-6, "max relative error " + fmt(worst_sample)));
  return result;
}

SuiteResult sharding_transparency(const Options& options) {
  SuiteResult result{"sharding-transparency", {}};
  const NetworkSpec net = three_layer_network();
  const Parameters init = init_parameters(net, options.seed + 3);
  for (int stage = 0; stage <= 3; ++stage) {
    for (int workers : {1, 2, 4, 8}) {
      for (ClipFunction fn : {ClipFunction::Vanilla, ClipFunction::Automatic}) {
        for (Partition part : {Partition::LayerWise, Partition::AllLayer}) {
          if (part == Partition::AllLayer && stage >= 2) continue;
          TrainingSetup s;
          s.network = net;
          s.stage = *stage_from_int(stage);
          s.workers = workers;
          s.micro_batch = 2;
          s.accumulation = 2;
          s.clip = part == Partition::AllLayer ? ClipPlan::all_layer(net, fn, 1.0)
                                               : ClipPlan::layer_wise(net, fn, {0.5, 1.0, 2.0});
          s.noise = NoisePolicy::for_plan(0.8, NoiseMode::SharedSeed, s.clip, options.seed + 5);
          s.optimizer.kind = OptimizerKind::AdamW;
          s.optimizer.lr = 0.01;
          s.optimizer.weight_decay = 0.01;
          s.data_seed = options.seed + 7;
          ZeroEngine engine(s, init);
          ReferenceTrainer reference(s, init);
          bool same = true;
          int first_bad = -1;
          for (int t = 0; t < 10 && same; ++t) {
            const StepReport a = engine.train_step();
            const StepReport b = reference.train_step();
            same = same_bits(a.gradient, b.gradient) &&
                   same_bits(to_slots(engine.master_parameters()),
                             to_slots(reference.master_parameters())) &&
                   same_bits(to_slots(engine.working_parameters()),
                             to_slots(reference.working_parameters()));
            if (!same) first_bad = t;
          }
          const std::string name = std::string(to_string(s.stage)) + " N=" +
                                   std::to_string(workers) + " " + std::string(to_string(fn)) +
                                   " " + std::string(to_string(part));
          result.checks.push_back(check(name, same,
                                        same ? "10 steps bitwise equal"
                                             : "diverged at step " + std::to_string(first_bad)));
        }
      }
    }
  }
  return result;
}

SuiteResult noise_calibration(const Options& options) {
  SuiteResult result{"noise-calibration", {}};
  NetworkSpec net;
  net.layers = {{1, 1, Activation::Identity, true, true}, {1, 1, Activation::Identity, true, true}};
  const ClipPlan plan = ClipPlan::layer_wise(net, ClipFunction::Vanilla, {3.0, 4.0});
  const double sigma = 2.0;
  const double expected = sigma * plan.sensitivity();
  const int workers = 4;
  const Index length = 1000;
  const int steps = 100;
  for (NoiseMode mode : {NoiseMode::SharedSeed, NoiseMode::IndependentSeeds}) {
    const NoisePolicy policy = NoisePolicy::for_plan(sigma, mode, plan, options.seed + 11);
    Communicator comm(workers);
    const std::vector<Vector> zeros(workers, Vector::Zero(length));
    const ShardLayout layout = ShardLayout::make(length, workers);
    double sum = 0;
    double sum_sq = 0;
    for (int t = 0; t < steps; ++t) {
      const auto shards =
          noisy_reduce_scatter(comm, zeros, layout, policy, 1.0, t, 0, "z", Precision::F64);
      const Vector full = comm.all_gather(shards, "z");
      sum += full.sum();
      sum_sq += full.squaredNorm();
    }
    const double n = static_cast<double>(length) * steps;
    const double mean = sum / n;
    const double std = std::sqrt(sum_sq / n - mean * mean);
    const double err = std::abs(std / expected - 1.0);
    result.checks.push_back(check(std::string(to_string(mode)) + ": aggregated std = sigma ||R|| within 2%",
                                  err < 0.02,
                                  "std " + fmt(std) + " vs " + fmt(expected) + " over " +
                                      fmt(n) + " draws"));
  }
  return result;
}

SuiteResult memory_formulas(const Options&) {
  SuiteResult result{"memory-formulas", {}};
  const double psi = 1e9;
  bool unit = true;
  for (Stage s : {Stage::DDP, Stage::Zero1, Stage::Zero2, Stage::Zero3}) {
    unit = unit && memory_footprint(s, 1, psi, psi).total() == 16 * psi;
  }
  result.checks.push_back(check("one worker: 16 Psi at every stage", unit));
  const double expect[] = {16.0, 4.0 + 12.0 / 64, 2.0 + 14.0 / 64, 16.0 / 64};
  bool exact = true;
  for (int s = 0; s <= 3; ++s) {
    exact = exact && memory_footprint(*stage_from_int(s), 64, 1, 1).total() == expect[s];
  }
  result.checks.push_back(check("N=64: 16, 4+12/N, 2+14/N, 16/N bytes per parameter", exact));

  const double published[] = {7.6e9, 14.4e9, 128e9};
  for (int s = 1; s <= 3; ++s) {
    const double got = max_trainable_model(32e9, 64, *stage_from_int(s));
    const double err = std::abs(got / published[s - 1] - 1.0);
    result.checks.push_back(check("32GB x 64 workers, stage " + std::to_string(s) +
                                      ": max model within 1% of " + fmt(published[s - 1]),
                                  err < 0.01, "got " + fmt(got)));
  }

  NetworkSpec net = three_layer_network();
  net.layers[1].train_weight = false;
  const Parameters init = init_parameters(net, 1);
  bool audited = true;
  std::string detail;
  for (int s = 0; s <= 3; ++s) {
    for (int workers : {1, 3, 4}) {
      for (OptimizerKind kind : {OptimizerKind::SGD, OptimizerKind::AdamW}) {
        for (Precision p : {Precision::F16, Precision::F64}) {
          TrainingSetup setup;
          setup.network = net;
          setup.stage = *stage_from_int(s);
          setup.workers = workers;
          setup.optimizer.kind = kind;
          setup.precision = p;
          setup.amp = {Variant::Std136, 1.0};
          setup.clip = ClipPlan::layer_wise(net, ClipFunction::Vanilla, {1.0});
          const ZeroEngine engine(setup, init);
          const MemoryFootprint want = memory_footprint(
              setup.stage, workers, static_cast<double>(net.model_params()),
              static_cast<double>(net.trainable_params()), setup.optimizer.state_count(), p);
          if (!(engine.memory_audit() == want)) {
            audited = false;
            detail = "stage " + std::to_string(s) + " N=" + std::to_string(workers) +
                     " audit " + fmt(engine.memory_audit().total()) + " vs " + fmt(want.total());
          }
        }
      }
    }
  }
  result.checks.push_back(check("engine allocation audit equals the closed form", audited, detail));
  return result;
}

namespace {

TrainingSetup accounting_setup(const NetworkSpec& net, Stage stage, int workers, int accumulation) {
  TrainingSetup s;
  s.network = net;
  s.stage = stage;
  s.workers = workers;
  s.accumulation = accumulation;
  s.micro_batch = 2;
  s.clip = ClipPlan::layer_wise(net, ClipFunction::Vanilla, {1.0});
  s.noise = NoisePolicy::for_plan(0.5, NoiseMode::IndependentSeeds, s.clip, 9);
  return s;
}

CostInputs cost_for(const TrainingSetup& s) {
  CostInputs in;
  in.batch = static_cast<double>(s.micro_batch);
  in.tokens = static_cast<double>(s.network.tokens);
  in.psi_model = static_cast<double>(s.network.model_params());
  in.psi_train = static_cast<double>(s.network.trainable_params());
  in.workers = s.workers;
  in.stage = s.stage;
  in.accumulation = s.accumulation;
  in.peft = in.psi_train < in.psi_model;
  return in;
}

}  // namespace

SuiteResult comm_accounting(const Options& options) {
  SuiteResult result{"comm-accounting", {}};
  NetworkSpec full = three_layer_network();
  NetworkSpec peft = full;
  peft.layers[0].train_weight = peft.layers[0].train_bias = false;
  peft.layers[1].train_weight = false;
  bool agree = true;
  std::string detail;
  int configs = 0;
  for (const NetworkSpec* net : {&full, &peft}) {
    const Parameters init = init_parameters(*net, options.seed + 1);
    for (int s = 0; s <= 3; ++s) {
      for (int workers : {1, 2, 4}) {
        for (int accumulation : {1, 2}) {
          const TrainingSetup setup = accounting_setup(*net, *stage_from_int(s), workers, accumulation);
          ZeroEngine engine(setup, init);
          const double predicted = comm_volume(cost_for(setup));
          for (int t = 0; t < 2; ++t) {
            const StepReport r = engine.train_step();
            if (static_cast<double>(r.communicated) != predicted) {
              agree = false;
              detail = std::string(to_string(setup.stage)) + " N=" + std::to_string(workers) +
                       ": logged " + std::to_string(r.communicated) + " vs model " + fmt(predicted);
            }
          }
          ++configs;
        }
      }
    }
  }
  result.checks.push_back(check("collective log equals comm_volume on " + std::to_string(configs) +
                                    " configurations",
                                agree, detail));

  const Parameters init = init_parameters(full, options.seed + 1);
  ZeroEngine stage2(accounting_setup(full, Stage::Zero2, 4, 1), init);
  ZeroEngine stage3(accounting_setup(full, Stage::Zero3, 4, 1), init);
  const double v2 = static_cast<double>(stage2.train_step().communicated);
  const double v3 = static_cast<double>(stage3.train_step().communicated);
  result.checks.push_back(check("simulated stage 3 moves exactly 1.5x stage 2 at full training",
                                v3 == 1.5 * v2, fmt(v3) + " vs " + fmt(v2)));

  CostInputs in;
  in.psi_model = 1e9;
  in.psi_train = 1e9;
  in.workers = 64;
  in.stage = Stage::Zero2;
  const double c2 = comm_volume(in);
  in.stage = Stage::Zero3;
  const double c3 = comm_volume(in);
  result.checks.push_back(check("model: stage 3 is +50% over stage 2", c3 == 1.5 * c2));
  bool reduced = true;
  for (Stage s : {Stage::Zero1, Stage::Zero2}) {
    in.stage = s;
    in.psi_train = 1e9;
    const double dense = comm_volume(in);
    in.psi_train = 1e6;
    const double sparse = comm_volume(in);
    reduced = reduced && std::abs(dense / sparse / 1000.0 - 1.0) < 1e-12;
  }
  result.checks.push_back(check("model: Psi_train = 1e-3 Psi_model cuts stage 1/2 volume 1000x",
                                reduced));
  return result;
}

SuiteResult cost_agreement(const Options& options) {
  SuiteResult result{"cost-agreement", {}};
  CostInputs unit;
  const CostReport r = time_components(unit);
  result.checks.push_back(check("B=T=Psi=1: components (2, 2, 2, 0.666)",
                                r.forward == 2 && r.output_grad == 2 && r.param_grad == 2 &&
                                    r.dp_overhead == 0.666));
  const double speed = relative_speed(unit);
  result.checks.push_back(check("full training, no communication: relative speed 6/6.666",
                                std::abs(speed - 6.0 / 6.666) < 1e-15, fmt(speed)));
  CostInputs ckpt = unit;
  ckpt.checkpointing = true;
  const CostReport rc = time_components(ckpt);
  const double ratio = (r.forward + r.output_grad + r.param_grad) /
                       (rc.forward + rc.output_grad + rc.param_grad);
  result.checks.push_back(check("checkpointing doubles forward flops; compute ratio 0.75",
                                rc.forward == 2 * r.forward && ratio == 0.75, fmt(ratio)));
  CostInputs peft = unit;
  peft.psi_train = 0;
  result.checks.push_back(check("Psi_train = 0: relative speed 1", relative_speed(peft) == 1.0));

  SuiteResult comm = comm_accounting(options);
  for (Check& c : comm.checks) result.checks.push_back(std::move(c));
  SuiteResult mem = memory_formulas(options);
  result.checks.push_back(std::move(mem.checks.back()));
  return result;
}

SuiteResult amp_laws(const Options& options) {
  SuiteResult result{"amp-laws", {}};
  NetworkSpec net = three_layer_network();
  const Parameters params = init_parameters(net, options.seed + 21);
  const Batch batch = synthetic_batch(net, options.seed + 22, 0, 0, 4);
  const ClipPlan tight = ClipPlan::layer_wise(net, ClipFunction::Vanilla, {1e-3});
  const NoisePolicy noise = NoisePolicy::for_plan(0.5, NoiseMode::SharedSeed, tight, options.seed);
  const double S = 1024;

  const PipelineResult base = run_pipeline({Variant::Dp1346, 1.0}, net, params, batch, tight, noise,
                                           Precision::F64);
  const PipelineResult shrunk = run_pipeline({Variant::Dp123456, S}, net, params, batch, tight,
                                             noise, Precision::F64);
  bool all_clip = (base.factors.array() < 1.0).all();
  bool over_shrink = true;
  for (std::size_t k = 0; k < base.gradient.size(); ++k) {
    over_shrink = over_shrink && (shrunk.gradient[k].array() == (base.gradient[k] / S).array()).all();
  }
  result.checks.push_back(check("every sample clipped at R = 1e-3", all_clip));
  result.checks.push_back(check("dp-123456 = dp-1346 / S exactly (S = 1024)", over_shrink));

  bool equivalent = true;
  double worst = 0;
  for (double scale : {1.0, 8.0, 1024.0, 1000.0}) {
    for (const ClipPlan& plan : {tight, ClipPlan::layer_wise(net, ClipFunction::Vanilla, {0.7}),
                                 ClipPlan::all_layer(net, ClipFunction::Automatic, 1.0)}) {
      const PipelineResult a = run_pipeline({Variant::Dp1346, 1.0}, net, params, batch, plan,
                                            noise, Precision::F64);
      const PipelineResult b = run_pipeline({Variant::Dp1234s56, scale}, net, params, batch, plan,
                                            noise, Precision::F64);
      for (std::size_t k = 0; k < a.gradient.size(); ++k) {
        if (std::exp2(std::round(std::log2(scale))) == scale) {
          equivalent = equivalent && (a.gradient[k].array() == b.gradient[k].array()).all();
        } else {
          worst = std::max(worst, (a.gradient[k] - b.gradient[k]).norm() / a.gradient[k].norm());
        }
      }
    }
  }
  result.checks.push_back(check("dp-1234s56 = dp-1346 exactly for power-of-two S", equivalent));
  result.checks.push_back(check("dp-1234s56 = dp-1346 within 1e-13 for S = 1000", worst < 1e-13,
                                "max relative difference " + fmt(worst)));

  // Residuals 10^-8 .. 10^0 on a single identity layer.
  NetworkSpec probe;
  probe.layers = {{1, 9, Activation::Identity, true, true}};
  Parameters zero = {LayerParams{RowMatrix::Zero(1, 9), RowVector::Zero(9)}};
  Batch spread;
  spread.samples = 1;
  spread.inputs = RowMatrix::Ones(1, 1);
  spread.targets.resize(1, 9);
  for (Index c = 0; c < 9; ++c) spread.targets(0, c) = -std::pow(10.0, -static_cast<double>(c));
  const ClipPlan any = ClipPlan::layer_wise(probe, ClipFunction::Vanilla, {1.0});
  const NoisePolicy quiet{};
  const double plain = run_pipeline({Variant::Std136, 1.0}, probe, zero, spread, any, quiet,
                                    Precision::F16).flow.underflow_fraction;
  const double scaled = run_pipeline({Variant::Std12356, S}, probe, zero, spread, any, quiet,
                                     Precision::F16).flow.underflow_fraction;
  result.checks.push_back(check("fp16 underflow: std-12356 strictly below std-136",
                                scaled < plain,
                                "std-136 " + fmt(plain) + ", std-12356 " + fmt(scaled)));
  return result;
}

SuiteResult overflow(const Options& options) {
  SuiteResult result{"overflow", {}};
  RngStream rng(options.seed, {0, Purpose::Test, 8, 0});
  const Index B = 2;
  const Index T = 4;
  const RowMatrix a = gaussian(rng, B * T, 16, 1.0);
  RowMatrix g = RowMatrix::Ones(B * T, 8);
  for (Index i = 0; i < g.size(); ++i) g.data()[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
  const RowMatrix scaled = g * 1000.0;
  const bool f16 = detect_overflow_in_ghost_terms(a, scaled, T, Precision::F16).overflow;
  const bool bf16 = detect_overflow_in_ghost_terms(a, scaled, T, Precision::BF16).overflow;
  const bool unscaled = detect_overflow_in_ghost_terms(a, g * 0.5, T, Precision::F16).overflow;
  result.checks.push_back(check("fp16 Gram of S=1e3-scaled unit gradients overflows", f16));
  result.checks.push_back(check("bf16 Gram of the same gradients does not overflow", !bf16));
  result.checks.push_back(check("fp16 with S=1 and magnitudes <= 1 does not overflow", !unscaled));
  return result;
}

SuiteResult clipping_bound(const Options& options) {
  SuiteResult result{"clipping-bound", {}};
  RngStream rng(options.seed, {0, Purpose::Test, 9, 0});
  double worst = 0;
  Index samples = 0;
  for (int c = 0; c < 200; ++c) {
    const Index T = uniform_int(rng, 1, 4);
    NetworkSpec net = random_smooth_network(rng, T, LossKind::SquaredError);
    const Index B = uniform_int(rng, 1, 6);
    const Parameters params = init_parameters(net, options.seed + 300 + c);
    const Batch batch = synthetic_batch(net, options.seed + 400 + c, 0, 0, B);
    const double R = std::pow(10.0, rng.uniform() * 3 - 2);
    const ClipPlan plan = c % 2 == 0 ? ClipPlan::all_layer(net, ClipFunction::Vanilla, R)
                                     : ClipPlan::layer_wise(net, ClipFunction::Vanilla, {R});
    const ForwardResult fwd = forward(net, params, batch, Precision::F64);
    const auto grads = backward_output_grads(net, params, fwd.cache,
                                             loss_output_grad(net, params, fwd.cache, batch));
    std::vector<LayerNorms> norms;
    for (Index l = 0; l < net.depth(); ++l) {
      norms.push_back(layer_norms(net.layers[l], fwd.cache.inputs[l], grads[l], T));
    }
    const Eigen::MatrixXd factors = clip_factors(aggregate_norms(plan, norms), plan);
    for (Index i = 0; i < B; ++i) {
      Vector group_sq = Vector::Zero(plan.groups());
      for (Index l = 0; l < net.depth(); ++l) {
        const int m = plan.group_of_layer[l];
        Vector scale = Vector::Zero(B);
        scale[i] = factors(i, m);
        const ParamGrad g = param_grad(fwd.cache.inputs[l], grads[l], scale, T);
        group_sq[m] += g.weight.squaredNorm() + g.bias.squaredNorm();
      }
      for (int m = 0; m < plan.groups(); ++m) {
        worst = std::max(worst, std::sqrt(group_sq[m]) / plan.thresholds[m]);
      }
      ++samples;
    }
  }
  result.checks.push_back(check("clipped group norms <= R (1 + 1e-12) on " +
                                    std::to_string(samples) + " samples",
                                worst <= 1 + 1e-12, "max ||C g|| / R = " + fmt(worst)));
  return result;
}

SuiteResult determinism(const Options& options) {
  SuiteResult result{"determinism", {}};
  for (Precision p : {Precision::F64, Precision::BF16}) {
    RunConfig cfg;
    cfg.setup = accounting_setup(three_layer_network(), Stage::Zero3, 4, 2);
    cfg.setup.precision = p;
    cfg.setup.noise.seed = options.seed;
    cfg.init_seed = options.seed;
    cfg.steps = 5;
    const SimulationOutputs a = simulate(cfg);
    const SimulationOutputs b = simulate(cfg);
    const bool same = a.trajectory == b.trajectory && a.collectives == b.collectives &&
                      a.flow == b.flow && a.summary == b.summary;
    result.checks.push_back(check(std::string(to_string(p)) + ": two runs give identical traces",
                                  same));
  }
  return result;
}

std::optional<std::vector<SuiteResult>> run(std::string_view name, const Options& options) {
  using Fn = SuiteResult (*)(const Options&);
  static const std::vector<std::pair<std::string_view, Fn>> table = {
      {"ghost-oracle", ghost_oracle},
      {"gradient-check", gradient_check},
      {"sharding-transparency", sharding_transparency},
      {"noise-calibration", noise_calibration},
      {"memory-formulas", memory_formulas},
      {"comm-accounting", comm_accounting},
      {"cost-agreement", cost_agreement},
      {"amp-laws", amp_laws},
      {"overflow", overflow},
      {"clipping-bound", clipping_bound},
      {"determinism", determinism}};
  std::vector<SuiteResult> results;
  for (const auto& [suite, fn] : table) {
    if (name == "all" || name == suite) results.push_back(fn(options));
  }
  if (results.empty()) return std::nullopt;
  return results;
}

}  // namespace dpzero::verify
