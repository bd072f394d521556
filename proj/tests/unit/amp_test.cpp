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

#include <gtest/gtest.h>

#include "dpzero/amp/pipeline.hpp"
#include "dpzero/errors.hpp"
#include "dpzero/network/data.hpp"
#include "dpzero/numerics/rng.hpp"
#include "oracles.hpp"

namespace dpzero {
namespace {

NetworkSpec small_net() {
  NetworkSpec net;
  net.tokens = 3;
  net.layers = {{4, 5, Activation::Tanh, true, true}, {5, 2, Activation::Identity, true, true}};
  return net;
}

// Per-sample gradients by loops, clipped all-layer with vanilla threshold R, summed.
std::vector<RowMatrix> reference_dp_gradient(const NetworkSpec& net, const Parameters& params,
                                             const Batch& batch, double R) {
  const ForwardResult fwd = forward(net, params, batch, Precision::F64);
  const auto grads = backward_output_grads(net, params, fwd.cache,
                                           loss_output_grad(net, params, fwd.cache, batch));
  const Index T = net.tokens;
  std::vector<RowMatrix> sum;
  for (Index l = 0; l < net.depth(); ++l) {
    sum.push_back(RowMatrix::Zero(net.layers[l].d_in, net.layers[l].d_out));
    sum.push_back(RowMatrix::Zero(1, net.layers[l].d_out));
  }
  for (Index i = 0; i < batch.samples; ++i) {
    std::vector<RowMatrix> sample;
    double sq = 0;
    for (Index l = 0; l < net.depth(); ++l) {
      sample.push_back(oracle::per_sample_weight_grad(fwd.cache.inputs[l], grads[l], i, T));
      sample.push_back(grads[l].middleRows(i * T, T).colwise().sum());
      sq += oracle::squared_frobenius(sample[2 * l]) + oracle::squared_frobenius(sample[2 * l + 1]);
    }
    const double c = std::min(1.0, R / std::sqrt(sq));
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += c * sample[k];
  }
  return sum;
}

TEST(Pipeline, VariantSteps) {
  EXPECT_EQ(parse_variant("dp-1234s56"), Variant::Dp1234s56);
  EXPECT_FALSE(parse_variant("dp-9"));
  const ScalingPipeline p{Variant::Dp1234s56, 8.0};
  EXPECT_TRUE(p.is_private());
  EXPECT_EQ(p.loss_scale(), 8.0);
  EXPECT_EQ(p.threshold_scale(), 8.0);
  EXPECT_EQ(p.unscale(), 8.0);
  const ScalingPipeline q{Variant::Dp12346, 8.0};
  EXPECT_EQ(q.unscale(), 1.0);
  EXPECT_FALSE(ScalingPipeline({Variant::Std12356, 4.0}).is_private());
  EXPECT_THROW(ScalingPipeline({Variant::Std12356, 0.5}).validate(), ContractViolation);
}

TEST(Pipeline, Dp1346MatchesLoopReference) {
  const NetworkSpec net = small_net();
  const Parameters params = init_parameters(net, 3);
  const Batch batch = synthetic_batch(net, 4, 0, 0, 5);
  for (double R : {1e-2, 0.5, 1e6}) {
    const ClipPlan plan = ClipPlan::all_layer(net, ClipFunction::Vanilla, R);
    const PipelineResult got =
        run_pipeline({Variant::Dp1346, 1.0}, net, params, batch, plan, NoisePolicy{}, Precision::F64);
    const auto want = reference_dp_gradient(net, params, batch, R);
    for (std::size_t k = 0; k < want.size(); ++k) {
      EXPECT_LT((got.gradient[k] - want[k]).norm(), 1e-12 * (1 + want[k].norm())) << "R=" << R;
    }
  }
}

TEST(Pipeline, StandardVariantIsUnclippedSum) {
  const NetworkSpec net = small_net();
  const Parameters params = init_parameters(net, 3);
  const Batch batch = synthetic_batch(net, 4, 0, 0, 5);
  const ClipPlan plan = ClipPlan::all_layer(net, ClipFunction::Vanilla, 1e-6);
  const NoisePolicy loud{5.0, NoiseMode::SharedSeed, 1.0, 1};
  const PipelineResult got =
      run_pipeline({Variant::Std136, 1.0}, net, params, batch, plan, loud, Precision::F64);
  const auto want = reference_dp_gradient(net, params, batch, 1e300);
  for (std::size_t k = 0; k < want.size(); ++k) {
    EXPECT_LT((got.gradient[k] - want[k]).norm(), 1e-12 * want[k].norm());
  }
}

TEST(Pipeline, OverShrinkWhenAllSamplesClip) {
  const NetworkSpec net = small_net();
  const Parameters params = init_parameters(net, 5);
  const Batch batch = synthetic_batch(net, 6, 0, 0, 4);
  const ClipPlan plan = ClipPlan::layer_wise(net, ClipFunction::Vanilla, {1e-4});
  const NoisePolicy noise = NoisePolicy::for_plan(0.3, NoiseMode::SharedSeed, plan, 2);
  for (double S : {2.0, 1024.0, 65536.0}) {
    const auto base = run_pipeline({Variant::Dp1346, 1.0}, net, params, batch, plan, noise,
                                   Precision::F64);
    const auto shrunk = run_pipeline({Variant::Dp123456, S}, net, params, batch, plan, noise,
                                     Precision::F64);
    for (std::size_t k = 0; k < base.gradient.size(); ++k) {
      EXPECT_EQ(shrunk.gradient[k], base.gradient[k] / S) << "S=" << S;
    }
  }
}

TEST(Pipeline, ScaledThresholdMatchesUnscaled) {
  const NetworkSpec net = small_net();
  const Parameters params = init_parameters(net, 5);
  const Batch batch = synthetic_batch(net, 6, 0, 0, 4);
  for (ClipFunction fn : {ClipFunction::Vanilla, ClipFunction::Automatic}) {
    const ClipPlan plan = ClipPlan::layer_wise(net, fn, {0.3});
    const NoisePolicy noise = NoisePolicy::for_plan(0.7, NoiseMode::SharedSeed, plan, 4);
    const auto base = run_pipeline({Variant::Dp1346, 1.0}, net, params, batch, plan, noise,
                                   Precision::F64, 3);
    for (double S : {4.0, 1024.0}) {
      const auto scaled = run_pipeline({Variant::Dp1234s56, S}, net, params, batch, plan, noise,
                                       Precision::F64, 3);
      for (std::size_t k = 0; k < base.gradient.size(); ++k) {
        EXPECT_EQ(scaled.gradient[k], base.gradient[k]) << to_string(fn) << " S=" << S;
      }
    }
    const auto odd = run_pipeline({Variant::Dp1234s56, 1000.0}, net, params, batch, plan, noise,
                                  Precision::F64, 3);
    for (std::size_t k = 0; k < base.gradient.size(); ++k) {
      EXPECT_LT((odd.gradient[k] - base.gradient[k]).norm(), 1e-13 * base.gradient[k].norm());
    }
  }
}

NetworkSpec probe_net() {
  NetworkSpec net;
  net.layers = {{1, 9, Activation::Identity, true, true}};
  return net;
}

Batch probe_batch() {
  Batch b;
  b.samples = 1;
  b.inputs = RowMatrix::Ones(1, 1);
  b.targets.resize(1, 9);
  for (Index c = 0; c < 9; ++c) b.targets(0, c) = -std::pow(10.0, -static_cast<double>(c));
  return b;
}

TEST(Pipeline, LossScalingReducesUnderflowMonotonically) {
  const NetworkSpec net = probe_net();
  const Parameters zero = {{RowMatrix::Zero(1, 9), RowVector::Zero(9)}};
  const ClipPlan plan = ClipPlan::layer_wise(net, ClipFunction::Vanilla, {1.0});
  const double plain = run_pipeline({Variant::Std136, 1.0}, net, zero, probe_batch(), plan, {},
                                    Precision::F16).flow.underflow_fraction;
  EXPECT_GT(plain, 0.0);
  double previous = plain;
  for (double S : {2.0, 16.0, 128.0, 1024.0, 8192.0}) {
    const double f = run_pipeline({Variant::Std12356, S}, net, zero, probe_batch(), plan, {},
                                  Precision::F16).flow.underflow_fraction;
    EXPECT_LE(f, previous) << "S=" << S;
    previous = f;
  }
  EXPECT_LT(previous, plain);
}

TEST(Pipeline, UnderflowFractionCountsZeroedEntries) {
  std::vector<RowMatrix> ref = {RowMatrix::Constant(1, 4, 1e-9), RowMatrix(0, 0)};
  std::vector<RowMatrix> emu = {RowMatrix::Zero(1, 4), RowMatrix(0, 0)};
  emu[0](0, 0) = 1e-9;
  EXPECT_EQ(underflow_fraction(ref, emu), 0.75);
}

TEST(Overflow, GhostGramTerms) {
  RngStream rng(1, {0, Purpose::Test, 0, 0});
  const RowMatrix a = gaussian(rng, 8, 16, 1.0);
  RowMatrix g(8, 8);
  for (Index i = 0; i < g.size(); ++i) g.data()[i] = rng.uniform() < 0.5 ? -1 : 1;
  EXPECT_TRUE(detect_overflow_in_ghost_terms(a, 1000.0 * g, 4, Precision::F16).overflow);
  EXPECT_FALSE(detect_overflow_in_ghost_terms(a, 1000.0 * g, 4, Precision::BF16).overflow);
  EXPECT_FALSE(detect_overflow_in_ghost_terms(a, 0.5 * g, 4, Precision::F16).overflow);
}

TEST(Overflow, RecommendedBf16PathStaysFinite) {
  const NetworkSpec net = small_net();
  const Parameters params = init_parameters(net, 8);
  const Batch batch = synthetic_batch(net, 9, 0, 0, 4);
  const ClipPlan plan = ClipPlan::layer_wise(net, ClipFunction::Vanilla, {1.0});
  const NoisePolicy noise = NoisePolicy::for_plan(1.0, NoiseMode::SharedSeed, plan, 1);
  const auto r = run_pipeline({Variant::Dp1346, 1.0}, net, params, batch, plan, noise,
                              Precision::BF16);
  EXPECT_FALSE(r.flow.overflow);
  const auto f16 = run_pipeline({Variant::Dp12346, 65536.0 * 4}, net, params, batch, plan, noise,
                                Precision::F16);
  EXPECT_TRUE(f16.flow.overflow);
}

TEST(ClippedBackward, BookKeepingMatchesStreaming) {
  const NetworkSpec net = small_net();
  const Parameters params = init_parameters(net, 2);
  const Batch batch = synthetic_batch(net, 3, 0, 0, 4);
  const ClipPlan all = ClipPlan::all_layer(net, ClipFunction::Vanilla, 0.2);
  const ClipPlan wise = ClipPlan::layer_wise(net, ClipFunction::Vanilla, {0.2});
  const ScalingPipeline p{Variant::Dp1346, 1.0};
  EXPECT_FALSE(ClippedBackward(p, net, all, Precision::F64, 4).streams());
  EXPECT_TRUE(ClippedBackward(p, net, wise, Precision::F64, 4).streams());
  const auto bk = clipped_gradient(p, net, params, batch, all, Precision::F64);
  const auto want = reference_dp_gradient(net, params, batch, 0.2);
  for (std::size_t k = 0; k < want.size(); ++k) {
    EXPECT_LT((bk.sums[k] - want[k]).norm(), 1e-12 * want[k].norm());
  }
  ClippedBackward streaming(p, net, wise, Precision::F64, 4);
  EXPECT_THROW(streaming.layer_grad(0), ContractViolation);
}

}  // namespace
}  // namespace dpzero
