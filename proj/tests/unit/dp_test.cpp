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

#include "dpzero/dp/clipping.hpp"
#include "dpzero/dp/noise.hpp"
#include "dpzero/dp/norms.hpp"
#include "dpzero/errors.hpp"
#include "dpzero/numerics/rng.hpp"
#include "oracles.hpp"

namespace dpzero {
namespace {

Vector oracle_weight_norms(const RowMatrix& a, const RowMatrix& g, Index T) {
  Vector out(a.rows() / T);
  for (Index i = 0; i < out.size(); ++i) {
    out[i] = oracle::squared_frobenius(oracle::per_sample_weight_grad(a, g, i, T));
  }
  return out;
}

double max_relative(const Vector& x, const Vector& ref) {
  double worst = 0;
  for (Index i = 0; i < x.size(); ++i) {
    worst = std::max(worst, std::abs(x[i] - ref[i]) / std::max(std::abs(ref[i]), 1e-300));
  }
  return worst;
}

TEST(PerSampleNorms, TrivialCases) {
  RngStream rng(1, {0, Purpose::Test, 0, 0});
  const RowMatrix a = gaussian(rng, 6, 4, 1.0);
  const RowMatrix g = gaussian(rng, 6, 3, 1.0);
  EXPECT_TRUE((psg_norm_instantiated(RowMatrix::Zero(6, 4), g, 2).array() == 0).all());
  EXPECT_TRUE((psg_norm_ghost(a, RowMatrix::Zero(6, 3), 2).array() == 0).all());
  const Vector one = psg_norm_ghost(a.topRows(1), g.topRows(1), 1);
  EXPECT_NEAR(one[0], a.row(0).squaredNorm() * g.row(0).squaredNorm(), 1e-12);
}

TEST(PerSampleNorms, OrthogonalTokensGiveDiagonalGrams) {
  RowMatrix a = RowMatrix::Zero(3, 3);
  a(0, 0) = 2;
  a(1, 1) = -1;
  a(2, 2) = 3;
  RowMatrix g = RowMatrix::Zero(3, 2);
  g(0, 0) = 1;
  g(1, 1) = 4;
  g(2, 0) = 0.5;
  g(2, 1) = 0.5;
  double want = 0;
  for (Index t = 0; t < 3; ++t) want += a.row(t).squaredNorm() * g.row(t).squaredNorm();
  EXPECT_NEAR(psg_norm_ghost(a, g, 3)[0], want, 1e-12);
}

TEST(PerSampleNorms, GhostAndInstantiatedMatchLoopOracle) {
  RngStream rng(2, {0, Purpose::Test, 0, 0});
  for (int c = 0; c < 300; ++c) {
    const Index B = 1 + rng.next_u64() % 8;
    const Index T = 1 + rng.next_u64() % 16;
    const Index d = c < 20 ? 1 : 1 + rng.next_u64() % 32;
    const Index p = c < 20 ? 1 : 1 + rng.next_u64() % 32;
    const RowMatrix a = gaussian(rng, B * T, d, 1.0);
    const RowMatrix g = gaussian(rng, B * T, p, 1.0);
    const Vector want = oracle_weight_norms(a, g, T);
    ASSERT_LT(max_relative(psg_norm_ghost(a, g, T), want), 1e-10);
    ASSERT_LT(max_relative(psg_norm_instantiated(a, g, T), want), 1e-10);
  }
}

TEST(PerSampleNorms, SpecCaseB3T5) {
  RngStream rng(3, {0, Purpose::Test, 0, 0});
  const RowMatrix a = gaussian(rng, 15, 4, 1.0);
  const RowMatrix g = gaussian(rng, 15, 2, 1.0);
  EXPECT_LT(max_relative(psg_norm_instantiated(a, g, 5), psg_norm_ghost(a, g, 5)), 1e-10);
}

TEST(PerSampleNorms, BiasNorm) {
  RowMatrix g(2, 3);
  g << 1, 2, 3, -1, -2, -3;
  EXPECT_EQ(psg_norm_bias(g, 2)[0], 0.0);
  const Vector t1 = psg_norm_bias(g, 1);
  EXPECT_EQ(t1[0], 14.0);
  EXPECT_EQ(t1[1], 14.0);
  EXPECT_THROW(psg_norm_bias(g, 3), ContractViolation);
}

TEST(PerSampleNorms, ShapeErrors) {
  EXPECT_THROW(psg_norm_ghost(RowMatrix::Zero(4, 2), RowMatrix::Zero(3, 2), 1), ContractViolation);
  EXPECT_THROW(psg_norm_instantiated(RowMatrix::Zero(4, 2), RowMatrix::Zero(4, 2), 3),
               ContractViolation);
  EXPECT_THROW(psg_norm_ghost(RowMatrix::Zero(4, 2), RowMatrix::Zero(4, 2), 0), ContractViolation);
}

TEST(Dispatch, Threshold) {
  EXPECT_EQ(ghost_dispatch(1, 1000, 1000), NormMethod::Ghost);
  EXPECT_EQ(ghost_dispatch(1000, 4, 4), NormMethod::Instantiated);
  EXPECT_EQ(ghost_dispatch(4, 8, 4), NormMethod::Ghost);
  EXPECT_EQ(ghost_dispatch(4, 31, 1), NormMethod::Instantiated);
}

TEST(LayerNorms, IncludesBiasAndRespectsMask) {
  RngStream rng(4, {0, Purpose::Test, 0, 0});
  const RowMatrix a = gaussian(rng, 6, 3, 1.0);
  const RowMatrix g = gaussian(rng, 6, 2, 1.0);
  LayerSpec layer{3, 2, Activation::Identity, true, true};
  const Vector full = layer_norms(layer, a, g, 3).squared;
  const Vector want = oracle_weight_norms(a, g, 3) + psg_norm_bias(g, 3);
  EXPECT_LT(max_relative(full, want), 1e-12);
  layer.train_weight = false;
  EXPECT_LT(max_relative(layer_norms(layer, a, g, 3).squared, psg_norm_bias(g, 3)), 1e-15);
}

PerSampleNorms norms_of(std::initializer_list<double> squared) {
  PerSampleNorms n;
  n.squared.resize(static_cast<Index>(squared.size()), 1);
  Index i = 0;
  for (double s : squared) n.squared(i++, 0) = s;
  return n;
}

NetworkSpec one_layer() {
  NetworkSpec net;
  net.layers = {{2, 2, Activation::Identity, true, true}};
  return net;
}

TEST(ClipFactors, VanillaAndAutomatic) {
  const NetworkSpec net = one_layer();
  const ClipPlan vanilla = ClipPlan::all_layer(net, ClipFunction::Vanilla, 2.0);
  const Eigen::MatrixXd c = clip_factors(norms_of({16.0, 1.0}), vanilla);
  EXPECT_EQ(c(0, 0), 0.5);
  EXPECT_EQ(c(1, 0), 1.0);
  const ClipPlan automatic = ClipPlan::all_layer(net, ClipFunction::Automatic, 1.0);
  EXPECT_NEAR(clip_factors(norms_of({0.99 * 0.99}), automatic)(0, 0), 1.0, 1e-15);
  EXPECT_THROW(clip_factors(norms_of({-1.0}), vanilla), ContractViolation);
}

TEST(ClipFactors, InfiniteThresholdIsStandardGradient) {
  const NetworkSpec net = one_layer();
  const ClipPlan plan = ClipPlan::all_layer(net, ClipFunction::Vanilla,
                                            std::numeric_limits<double>::infinity());
  EXPECT_TRUE((clip_factors(norms_of({1e30, 0.0, 3.0}), plan).array() == 1.0).all());
  RngStream rng(0, {});
  const RowMatrix sum = RowMatrix::Constant(2, 2, 0.3);
  NoisePolicy off;
  EXPECT_EQ(privatize(sum, off, rng), sum);
}

TEST(ClipPlan, GroupConsistency) {
  NetworkSpec net;
  net.tokens = 2;
  net.layers = {{3, 4, Activation::Tanh, true, true}, {4, 2, Activation::Identity, true, true}};
  RngStream rng(5, {0, Purpose::Test, 0, 0});
  std::vector<LayerNorms> per_layer = {
      layer_norms(net.layers[0], gaussian(rng, 8, 3, 1.0), gaussian(rng, 8, 4, 1.0), 2),
      layer_norms(net.layers[1], gaussian(rng, 8, 4, 1.0), gaussian(rng, 8, 2, 1.0), 2)};
  const ClipPlan all = ClipPlan::all_layer(net, ClipFunction::Vanilla, 0.5);
  const ClipPlan wise = ClipPlan::layer_wise(net, ClipFunction::Vanilla, {0.5});
  const PerSampleNorms layered = aggregate_norms(wise, per_layer);
  PerSampleNorms merged;
  merged.squared = layered.squared.rowwise().sum();
  EXPECT_EQ(clip_factors(aggregate_norms(all, per_layer), all), clip_factors(merged, all));
}

TEST(ClipPlan, Validation) {
  NetworkSpec net;
  net.layers = {{2, 2, Activation::Identity, true, true}, {2, 2, Activation::Identity, false, false}};
  const ClipPlan wise = ClipPlan::layer_wise(net, ClipFunction::Vanilla, {1.0});
  EXPECT_EQ(wise.groups(), 1);
  EXPECT_EQ(wise.group_of_layer[1], -1);
  ClipPlan bad = wise;
  bad.thresholds = {0.0};
  EXPECT_THROW(bad.validate(net), ContractViolation);
  bad = wise;
  bad.group_of_layer[0] = -1;
  EXPECT_THROW(bad.validate(net), ContractViolation);
  bad = wise;
  bad.gamma = -1;
  EXPECT_THROW(bad.validate(net), ContractViolation);
  const ClipPlan two = ClipPlan::layer_wise(one_layer(), ClipFunction::Vanilla, {3.0});
  EXPECT_EQ(two.sensitivity(), 3.0);
}

TEST(Noise, Sensitivity) {
  NetworkSpec net;
  net.layers = {{1, 1, Activation::Identity, true, true}, {1, 1, Activation::Identity, true, true}};
  const ClipPlan plan = ClipPlan::layer_wise(net, ClipFunction::Vanilla, {3.0, 4.0});
  EXPECT_EQ(plan.sensitivity(), 5.0);
  const NoisePolicy p = NoisePolicy::for_plan(1.5, NoiseMode::SharedSeed, plan, 0);
  EXPECT_EQ(p.full_std(), 7.5);
  EXPECT_EQ(p.worker_std(4), 7.5 / 4);
  const NoisePolicy q = NoisePolicy::for_plan(1.5, NoiseMode::IndependentSeeds, plan, 0);
  EXPECT_EQ(q.worker_std(4), 7.5 / 2);
  EXPECT_THROW(q.worker_std(0), ContractViolation);
}

TEST(Noise, MonteCarloStd) {
  NetworkSpec net = one_layer();
  const ClipPlan plan = ClipPlan::all_layer(net, ClipFunction::Vanilla, 1.0);
  const NoisePolicy policy = NoisePolicy::for_plan(2.0, NoiseMode::SharedSeed, plan, 3);
  RngStream rng = policy.stream(0, 0, 0);
  const RowMatrix noisy = privatize(RowMatrix::Zero(1000, 100), policy, rng);
  const double std = std::sqrt(noisy.array().square().mean());
  EXPECT_NEAR(std, 2.0, 0.04);
}

TEST(Noise, SharedStreamsAgreeAcrossRanks) {
  const NoisePolicy shared{1.0, NoiseMode::SharedSeed, 1.0, 9};
  const NoisePolicy independent{1.0, NoiseMode::IndependentSeeds, 1.0, 9};
  RngStream s0 = shared.stream(0, 3, 1);
  RngStream s1 = shared.stream(1, 3, 1);
  EXPECT_EQ(s0.normal(), s1.normal());
  RngStream i0 = independent.stream(0, 3, 1);
  RngStream i1 = independent.stream(1, 3, 1);
  EXPECT_NE(i0.normal(), i1.normal());
}

TEST(Noise, RoundsToPrecision) {
  RngStream rng(1, {});
  const RowMatrix out = add_gaussian_noise(RowMatrix::Zero(10, 10), 1.0, rng, Precision::F16);
  for (Index i = 0; i < out.size(); ++i) EXPECT_TRUE(is_representable(out.data()[i], Precision::F16));
}

}  // namespace
}  // namespace dpzero
