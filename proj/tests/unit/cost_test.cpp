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
#include <sstream>

#include <gtest/gtest.h>

#include "dpzero/cost/cost_model.hpp"
#include "dpzero/errors.hpp"
#include "dpzero/io/config.hpp"

namespace dpzero {
namespace {

CostInputs full_training(Stage stage, int workers) {
  CostInputs in;
  in.batch = 4;
  in.tokens = 512;
  in.psi_model = 1e9;
  in.psi_train = 1e9;
  in.workers = workers;
  in.stage = stage;
  return in;
}

TEST(TimeComponents, UnitSubstitution) {
  const CostReport r = time_components(CostInputs{});
  EXPECT_EQ(r.forward, 2);
  EXPECT_EQ(r.output_grad, 2);
  EXPECT_EQ(r.param_grad, 2);
  EXPECT_EQ(r.dp_overhead, 0.666);
  EXPECT_EQ(r.attention, 0);
}

TEST(TimeComponents, TableTotalsAndLimits) {
  CostInputs in = full_training(Stage::DDP, 1);
  const CostReport r = time_components(in);
  const double bt_psi = 4 * 512 * 1e9;
  EXPECT_EQ(r.forward + r.output_grad + r.param_grad, 6 * bt_psi);
  EXPECT_DOUBLE_EQ(r.dp_overhead, 0.666 * bt_psi);
  in.psi_train = 0;
  const CostReport peft = time_components(in);
  EXPECT_EQ(peft.output_grad + peft.param_grad, 2 * bt_psi);
  in.checkpointing = true;
  EXPECT_EQ(time_components(in).forward, 4 * bt_psi);
  in.dp_enabled = false;
  in.psi_train = 1e9;
  EXPECT_EQ(time_components(in).dp_overhead, 0);
  in.attention_coeff = 2;
  EXPECT_EQ(time_components(in).attention, 2 * 4 * 512.0 * 512.0);
}

TEST(TimeComponents, CheckpointingComputeRatio) {
  CostInputs in;
  const CostReport plain = time_components(in);
  in.checkpointing = true;
  const CostReport ckpt = time_components(in);
  EXPECT_EQ((plain.forward + plain.output_grad + plain.param_grad) /
                (ckpt.forward + ckpt.output_grad + ckpt.param_grad),
            0.75);
}

TEST(CommVolume, StagesAndPeft) {
  EXPECT_EQ(comm_volume(full_training(Stage::Zero2, 1)), 0);
  EXPECT_EQ(comm_volume(full_training(Stage::DDP, 8)), 2e9);
  EXPECT_EQ(comm_volume(full_training(Stage::Zero1, 8)), 2e9);
  EXPECT_EQ(comm_volume(full_training(Stage::Zero2, 8)), 2e9);
  EXPECT_EQ(comm_volume(full_training(Stage::Zero3, 8)), 3e9);
  CostInputs peft = full_training(Stage::Zero2, 8);
  peft.psi_train = 1e6;
  EXPECT_EQ(comm_volume(full_training(Stage::Zero2, 8)) / comm_volume(peft), 1000);
  CostInputs acc = full_training(Stage::Zero3, 8);
  acc.accumulation = 2;
  EXPECT_EQ(comm_volume(acc), 5e9);
}

TEST(CommSeconds, InterNodeBandwidthBeyondOneNode) {
  CostInputs in = full_training(Stage::Zero2, 8);
  EXPECT_DOUBLE_EQ(comm_seconds(in), 2e9 * 2 / 300e9);
  in.workers = 16;
  EXPECT_DOUBLE_EQ(comm_seconds(in), 2e9 * 2 / 25e9);
}

TEST(RelativeSpeed, Limits) {
  EXPECT_NEAR(relative_speed(CostInputs{}), 6 / 6.666, 1e-15);
  CostInputs peft;
  peft.psi_train = 0;
  EXPECT_EQ(relative_speed(peft), 1.0);
  CostInputs slow = full_training(Stage::Zero3, 64);
  slow.bandwidth.inter_node_gbps = 1e-9;
  EXPECT_GT(relative_speed(slow), 0.999999);
}

TEST(RelativeSpeed, Monotone) {
  double previous = 0;
  for (double gbps : {1000.0, 100.0, 10.0, 1.0, 0.1}) {
    CostInputs in = full_training(Stage::Zero2, 64);
    in.bandwidth.inter_node_gbps = gbps;
    const double s = relative_speed(in);
    EXPECT_GE(s, previous);
    previous = s;
  }
  previous = 2;
  for (double c : {0.0, 0.3, 0.666, 1.5}) {
    CostInputs in;
    in.dp_overhead_coeff = c;
    const double s = relative_speed(in);
    EXPECT_LE(s, previous);
    previous = s;
  }
}

TEST(MaxTrainable, SixtyFourWorkerMaxima) {
  EXPECT_NEAR(max_trainable_model(32e9, 64, Stage::Zero1) / 7.64e9, 1, 1e-3);
  EXPECT_NEAR(max_trainable_model(32e9, 64, Stage::Zero2) / 14.42e9, 1, 1e-3);
  EXPECT_EQ(max_trainable_model(32e9, 64, Stage::Zero3), 128e9);
  EXPECT_EQ(max_trainable_model(32e9, 1, Stage::Zero3), 2e9);
  EXPECT_THROW(max_trainable_model(-1, 1, Stage::DDP), ContractViolation);
}

TEST(CostInputs, Validation) {
  CostInputs in;
  in.psi_train = 2;
  EXPECT_THROW(in.validate(), ContractViolation);
  in = CostInputs{};
  in.batch = 0;
  EXPECT_THROW(in.validate(), ContractViolation);
  in = CostInputs{};
  in.bytes_per_element = 3;
  EXPECT_THROW(evaluate(in), ContractViolation);
}

TEST(CostTables, CsvHasOneRowPerInput) {
  std::vector<CostInputs> rows = {full_training(Stage::Zero2, 64), full_training(Stage::Zero3, 64)};
  std::istringstream csv(to_csv(rows));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(std::count(header.begin(), header.end(), ',') + 1,
            static_cast<long>(cost_columns().size()));
  std::string line;
  int count = 0;
  while (std::getline(csv, line)) ++count;
  EXPECT_EQ(count, 2);
  const Json j = Json::parse(to_json(rows));
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[1]["comm_elements"].get<double>(), 1.5 * j[0]["comm_elements"].get<double>());
}

TEST(CostTables, SingleRowEchoesInputs) {
  CostInputs in;
  in.batch = 3;
  in.tokens = 7;
  const Json j = Json::parse(to_json({in}));
  EXPECT_EQ(j[0]["batch"], 3);
  EXPECT_EQ(j[0]["tokens"], 7);
  EXPECT_EQ(j[0]["stage"], 0);
  EXPECT_EQ(j[0]["dp_overhead_coeff"], 0.666);
}

}  // namespace
}  // namespace dpzero
