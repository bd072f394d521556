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

#include "dpzero/io/simulation.hpp"

#include <fstream>

#include "dpzero/errors.hpp"
#include "dpzero/network/data.hpp"

namespace dpzero {

namespace {

Json matrix_json(const RowMatrix& m) {
  return Json(std::vector<double>(m.data(), m.data() + m.size()));
}

}  // namespace

Json parameters_json(const NetworkSpec& spec, const Parameters& params) {
  Json out = Json::object();
  const auto slots = param_slots(spec);
  const auto values = to_slots(params);
  for (std::size_t k = 0; k < slots.size(); ++k) out[slot_name(slots[k])] = matrix_json(values[k]);
  return out;
}

std::string collective_line(const CollectiveRecord& r) {
  Json j = {{"step", r.step},
            {"layer", r.layer},
            {"op", to_string(r.op)},
            {"tensor", r.tensor},
            {"elements", r.elements}};
  return j.dump() + "\n";
}

SimulationOutputs simulate(const RunConfig& config) {
  const TrainingSetup& setup = config.setup;
  const Parameters initial = init_parameters(setup.network, config.init_seed);
  ZeroEngine engine(setup, initial);
  const auto slots = param_slots(setup.network);

  SimulationOutputs out;
  double last_mean_loss = 0;
  Index overflow_steps = 0;
  for (std::uint64_t t = 0; t < config.steps; ++t) {
    double underflow = 0;
    if (setup.precision != Precision::F64) {
      NoisePolicy quiet = setup.noise;
      quiet.sigma = 0;
      const Batch batch =
          synthetic_batch(setup.network, setup.data_seed, t, 0, setup.logical_batch());
      underflow = run_pipeline(setup.amp, setup.network, engine.working_parameters(), batch,
                               setup.clip, quiet, setup.precision, t)
                      .flow.underflow_fraction;
    }

    const StepReport report = engine.train_step();
    last_mean_loss = report.losses.mean();
    if (report.flow.overflow) ++overflow_steps;

    Json gradient = Json::object();
    for (std::size_t k = 0; k < slots.size(); ++k) {
      if (slots[k].trainable) gradient[slot_name(slots[k])] = matrix_json(report.gradient[k]);
    }
    Json step = {{"step", report.step},
                 {"mean_loss", last_mean_loss},
                 {"losses", std::vector<double>(report.losses.data(),
                                                report.losses.data() + report.losses.size())},
                 {"gradient", gradient},
                 {"master", parameters_json(setup.network, engine.master_parameters())}};
    out.trajectory += step.dump() + "\n";

    Json flow = {{"step", report.step},
                 {"overflow", report.flow.overflow},
                 {"underflow_fraction", underflow},
                 {"communicated_elements", report.communicated}};
    out.flow += flow.dump() + "\n";
  }
  for (const CollectiveRecord& r : engine.log().records()) out.collectives += collective_line(r);

  const MemoryFootprint audit = engine.memory_audit();
  const MemoryFootprint formula = memory_footprint(
      setup.stage, setup.workers, static_cast<double>(setup.network.model_params()),
      static_cast<double>(setup.network.trainable_params()), setup.optimizer.state_count(),
      setup.precision);
  auto memory_json = [](const MemoryFootprint& m) {
    return Json{{"parameters", m.parameters},
                {"gradients", m.gradients},
                {"optimizer", m.optimizer},
                {"total", m.total()}};
  };
  Json summary = {{"config", to_json(config)},
                  {"psi_model", setup.network.model_params()},
                  {"psi_train", setup.network.trainable_params()},
                  {"logical_batch", setup.logical_batch()},
                  {"steps", config.steps},
                  {"final_mean_loss", last_mean_loss},
                  {"overflow_steps", overflow_steps},
                  {"communicated_elements", engine.log().volume()},
                  {"memory_audit_bytes", memory_json(audit)},
                  {"memory_formula_bytes", memory_json(formula)}};
  out.summary = summary.dump(2) + "\n";
  return out;
}

void write_outputs(const SimulationOutputs& out, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError(dir.string(), "cannot create output directory: " + ec.message());
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary);
    f << text;
    if (!f) throw ConfigError((dir / name).string(), "cannot write file");
  };
  write(SimulationOutputs::kTrajectoryFile, out.trajectory);
  write(SimulationOutputs::kCollectivesFile, out.collectives);
  write(SimulationOutputs::kFlowFile, out.flow);
  write(SimulationOutputs::kSummaryFile, out.summary);
}

}  // namespace dpzero
