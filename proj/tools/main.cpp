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

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dpzero/errors.hpp"
#include "dpzero/io/config.hpp"
#include "dpzero/io/simulation.hpp"
#include "dpzero/verify/suites.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kVerificationFailure = 1;
constexpr int kConfigError = 2;

// Off-by-default dispatch used to confirm that verify notices a bad threshold.
dpzero::NormMethod corrupted_dispatch(dpzero::Index tokens, dpzero::Index d, dpzero::Index p) {
  return tokens * tokens <= d * p ? dpzero::NormMethod::Ghost : dpzero::NormMethod::Instantiated;
}

std::uint64_t default_seed() {
  const char* env = std::getenv("DPZERO_SEED");
  if (env == nullptr || *env == '\0') return 0;
  std::size_t used = 0;
  const std::string text(env);
  unsigned long long value = 0;
  try {
    value = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.front() == '-') {
    throw dpzero::ConfigError("DPZERO_SEED", "expected a non-negative integer, got '" + text + "'");
  }
  return value;
}

int cmd_simulate(const std::string& config, const std::string& out) {
  const dpzero::RunConfig run = dpzero::load_run_config(config, default_seed());
  dpzero::write_outputs(dpzero::simulate(run), out);
  std::cout << "wrote " << run.steps << " steps to " << out << "\n";
  return kPass;
}

int cmd_verify(const std::string& suite, bool corrupt) {
  if (suite.empty()) {
    std::cerr << "verify: empty suite name\n";
    return kConfigError;
  }
  dpzero::verify::Options options;
  options.seed = default_seed();
  if (corrupt) options.dispatch = corrupted_dispatch;
  const auto results = dpzero::verify::run(suite, options);
  if (!results) {
    std::cerr << "verify: unknown suite '" << suite << "'; available: all";
    for (const std::string& name : dpzero::verify::suite_names()) std::cerr << ", " << name;
    std::cerr << "\n";
    return kConfigError;
  }
  bool ok = true;
  for (const auto& result : *results) {
    for (const auto& c : result.checks) {
      std::cout << (c.passed ? "PASS " : "FAIL ") << result.suite << ": " << c.name;
      if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
      std::cout << "\n";
    }
    std::cout << (result.passed() ? "PASS " : "FAIL ") << result.suite << "\n";
    ok = ok && result.passed();
  }
  return ok ? kPass : kVerificationFailure;
}

int cmd_cost(const std::string& config, const std::string& format) {
  const auto rows = dpzero::load_cost_config(config);
  std::cout << (format == "json" ? dpzero::to_json(rows) : dpzero::to_csv(rows));
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator for differentially private training under ZeRO sharding"};
  app.require_subcommand(1);

  std::string sim_config;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "Train a configured network and write traces");
  simulate->add_option("--config", sim_config, "Run configuration (JSON)")->required();
  simulate->add_option("--out", sim_out, "Output directory")->required();

  std::string suite;
  bool corrupt = false;
  auto* verify = app.add_subcommand("verify", "Run an invariant suite");
  verify->add_option("--suite", suite, "Suite name, or 'all'")->required();
  verify->add_flag("--corrupt-dispatch", corrupt)->group("");

  std::string cost_config;
  std::string format = "csv";
  auto* cost = app.add_subcommand("cost", "Evaluate the cost model over a sweep");
  cost->add_option("--config", cost_config, "Cost configuration (JSON)")->required();
  cost->add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  try {
    if (*simulate) return cmd_simulate(sim_config, sim_out);
    if (*verify) return cmd_verify(suite, corrupt);
    return cmd_cost(cost_config, format);
  } catch (const dpzero::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
  } catch (const dpzero::UnsupportedConfiguration& e) {
    std::cerr << "unsupported configuration: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kVerificationFailure;
  }
  return kConfigError;
}
