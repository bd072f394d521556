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

#ifndef DPZERO_VERIFY_SUITES_HPP_
#define DPZERO_VERIFY_SUITES_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpzero/dp/norms.hpp"

namespace dpzero::verify {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SuiteResult {
  std::string suite;
  std::vector<Check> checks;

  bool passed() const;
};

struct Options {
  // Dispatch rule under test; the ghost-oracle suite must reject anything
  // other than the documented crossover.
  DispatchRule dispatch = ghost_dispatch;
  std::uint64_t seed = 0;
};

// ghost-oracle, gradient-check, sharding-transparency, noise-calibration,
// memory-formulas, comm-accounting, cost-agreement, amp-laws, overflow,
// clipping-bound, determinism, and "all".
const std::vector<std::string>& suite_names();

// nullopt for an unknown suite name. "all" runs every suite in order.
std::optional<std::vector<SuiteResult>> run(std::string_view name, const Options& options = {});

SuiteResult ghost_oracle(const Options& options);
SuiteResult gradient_check(const Options& options);
SuiteResult sharding_transparency(const Options& options);
SuiteResult noise_calibration(const Options& options);
SuiteResult memory_formulas(const Options& options);
SuiteResult comm_accounting(const Options& options);
SuiteResult cost_agreement(const Options& options);
SuiteResult amp_laws(const Options& options);
SuiteResult overflow(const Options& options);
SuiteResult clipping_bound(const Options& options);
SuiteResult determinism(const Options& options);

}  // namespace dpzero::verify

#endif  // DPZERO_VERIFY_SUITES_HPP_
