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

#ifndef DPZERO_ERRORS_HPP_
#define DPZERO_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace dpzero {

// A caller broke a documented precondition (shape mismatch, missing cache,
// negative squared norm, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Non-finite values where full precision guarantees finiteness.
class NumericFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The requested combination of features cannot be executed.
class UnsupportedConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A worker touched a tensor region it does not own outside a collective.
class OwnershipViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Invalid user configuration. `path` names the offending field, e.g.
// "network.layers[2].out".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace dpzero

#endif  // DPZERO_ERRORS_HPP_
