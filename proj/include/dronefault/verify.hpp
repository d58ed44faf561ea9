// Copyright 2026 The dronefault Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

namespace dronefault {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string metric;  // what `worst` measures
  double worst = 0.0;
  double threshold = 0.0;
  std::size_t cases = 0;
  std::vector<std::string> details;
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  int cases_per_op = 100;
  /// Flips the sign of one backward pass to prove the gradient suite bites.
  bool inject_fault = false;
};

/// Finite-difference checks of every autodiff primitive and of the tiny
/// model, in double precision.
SuiteResult gradient_suite(const VerifyOptions& options);
/// mix_at_snr on random (signal, noise, snr) triples.
SuiteResult snr_suite(const VerifyOptions& options);
/// macro_f1 against direct per-class counting.
SuiteResult metric_suite(const VerifyOptions& options);
/// Identities of the uncertainty-weighted objective.
SuiteResult loss_suite(const VerifyOptions& options);

std::vector<SuiteResult> run_verify(const VerifyOptions& options);
nlohmann::ordered_json to_json(const std::vector<SuiteResult>& results);

}  // namespace dronefault
