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

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dronefault/config.hpp"
#include "dronefault/dataset.hpp"

namespace dronefault {

struct RunSpec {
  TaskMode mode = TaskMode::kMultiTask;
  std::string profile;
  double fraction = 1.0;
  std::uint64_t seed = 0;

  std::string label() const;  // e.g. "mtl_A_f0.25_s1"
};

struct RunOutcome {
  RunSpec spec;
  std::string run_hash;
  std::size_t train_examples = 0;
  double test_f1_status = 0.0;
  std::optional<double> test_f1_direction;
  double best_val_f1 = 0.0;
  std::string best_source;
  double final_loss_s = 0.0;
  std::optional<double> final_loss_d, final_sigma_s, final_sigma_d;
  bool resumed = false;
};

nlohmann::ordered_json to_json(const RunOutcome& outcome);
RunOutcome run_outcome_from_json(const nlohmann::json& j);

struct ExperimentReport {
  std::string config_hash;
  std::vector<RunOutcome> runs;
};

/// Grid in a fixed order: profile, fraction, seed, mode.
std::vector<RunSpec> experiment_grid(const RunConfig& config);

/// Records of one drone type, same root and header.
Manifest select_profile(const Manifest& manifest, const std::string& profile);

/// Identifies a run by everything that affects its outputs.
std::string run_hash(const RunConfig& config, const Manifest& manifest, const RunSpec& spec);

/// Trains one grid cell into out_dir/<label>/ (best.ckpt, traces,
/// result.json). A finished run with the same hash is loaded, not redone.
RunOutcome run_single(const RunConfig& config, const Manifest& manifest, const RunSpec& spec,
                      const std::filesystem::path& out_dir,
                      std::shared_ptr<SampleCache> cache = nullptr, std::ostream* log = nullptr);

/// Runs the grid on up to `jobs` threads and writes report.json,
/// report.csv and summary.txt into out_dir.
ExperimentReport run_experiment(const RunConfig& config, const Manifest& manifest,
                                const std::filesystem::path& out_dir, int jobs = 1,
                                std::ostream* log = nullptr);

nlohmann::ordered_json to_json(const ExperimentReport& report);
std::string report_csv(const ExperimentReport& report);
/// Mean test F1 per (mode, profile, fraction) for status and direction.
std::string summary_table(const ExperimentReport& report);

}  // namespace dronefault
