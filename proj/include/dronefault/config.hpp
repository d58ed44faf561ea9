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
#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "dronefault/dataset.hpp"
#include "dronefault/model.hpp"
#include "dronefault/train.hpp"

namespace dronefault {

struct ExperimentConfig {
  std::vector<double> fractions{1.0, 0.5, 0.25, 0.1};
  std::vector<TaskMode> modes{TaskMode::kMultiTask, TaskMode::kSingleTask};

  bool operator==(const ExperimentConfig&) const = default;
};

struct RunConfig {
  DatasetConfig dataset;
  ModelConfig model;
  TrainConfig training;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  ExperimentConfig experiment;

  bool operator==(const RunConfig&) const = default;
};

/// Examples per (status, direction) cell for the full-size dataset.
inline constexpr int kPaperScalePerCell = 1000;

nlohmann::json to_json(const RunConfig& config);
/// Missing keys keep their defaults. Unknown keys, wrong value types and
/// invalid values throw ConfigError naming the field and, when `text` is
/// given, its line.
RunConfig run_config_from_json(const nlohmann::json& j, const std::string& text = {});
RunConfig parse_run_config(const std::string& text, const std::string& origin = "config");
RunConfig load_run_config(const std::filesystem::path& path);
void validate(const RunConfig& config);

/// Hash of the canonical JSON form.
std::string config_hash(const RunConfig& config);

}  // namespace dronefault
