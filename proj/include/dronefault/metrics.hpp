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

#include <Eigen/Core>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace dronefault {

struct F1Result {
  double macro = 0.0;
  std::vector<double> per_class;
  Eigen::MatrixXi confusion;  // rows = target, cols = prediction
};

/// Macro F1 over all n_classes; a 0/0 precision, recall or F1 counts as 0.
/// Throws DomainError on empty or mismatched input and out-of-range labels.
F1Result macro_f1(const std::vector<int>& predictions, const std::vector<int>& targets,
                  int n_classes);

struct TaskMetrics {
  F1Result f1;
  std::size_t examples = 0;
};

struct MetricsReport {
  std::string model;
  std::string split;
  TaskMetrics status;
  std::optional<TaskMetrics> direction;
};

nlohmann::ordered_json to_json(const MetricsReport& report);
std::string format_report(const MetricsReport& report);

}  // namespace dronefault
