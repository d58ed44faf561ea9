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

#include "dronefault/metrics.hpp"

#include <cstdio>
#include <sstream>

#include "dronefault/errors.hpp"
#include "dronefault/labels.hpp"

namespace dronefault {

F1Result macro_f1(const std::vector<int>& predictions, const std::vector<int>& targets,
                  int n_classes) {
  if (predictions.empty()) throw DomainError("macro_f1: empty input");
  if (predictions.size() != targets.size()) throw DomainError("macro_f1: length mismatch");
  if (n_classes < 1) throw DomainError("macro_f1: n_classes must be positive");
  F1Result r;
  r.confusion = Eigen::MatrixXi::Zero(n_classes, n_classes);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const int t = targets[i], p = predictions[i];
    if (t < 0 || t >= n_classes || p < 0 || p >= n_classes) {
      throw DomainError("macro_f1: label out of range at position " + std::to_string(i));
    }
    ++r.confusion(t, p);
  }
  auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
  double total = 0.0;
  for (int c = 0; c < n_classes; ++c) {
    const double tp = r.confusion(c, c);
    const double fp = r.confusion.col(c).sum() - tp;
    const double fn = r.confusion.row(c).sum() - tp;
    const double precision = ratio(tp, tp + fp);
    const double recall = ratio(tp, tp + fn);
    const double f1 = ratio(2.0 * precision * recall, precision + recall);
    r.per_class.push_back(f1);
    total += f1;
  }
  r.macro = total / n_classes;
  return r;
}

namespace {

nlohmann::ordered_json task_json(const TaskMetrics& m) {
  nlohmann::ordered_json j;
  j["macro_f1"] = m.f1.macro;
  j["per_class_f1"] = m.f1.per_class;
  j["examples"] = m.examples;
  std::vector<std::vector<int>> rows;
  for (Eigen::Index r = 0; r < m.f1.confusion.rows(); ++r) {
    std::vector<int> row;
    for (Eigen::Index c = 0; c < m.f1.confusion.cols(); ++c) row.push_back(m.f1.confusion(r, c));
    rows.push_back(std::move(row));
  }
  j["confusion"] = rows;
  return j;
}

template <typename Name>
void print_task(std::ostringstream& out, const char* title, const TaskMetrics& m, Name label) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", m.f1.macro);
  out << title << " macro F1 " << buf << " over " << m.examples << " examples\n";
  for (std::size_t c = 0; c < m.f1.per_class.size(); ++c) {
    std::snprintf(buf, sizeof buf, "%.4f", m.f1.per_class[c]);
    out << "  " << label(static_cast<int>(c)) << "  " << buf << "\n";
  }
}

}  // namespace

nlohmann::ordered_json to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["model"] = report.model;
  j["split"] = report.split;
  j["status"] = task_json(report.status);
  j["direction"] = report.direction ? task_json(*report.direction) : nlohmann::ordered_json(nullptr);
  return j;
}

std::string format_report(const MetricsReport& report) {
  std::ostringstream out;
  out << report.model << " on " << report.split << "\n";
  print_task(out, "status", report.status, [](int c) {
    return std::string(c < kNumStatus ? name(status_from_index(c)) : "?");
  });
  if (report.direction) {
    print_task(out, "direction", *report.direction, [](int c) {
      return std::string(c < kNumDirection ? name(direction_from_index(c)) : "?");
    });
  }
  return out.str();
}

}  // namespace dronefault
