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

#include "dronefault/labels.hpp"

#include <cctype>

#include "dronefault/errors.hpp"

namespace dronefault {
namespace {

constexpr std::array<std::string_view, kNumStatus> kStatusNames = {
    "normal",        "prop_cut_1",    "prop_cut_2",    "prop_cut_3",   "prop_cut_4",
    "motor_fault_1", "motor_fault_2", "motor_fault_3", "motor_fault_4"};

constexpr std::array<std::string_view, kNumDirection> kDirectionNames = {
    "forward", "backward", "right", "left", "cw", "ccw"};

std::string squash(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

}  // namespace

StatusLabel status_from_index(int i) {
  if (i < 0 || i >= kNumStatus) throw DomainError("status index out of range: " + std::to_string(i));
  return static_cast<StatusLabel>(i);
}

DirectionLabel direction_from_index(int i) {
  if (i < 0 || i >= kNumDirection) {
    throw DomainError("direction index out of range: " + std::to_string(i));
  }
  return static_cast<DirectionLabel>(i);
}

std::string_view name(StatusLabel s) { return kStatusNames[index(s)]; }
std::string_view name(DirectionLabel d) { return kDirectionNames[index(d)]; }

std::optional<StatusLabel> parse_status(std::string_view text) {
  const std::string key = squash(text);
  if (key == "normal") return StatusLabel::kNormal;
  for (const std::string_view prefix : {"propcut", "propellercut", "prop"}) {
    if (key.size() == prefix.size() + 1 && key.starts_with(prefix)) {
      const int r = key.back() - '0';
      if (r >= 1 && r <= 4) return static_cast<StatusLabel>(r);
    }
  }
  for (const std::string_view prefix : {"motorfault", "motorcap", "dentedmotorcap", "motor"}) {
    if (key.size() == prefix.size() + 1 && key.starts_with(prefix)) {
      const int r = key.back() - '0';
      if (r >= 1 && r <= 4) return static_cast<StatusLabel>(4 + r);
    }
  }
  return std::nullopt;
}

std::optional<DirectionLabel> parse_direction(std::string_view text) {
  const std::string key = squash(text);
  if (key == "forward" || key == "front") return DirectionLabel::kForward;
  if (key == "backward" || key == "back") return DirectionLabel::kBackward;
  if (key == "right") return DirectionLabel::kRight;
  if (key == "left") return DirectionLabel::kLeft;
  if (key == "cw" || key == "clockwise") return DirectionLabel::kClockwise;
  if (key == "ccw" || key == "counterclockwise" || key == "anticlockwise") {
    return DirectionLabel::kCounterClockwise;
  }
  return std::nullopt;
}

std::optional<int> faulty_rotor(StatusLabel s) {
  const int i = index(s);
  if (i == 0) return std::nullopt;
  return (i - 1) % 4;
}

bool is_propeller_fault(StatusLabel s) { return index(s) >= 1 && index(s) <= 4; }
bool is_motor_fault(StatusLabel s) { return index(s) >= 5; }

Eigen::VectorXd one_hot(StatusLabel s) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(kNumStatus);
  v[index(s)] = 1.0;
  return v;
}

Eigen::VectorXd one_hot(DirectionLabel d) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(kNumDirection);
  v[index(d)] = 1.0;
  return v;
}

}  // namespace dronefault
