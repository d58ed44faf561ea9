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
#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace dronefault {

/// Drone status: normal, a cut propeller on rotor 1-4, or a dented motor cap
/// on rotor 1-4.
enum class StatusLabel : int {
  kNormal = 0,
  kPropCut1,
  kPropCut2,
  kPropCut3,
  kPropCut4,
  kMotorFault1,
  kMotorFault2,
  kMotorFault3,
  kMotorFault4,
};

enum class DirectionLabel : int { kForward = 0, kBackward, kRight, kLeft, kClockwise, kCounterClockwise };

inline constexpr int kNumStatus = 9;
inline constexpr int kNumDirection = 6;

inline constexpr std::array<StatusLabel, kNumStatus> kAllStatus = {
    StatusLabel::kNormal,      StatusLabel::kPropCut1,    StatusLabel::kPropCut2,
    StatusLabel::kPropCut3,    StatusLabel::kPropCut4,    StatusLabel::kMotorFault1,
    StatusLabel::kMotorFault2, StatusLabel::kMotorFault3, StatusLabel::kMotorFault4};

inline constexpr std::array<DirectionLabel, kNumDirection> kAllDirection = {
    DirectionLabel::kForward, DirectionLabel::kBackward,  DirectionLabel::kRight,
    DirectionLabel::kLeft,    DirectionLabel::kClockwise, DirectionLabel::kCounterClockwise};

constexpr int index(StatusLabel s) { return static_cast<int>(s); }
constexpr int index(DirectionLabel d) { return static_cast<int>(d); }

StatusLabel status_from_index(int i);
DirectionLabel direction_from_index(int i);

std::string_view name(StatusLabel s);
std::string_view name(DirectionLabel d);

/// Case-insensitive; punctuation and spaces are ignored, so "Prop-Cut 1",
/// "propeller_cut_1" and "PROPCUT1" all parse.
std::optional<StatusLabel> parse_status(std::string_view text);
std::optional<DirectionLabel> parse_direction(std::string_view text);

/// Faulty rotor (0-3) for a fault status, nullopt for kNormal.
std::optional<int> faulty_rotor(StatusLabel s);
bool is_propeller_fault(StatusLabel s);
bool is_motor_fault(StatusLabel s);

Eigen::VectorXd one_hot(StatusLabel s);
Eigen::VectorXd one_hot(DirectionLabel d);

}  // namespace dronefault
