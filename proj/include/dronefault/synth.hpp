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
#include <vector>

#include "dronefault/audio.hpp"
#include "dronefault/labels.hpp"

namespace dronefault {

/// Rotor layout used throughout: 0 front-left, 1 front-right, 2 rear-left,
/// 3 rear-right. Rotors 0 and 3 spin clockwise, 1 and 2 counter-clockwise.
inline constexpr int kNumRotors = 4;

/// Spectral signature of one quadcopter type.
struct DroneProfile {
  std::string name = "A";
  std::array<double, 2> blade_pass_hz{250.0, 300.0};
  std::array<double, 2> motor_hz{2000.0, 3000.0};
  int n_prop_harmonics = 8;
  int n_motor_harmonics = 3;
  double broadband_level = 0.05;
  /// Level of the motor stack relative to the blade-pass fundamental.
  double motor_level = 0.3;
  /// Per-rotor gain at the microphone; unequal so rotors are distinguishable.
  std::array<double, kNumRotors> rotor_gain{1.0, 0.8, 0.65, 0.5};

  /// Base blade-pass rate of rotor i for u in [0, 1):
  /// lo * exp(0.025 i + 0.005 u), so the range must span at least 8.3%.
  double blade_pass_base_hz(int rotor, double u) const;
  /// Nominal motor tone of rotor i, log-spaced from motor_hz[0] to motor_hz[1].
  double motor_base_hz(int rotor) const;
};

/// The three stock profiles "A", "B", "C".
DroneProfile drone_profile(std::string_view name);
std::vector<DroneProfile> default_profiles();

/// Throws DomainError unless ranges are positive, ordered and below `nyquist`
/// after the worst-case mixer factor.
void validate(const DroneProfile& profile, double nyquist, double max_factor = 1.2);

/// Per-direction multiplicative rotor speed factors (rows follow DirectionLabel).
struct MixerMatrix {
  Eigen::Matrix<double, kNumDirection, kNumRotors> factors;

  /// Signed +/-offset pattern: forward speeds up the rear pair, right speeds
  /// up the left pair, clockwise yaw speeds up the counter-clockwise rotors.
  static MixerMatrix standard(double offset = 0.05);
};

Eigen::Array4d rotor_speeds(DirectionLabel direction, const MixerMatrix& mixer,
                            const Eigen::Array4d& base_hz);

/// Everything needed to reproduce a synthesized clip and attribute its parts.
struct DroneRender {
  AudioClip clip;        // peak-normalised output
  Eigen::ArrayXd raw;    // un-normalised sum
  double gain = 1.0;     // clip.samples == gain * raw
  Eigen::Array4d blade_pass_hz = Eigen::Array4d::Zero();  // per-rotor base, before mixing
  Eigen::Array4d rotor_hz = Eigen::Array4d::Zero();
  Eigen::Array4d motor_hz = Eigen::Array4d::Zero();
};

/// Harmonic rotor stacks, motor stacks and a pink floor; one rotor perturbed
/// according to the status. Same inputs and seed give bitwise-equal output,
/// and the random draws do not depend on the status.
DroneRender render_drone_sound(StatusLabel status, DirectionLabel direction,
                               const DroneProfile& profile, double duration_s, int rate,
                               Rng& rng, const MixerMatrix& mixer = MixerMatrix::standard());

AudioClip synth_drone_sound(StatusLabel status, DirectionLabel direction,
                            const DroneProfile& profile, double duration_s, int rate, Rng& rng,
                            const MixerMatrix& mixer = MixerMatrix::standard());

enum class NoiseKind : int { kConstruction = 0, kPond, kHill, kSports, kGate };
inline constexpr int kNumNoiseKinds = 5;
inline constexpr std::array<NoiseKind, kNumNoiseKinds> kAllNoiseKinds = {
    NoiseKind::kConstruction, NoiseKind::kPond, NoiseKind::kHill, NoiseKind::kSports,
    NoiseKind::kGate};

std::string_view name(NoiseKind kind);
std::optional<NoiseKind> parse_noise_kind(std::string_view text);

/// Unit-RMS pink (1/f power) noise, flattened below 20 Hz.
Eigen::ArrayXd pink_noise(Eigen::Index n, int rate, Rng& rng);

/// Venue ambience; RMS normalised to 0.1.
AudioClip synth_background(NoiseKind kind, double duration_s, int rate, Rng& rng);

}  // namespace dronefault
