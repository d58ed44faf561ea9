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

#include "dronefault/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "dronefault/errors.hpp"
#include "dronefault/spectrum.hpp"

namespace dronefault {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPeak = 0.9;
constexpr double kBackgroundRms = 0.1;

// Fault model.
constexpr double kCutModulationDepth = 0.5;
constexpr double kCutOddDetune = 0.03;
constexpr double kMotorJitter = 0.02;

// Rotor spacing on a log-frequency axis. Pairwise offsets (0.025 ... 0.08)
// stay clear of both 0 and the 0.0998 that a +/-5% mixer row puts between a
// fast and a slow rotor, so rotors never trade places.
constexpr double kRotorStep = 0.025;
constexpr double kRotorJitter = 0.005;

constexpr std::array<std::string_view, kNumNoiseKinds> kNoiseNames = {
    "construction", "pond", "hill", "sports", "gate"};

Eigen::ArrayXd white(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::ArrayXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = normal(rng);
  return x;
}

// Applies a real, zero-phase amplitude response `gain(f)` in the frequency domain.
template <typename Gain>
Eigen::ArrayXd shape(const Eigen::ArrayXd& x, int rate, Gain gain) {
  Eigen::ArrayXcd spec = rfft(x);
  for (Eigen::Index k = 0; k < spec.size(); ++k) spec[k] *= gain(bin_frequency(k, x.size(), rate));
  return irfft(spec, x.size());
}

Eigen::ArrayXd band_noise(Eigen::Index n, int rate, double lo, double hi, Rng& rng) {
  Eigen::ArrayXd x = shape(white(n, rng), rate, [&](double f) {
    return (f >= lo && f <= hi) ? 1.0 : 0.0;
  });
  const double r = std::sqrt(x.square().mean());
  return r > 0.0 ? Eigen::ArrayXd(x / r) : x;
}

Eigen::ArrayXd normalise_rms(Eigen::ArrayXd x, double target) {
  const double r = std::sqrt(x.square().mean());
  if (r > 0.0) x *= target / r;
  return x;
}

// Adds `count` Hann-windowed tones or decaying noise bursts at random times.
void add_tone_events(Eigen::ArrayXd& x, int rate, double events_per_s, double lo_hz, double hi_hz,
                     double length_s, double level, Rng& rng) {
  const double duration = static_cast<double>(x.size()) / rate;
  std::poisson_distribution<int> count(events_per_s * duration);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n_events = count(rng);
  const auto len = static_cast<Eigen::Index>(length_s * rate);
  for (int e = 0; e < n_events; ++e) {
    const auto start = static_cast<Eigen::Index>(unit(rng) * static_cast<double>(x.size()));
    const double f = lo_hz + (hi_hz - lo_hz) * unit(rng);
    const double phase = kTwoPi * unit(rng);
    for (Eigen::Index i = 0; i < len && start + i < x.size(); ++i) {
      const double w = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / len);
      x[start + i] += level * w * std::sin(kTwoPi * f * i / rate + phase);
    }
  }
}

void add_bursts(Eigen::ArrayXd& x, int rate, double events_per_s, double level, Rng& rng) {
  const double duration = static_cast<double>(x.size()) / rate;
  std::poisson_distribution<int> count(events_per_s * duration);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n_events = count(rng);
  const auto len = static_cast<Eigen::Index>(0.04 * rate);
  const double tau = 0.008 * rate;
  for (int e = 0; e < n_events; ++e) {
    const auto start = static_cast<Eigen::Index>(unit(rng) * static_cast<double>(x.size()));
    const double amp = level * (0.5 + unit(rng));
    for (Eigen::Index i = 0; i < len && start + i < x.size(); ++i) {
      x[start + i] += amp * std::exp(-static_cast<double>(i) / tau) * normal(rng);
    }
  }
}

}  // namespace

double DroneProfile::blade_pass_base_hz(int rotor, double u) const {
  return blade_pass_hz[0] * std::exp(kRotorStep * rotor + kRotorJitter * u);
}

double DroneProfile::motor_base_hz(int rotor) const {
  return motor_hz[0] * std::pow(motor_hz[1] / motor_hz[0], rotor / (kNumRotors - 1.0));
}

DroneProfile drone_profile(std::string_view name) {
  DroneProfile p;
  if (name == "A") return p;
  if (name == "B") {
    p.name = "B";
    p.blade_pass_hz = {340.0, 390.0};
    p.motor_hz = {3200.0, 4000.0};
    p.n_prop_harmonics = 7;
    p.broadband_level = 0.06;
    p.rotor_gain = {0.9, 1.0, 0.55, 0.7};
    return p;
  }
  if (name == "C") {
    p.name = "C";
    p.blade_pass_hz = {440.0, 500.0};
    p.motor_hz = {1300.0, 1900.0};
    p.n_prop_harmonics = 6;
    p.n_motor_harmonics = 4;
    p.broadband_level = 0.04;
    p.rotor_gain = {0.6, 0.75, 1.0, 0.85};
    return p;
  }
  throw DomainError("unknown drone profile '" + std::string(name) + "'");
}

std::vector<DroneProfile> default_profiles() {
  return {drone_profile("A"), drone_profile("B"), drone_profile("C")};
}

void validate(const DroneProfile& p, double nyquist, double max_factor) {
  auto check = [&](const std::array<double, 2>& r, const char* what) {
    if (!(r[0] > 0.0 && r[0] <= r[1] && r[1] * max_factor < nyquist)) {
      throw DomainError("profile " + p.name + ": invalid " + what + " range");
    }
  };
  check(p.blade_pass_hz, "blade_pass_hz");
  check(p.motor_hz, "motor_hz");
  if (p.blade_pass_base_hz(kNumRotors - 1, 1.0) > p.blade_pass_hz[1]) {
    throw DomainError("profile " + p.name + ": blade_pass_hz range too narrow for four rotors");
  }
  if (p.n_prop_harmonics < 1 || p.n_motor_harmonics < 1) {
    throw DomainError("profile " + p.name + ": harmonic counts must be positive");
  }
}

MixerMatrix MixerMatrix::standard(double offset) {
  const double u = 1.0 + offset, d = 1.0 - offset;
  MixerMatrix m;
  m.factors << d, d, u, u,  // forward: rear pair faster
      u, u, d, d,           // backward
      u, d, u, d,           // right: left pair faster
      d, u, d, u,           // left
      d, u, u, d,           // clockwise yaw: CCW-spinning rotors faster
      u, d, d, u;           // counter-clockwise yaw
  return m;
}

Eigen::Array4d rotor_speeds(DirectionLabel direction, const MixerMatrix& mixer,
                            const Eigen::Array4d& base_hz) {
  if ((base_hz <= 0.0).any()) throw DomainError("rotor base frequencies must be positive");
  return base_hz * mixer.factors.row(index(direction)).transpose().array();
}

DroneRender render_drone_sound(StatusLabel status, DirectionLabel direction,
                               const DroneProfile& profile, double duration_s, int rate,
                               Rng& rng, const MixerMatrix& mixer) {
  if (!(duration_s > 0.0)) throw DomainError("duration must be positive");
  if (rate <= 0) throw DomainError("sample rate must be positive");
  const auto n = static_cast<Eigen::Index>(std::llround(duration_s * rate));
  const double nyquist = 0.5 * rate;
  const double limit = 0.95 * nyquist;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // All draws happen in a fixed order so that only the perturbation, never
  // the randomness, depends on the status.
  // Rotor r sits at its own slot near the bottom of the blade-pass range.
  Eigen::Array4d blade_pass;
  for (int r = 0; r < kNumRotors; ++r) blade_pass[r] = profile.blade_pass_base_hz(r, unit(rng));
  Eigen::Array4d motor_trim;
  for (int r = 0; r < kNumRotors; ++r) motor_trim[r] = 1.0 + 0.005 * (2.0 * unit(rng) - 1.0);
  Eigen::ArrayXXd prop_phase(kNumRotors, profile.n_prop_harmonics);
  Eigen::ArrayXXd motor_phase(kNumRotors, profile.n_motor_harmonics);
  for (int r = 0; r < kNumRotors; ++r) {
    for (int h = 0; h < profile.n_prop_harmonics; ++h) prop_phase(r, h) = kTwoPi * unit(rng);
    for (int h = 0; h < profile.n_motor_harmonics; ++h) motor_phase(r, h) = kTwoPi * unit(rng);
  }
  Eigen::Array4d shaft_phase;
  for (int r = 0; r < kNumRotors; ++r) shaft_phase[r] = kTwoPi * unit(rng);
  const double step_sd = 2e-4 * std::sqrt(16000.0 / rate);
  Eigen::ArrayXd walk_steps = white(n, rng) * step_sd;
  Eigen::ArrayXd friction = band_noise(n, rate, 2000.0, 3000.0, rng);
  Eigen::ArrayXd floor_noise = pink_noise(n, rate, rng);

  const Eigen::Array4d speeds = rotor_speeds(direction, mixer, blade_pass);
  Eigen::Array4d motors;
  for (int r = 0; r < kNumRotors; ++r) motors[r] = profile.motor_base_hz(r) * motor_trim[r];
  motors *= mixer.factors.row(index(direction)).transpose().array();

  const std::optional<int> bad_rotor = faulty_rotor(status);
  const bool prop_fault = is_propeller_fault(status);
  const bool motor_fault = is_motor_fault(status);

  Eigen::ArrayXd jitter = Eigen::ArrayXd::Zero(n);
  for (Eigen::Index i = 1; i < n; ++i) {
    jitter[i] = std::clamp(jitter[i - 1] + walk_steps[i], -kMotorJitter, kMotorJitter);
  }

  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(n);
  for (int r = 0; r < kNumRotors; ++r) {
    const bool cut = prop_fault && bad_rotor == r;
    const double g = profile.rotor_gain[r];

    Eigen::ArrayXd blades = Eigen::ArrayXd::Zero(n);
    for (int h = 1; h <= profile.n_prop_harmonics; ++h) {
      double f = h * speeds[r];
      if (cut && h % 2 == 1) f *= 1.0 + kCutOddDetune;
      if (f >= limit) continue;
      const double w = kTwoPi * f / rate;
      const double phi = prop_phase(r, h - 1);
      for (Eigen::Index i = 0; i < n; ++i) blades[i] += g / h * std::sin(w * i + phi);
    }
    if (cut) {
      const double w = kTwoPi * 0.5 * speeds[r] / rate;
      for (Eigen::Index i = 0; i < n; ++i) {
        blades[i] *= 1.0 + kCutModulationDepth * std::sin(w * i + shaft_phase[r]);
      }
    }
    out += blades;

    const bool dented = motor_fault && bad_rotor == r;
    Eigen::ArrayXd motor = Eigen::ArrayXd::Zero(n);
    for (int h = 1; h <= profile.n_motor_harmonics; ++h) {
      const double f = h * motors[r];
      if (f * (1.0 + kMotorJitter) >= limit) continue;
      const double amp = profile.motor_level * g / h;
      double phase = motor_phase(r, h - 1);
      for (Eigen::Index i = 0; i < n; ++i) {
        motor[i] += amp * std::sin(phase);
        phase += kTwoPi * f * (dented ? 1.0 + jitter[i] : 1.0) / rate;
      }
    }
    if (dented) {
      const double level = std::sqrt(motor.square().mean());
      motor += level * friction;
    }
    out += motor;
  }
  out += profile.broadband_level * floor_noise;

  DroneRender render;
  render.raw = out;
  const double peak = out.abs().maxCoeff();
  render.gain = peak > 0.0 ? kPeak / peak : 1.0;
  render.clip = AudioClip{out * render.gain, rate};
  render.blade_pass_hz = blade_pass;
  render.rotor_hz = speeds;
  render.motor_hz = motors;
  return render;
}

AudioClip synth_drone_sound(StatusLabel status, DirectionLabel direction,
                            const DroneProfile& profile, double duration_s, int rate, Rng& rng,
                            const MixerMatrix& mixer) {
  return render_drone_sound(status, direction, profile, duration_s, rate, rng, mixer).clip;
}

std::string_view name(NoiseKind kind) { return kNoiseNames[static_cast<int>(kind)]; }

std::optional<NoiseKind> parse_noise_kind(std::string_view text) {
  std::string key;
  for (char c : text) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (int i = 0; i < kNumNoiseKinds; ++i) {
    if (key == kNoiseNames[i]) return static_cast<NoiseKind>(i);
  }
  return std::nullopt;
}

Eigen::ArrayXd pink_noise(Eigen::Index n, int rate, Rng& rng) {
  Eigen::ArrayXd x = shape(white(n, rng), rate, [](double f) {
    return f <= 0.0 ? 0.0 : 1.0 / std::sqrt(std::max(f, 20.0));
  });
  return normalise_rms(std::move(x), 1.0);
}

AudioClip synth_background(NoiseKind kind, double duration_s, int rate, Rng& rng) {
  if (!(duration_s > 0.0)) throw DomainError("duration must be positive");
  const auto n = static_cast<Eigen::Index>(std::llround(duration_s * rate));
  Eigen::ArrayXd x = pink_noise(n, rate, rng);
  switch (kind) {
    case NoiseKind::kConstruction:
      add_bursts(x, rate, 5.0, 4.0, rng);
      break;
    case NoiseKind::kPond:
      x = shape(x, rate, [](double f) { return 1.0 / (1.0 + std::pow(f / 1200.0, 4)); });
      add_tone_events(x, rate, 3.0, 1500.0, 3000.0, 0.02, 0.3, rng);
      break;
    case NoiseKind::kHill: {
      x = shape(x, rate, [](double f) { return 1.0 / (1.0 + std::pow(f / 500.0, 4)); });
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const double gust = 0.2 + 0.3 * unit(rng), phase = kTwoPi * unit(rng);
      for (Eigen::Index i = 0; i < n; ++i) {
        x[i] *= 1.0 + 0.5 * std::sin(kTwoPi * gust * i / rate + phase);
      }
      break;
    }
    case NoiseKind::kSports:
      add_tone_events(x, rate, 1.5, 2000.0, 3500.0, 0.15, 1.5, rng);
      add_bursts(x, rate, 1.0, 2.0, rng);
      break;
    case NoiseKind::kGate: {
      Eigen::ArrayXd chatter = band_noise(n, rate, 300.0, 3000.0, rng);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const double syllable = 3.0 + 3.0 * unit(rng), phase = kTwoPi * unit(rng);
      for (Eigen::Index i = 0; i < n; ++i) {
        chatter[i] *= std::max(0.0, std::sin(kTwoPi * syllable * i / rate + phase));
      }
      x += chatter;
      break;
    }
  }
  return AudioClip{normalise_rms(std::move(x), kBackgroundRms), rate};
}

}  // namespace dronefault
