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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <vector>

namespace dronefault {

/// Seeded generator used everywhere randomness is needed.
using Rng = std::mt19937_64;

/// Mono waveform. Samples are nominally in [-1, 1]; all DSP runs in double.
struct AudioClip {
  Eigen::ArrayXd samples;
  int sample_rate = 0;

  Eigen::Index size() const { return samples.size(); }
  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Throws DomainError if the rate is not positive or a sample is not finite.
void validate(const AudioClip& clip);

enum class SampleFormat { kPcm16, kPcm24, kFloat32 };

/// Reads a RIFF/WAVE file (PCM-16, PCM-24 or IEEE float-32). Multi-channel
/// audio is averaged to mono unless `channel` selects one channel.
AudioClip read_wav(const std::filesystem::path& path,
                   std::optional<int> channel = std::nullopt);

/// Writes a mono WAV file. PCM output is clamped to [-1, 1 - 2^-(bits-1)].
void write_wav(const AudioClip& clip, const std::filesystem::path& path,
               SampleFormat format = SampleFormat::kFloat32);

/// Windowed-sinc low-pass used ahead of integer decimation.
/// `cutoff` is in cycles per sample (0 < cutoff < 0.5); taps is odd.
Eigen::ArrayXd lowpass_fir(double cutoff, int taps);

/// Band-limited resampling to `target_rate`. Output length is
/// round(len * target_rate / sample_rate). Identity when the rates match.
AudioClip resample(const AudioClip& clip, int target_rate);

/// Consecutive non-overlapping windows of round(duration_s * rate) samples.
/// A trailing partial window is dropped.
std::vector<AudioClip> segment(const AudioClip& clip, double duration_s);

double rms(const AudioClip& clip);
double rms(const Eigen::Ref<const Eigen::ArrayXd>& samples);

/// The two scaled components of an SNR-calibrated mixture.
struct MixComponents {
  Eigen::ArrayXd signal;
  Eigen::ArrayXd noise;  // already multiplied by gain
  double gain = 0.0;
  Eigen::Index noise_offset = 0;
};

/// Crops (tiling first when short) `noise` at a random offset and scales it
/// so that 20 log10(rms(signal) / rms(gain * noise)) == snr_db.
MixComponents mix_components(const AudioClip& signal, const AudioClip& noise,
                             double snr_db, Rng& rng);

/// signal + gain * cropped noise, see mix_components().
AudioClip mix_at_snr(const AudioClip& signal, const AudioClip& noise,
                     double snr_db, Rng& rng);

/// 20 log10(rms(a) / rms(b)).
double snr_db(const Eigen::Ref<const Eigen::ArrayXd>& signal,
              const Eigen::Ref<const Eigen::ArrayXd>& noise);

}  // namespace dronefault
