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

#include "dronefault/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>
#include <string>

#include "dronefault/errors.hpp"

namespace dronefault {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t load_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t load_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void store_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void store_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
}

void store_tag(std::vector<unsigned char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

double decode_sample(const unsigned char* p, std::uint16_t format, int bits) {
  if (format == kFormatFloat) {
    float f;
    std::uint32_t raw = load_u32(p);
    std::memcpy(&f, &raw, sizeof f);
    return f;
  }
  if (bits == 16) {
    auto v = static_cast<std::int16_t>(load_u16(p));
    return v / 32768.0;
  }
  // 24-bit, sign-extended.
  std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
  if (v & 0x800000) v -= 0x1000000;
  return v / 8388608.0;
}

Eigen::ArrayXd window_weights(int taps) {
  // Blackman window; see lowpass_fir().
  Eigen::ArrayXd w(taps);
  const double denom = taps - 1;
  for (int i = 0; i < taps; ++i) {
    const double x = 2.0 * std::numbers::pi * i / denom;
    w[i] = 0.42 - 0.5 * std::cos(x) + 0.08 * std::cos(2.0 * x);
  }
  return w;
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Blackman window evaluated at a continuous offset from the kernel centre.
double blackman_at(double offset, double half_width) {
  if (std::abs(offset) >= half_width) return 0.0;
  const double x = std::numbers::pi * (offset / half_width + 1.0);
  return 0.42 - 0.5 * std::cos(x) + 0.08 * std::cos(2.0 * x);
}

}  // namespace

void validate(const AudioClip& clip) {
  if (clip.sample_rate <= 0) {
    throw DomainError("sample rate must be positive, got " + std::to_string(clip.sample_rate));
  }
  if (!clip.samples.isFinite().all()) {
    throw DomainError("audio clip contains non-finite samples");
  }
}

AudioClip read_wav(const std::filesystem::path& path, std::optional<int> channel) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError(path.string() + ": not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = load_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      // Some writers leave a bogus size on the data chunk; clamp it.
      if (std::memcmp(chunk, "data", 4) != 0) {
        throw FormatError(path.string() + ": truncated chunk");
      }
    }
    const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw FormatError(path.string() + ": fmt chunk too short");
      format = load_u16(bytes.data() + body);
      channels = load_u16(bytes.data() + body + 2);
      rate = load_u32(bytes.data() + body + 4);
      bits = load_u16(bytes.data() + body + 14);
      if (format == kFormatExtensible) {
        if (avail < 26) throw FormatError(path.string() + ": extensible fmt chunk too short");
        format = load_u16(bytes.data() + body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = avail;
    }
    pos = body + size + (size & 1);
  }

  if (!have_fmt) throw FormatError(path.string() + ": missing fmt chunk");
  if (data == nullptr) throw FormatError(path.string() + ": missing data chunk");
  if (channels == 0 || rate == 0) throw FormatError(path.string() + ": invalid fmt fields");
  const bool supported = (format == kFormatPcm && (bits == 16 || bits == 24)) ||
                         (format == kFormatFloat && bits == 32);
  if (!supported) {
    throw UnsupportedFormatError(path.string() + ": unsupported codec (format tag " +
                                 std::to_string(format) + ", " + std::to_string(bits) + " bits)");
  }
  if (channel && (*channel < 0 || *channel >= channels)) {
    throw DomainError(path.string() + ": channel " + std::to_string(*channel) +
                      " out of range for " + std::to_string(channels) + "-channel file");
  }

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const auto frames = static_cast<Eigen::Index>(data_size / frame_bytes);

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.samples.resize(frames);
  for (Eigen::Index f = 0; f < frames; ++f) {
    const unsigned char* frame = data + f * frame_bytes;
    if (channel) {
      clip.samples[f] = decode_sample(frame + *channel * bytes_per_sample, format, bits);
    } else {
      double acc = 0.0;
      for (int c = 0; c < channels; ++c) {
        acc += decode_sample(frame + c * bytes_per_sample, format, bits);
      }
      clip.samples[f] = acc / channels;
    }
  }
  return clip;
}

void write_wav(const AudioClip& clip, const std::filesystem::path& path, SampleFormat format) {
  validate(clip);
  const int bits = format == SampleFormat::kPcm16 ? 16 : format == SampleFormat::kPcm24 ? 24 : 32;
  const std::uint16_t tag = format == SampleFormat::kFloat32 ? kFormatFloat : kFormatPcm;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(clip.size()) * (bits / 8);

  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  store_tag(out, "RIFF");
  store_u32(out, 36 + data_bytes);
  store_tag(out, "WAVE");
  store_tag(out, "fmt ");
  store_u32(out, 16);
  store_u16(out, tag);
  store_u16(out, 1);
  store_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  store_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * (bits / 8));
  store_u16(out, static_cast<std::uint16_t>(bits / 8));
  store_u16(out, static_cast<std::uint16_t>(bits));
  store_tag(out, "data");
  store_u32(out, data_bytes);

  for (Eigen::Index i = 0; i < clip.size(); ++i) {
    const double x = clip.samples[i];
    if (format == SampleFormat::kFloat32) {
      const float f = static_cast<float>(x);
      std::uint32_t raw;
      std::memcpy(&raw, &f, sizeof raw);
      store_u32(out, raw);
    } else {
      const double full = bits == 16 ? 32768.0 : 8388608.0;
      const double q = std::clamp(std::round(x * full), -full, full - 1.0);
      const auto v = static_cast<std::int32_t>(q);
      out.push_back(static_cast<unsigned char>(v & 0xFF));
      out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
      if (bits == 24) out.push_back(static_cast<unsigned char>((v >> 16) & 0xFF));
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write " + path.string());
  file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("short write to " + path.string());
}

Eigen::ArrayXd lowpass_fir(double cutoff, int taps) {
  if (taps < 1 || taps % 2 == 0) throw DomainError("FIR length must be odd");
  if (!(cutoff > 0.0 && cutoff < 0.5)) throw DomainError("FIR cutoff must lie in (0, 0.5)");
  const int centre = taps / 2;
  Eigen::ArrayXd h(taps);
  for (int i = 0; i < taps; ++i) h[i] = 2.0 * cutoff * sinc(2.0 * cutoff * (i - centre));
  h *= window_weights(taps);
  return h / h.sum();
}

AudioClip resample(const AudioClip& clip, int target_rate) {
  if (target_rate <= 0) throw DomainError("target rate must be positive");
  validate(clip);
  if (target_rate == clip.sample_rate) return clip;

  const long src = clip.sample_rate;
  const long n_in = clip.size();
  const auto n_out = static_cast<Eigen::Index>(
      std::llround(static_cast<double>(n_in) * target_rate / src));

  AudioClip out;
  out.sample_rate = target_rate;
  out.samples.setZero(n_out);

  if (src % target_rate == 0) {
    // Integer decimation: 255-tap windowed-sinc low-pass, keep every factor-th sample.
    const long factor = src / target_rate;
    const Eigen::ArrayXd h = lowpass_fir(0.45 / static_cast<double>(factor), 255);
    const long centre = h.size() / 2;
    for (Eigen::Index n = 0; n < n_out; ++n) {
      const long t = n * factor;
      double acc = 0.0;
      const long k_lo = std::max(0L, t - centre);
      const long k_hi = std::min(n_in - 1, t + centre);
      for (long k = k_lo; k <= k_hi; ++k) acc += h[t - k + centre] * clip.samples[k];
      out.samples[n] = acc;
    }
    return out;
  }

  // General ratio: direct band-limited interpolation with a normalised
  // Blackman-windowed sinc evaluated at each fractional source position.
  const double ratio = static_cast<double>(target_rate) / src;
  const double cutoff = 0.45 * std::min(1.0, ratio);  // cycles per source sample
  const double half_width = 32.0 / std::min(1.0, ratio);
  for (Eigen::Index n = 0; n < n_out; ++n) {
    const double pos = static_cast<double>(n) * src / target_rate;
    const long k_lo = std::max(0L, static_cast<long>(std::ceil(pos - half_width)));
    const long k_hi = std::min(n_in - 1, static_cast<long>(std::floor(pos + half_width)));
    double acc = 0.0, norm = 0.0;
    for (long k = k_lo; k <= k_hi; ++k) {
      const double d = pos - k;
      const double w = 2.0 * cutoff * sinc(2.0 * cutoff * d) * blackman_at(d, half_width);
      acc += w * clip.samples[k];
      norm += w;
    }
    out.samples[n] = norm != 0.0 ? acc / norm : 0.0;
  }
  return out;
}

std::vector<AudioClip> segment(const AudioClip& clip, double duration_s) {
  if (!(duration_s > 0.0)) throw DomainError("segment duration must be positive");
  const auto width = static_cast<Eigen::Index>(std::llround(duration_s * clip.sample_rate));
  std::vector<AudioClip> out;
  if (width <= 0) return out;
  for (Eigen::Index start = 0; start + width <= clip.size(); start += width) {
    out.push_back(AudioClip{clip.samples.segment(start, width), clip.sample_rate});
  }
  return out;
}

double rms(const Eigen::Ref<const Eigen::ArrayXd>& samples) {
  if (samples.size() == 0) throw DomainError("rms of an empty clip");
  return std::sqrt(samples.square().mean());
}

double rms(const AudioClip& clip) { return rms(clip.samples); }

double snr_db(const Eigen::Ref<const Eigen::ArrayXd>& signal,
              const Eigen::Ref<const Eigen::ArrayXd>& noise) {
  return 20.0 * std::log10(rms(signal) / rms(noise));
}

MixComponents mix_components(const AudioClip& signal, const AudioClip& noise, double snr,
                             Rng& rng) {
  if (signal.sample_rate != noise.sample_rate) {
    throw DomainError("signal and noise sample rates differ (" +
                      std::to_string(signal.sample_rate) + " vs " +
                      std::to_string(noise.sample_rate) + ")");
  }
  const double signal_rms = rms(signal);
  if (signal_rms <= 0.0) throw DomainError("signal has zero RMS");
  if (rms(noise) <= 0.0) throw DomainError("noise has zero RMS");

  const Eigen::Index n = signal.size();
  const Eigen::Index m = noise.size();
  MixComponents mix;
  mix.noise.resize(n);
  if (m >= n) {
    std::uniform_int_distribution<Eigen::Index> pick(0, m - n);
    mix.noise_offset = pick(rng);
    mix.noise = noise.samples.segment(mix.noise_offset, n);
  } else {
    // Tile the short noise circularly, starting anywhere in one period.
    std::uniform_int_distribution<Eigen::Index> pick(0, m - 1);
    mix.noise_offset = pick(rng);
    for (Eigen::Index i = 0; i < n; ++i) mix.noise[i] = noise.samples[(mix.noise_offset + i) % m];
  }

  const double crop_rms = rms(mix.noise);
  if (crop_rms <= 0.0) throw DomainError("noise crop has zero RMS");
  mix.gain = signal_rms / (crop_rms * std::pow(10.0, snr / 20.0));
  mix.noise *= mix.gain;
  mix.signal = signal.samples;
  return mix;
}

AudioClip mix_at_snr(const AudioClip& signal, const AudioClip& noise, double snr, Rng& rng) {
  MixComponents mix = mix_components(signal, noise, snr, rng);
  return AudioClip{mix.signal + mix.noise, signal.sample_rate};
}

}  // namespace dronefault
