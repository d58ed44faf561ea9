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

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <numbers>
#include <string>
#include <vector>

#include "dronefault/audio.hpp"
#include "dronefault/errors.hpp"
#include "dronefault/spectrum.hpp"
#include "test_util.hpp"

using namespace dronefault;
using dronefault::testing::TempDir;

namespace {

constexpr double kPi = std::numbers::pi;

// Hand-assembled RIFF bytes, independent of write_wav().
struct WavBytes {
  std::string b;
  void u16(std::uint16_t v) {
    b.push_back(static_cast<char>(v & 0xFF));
    b.push_back(static_cast<char>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void tag(const char* t) { b.append(t, 4); }
};

std::string make_wav(std::uint16_t format, int channels, int rate, int bits,
                     const std::string& payload, bool extensible = false) {
  WavBytes w;
  const std::uint32_t fmt_size = extensible ? 40 : 16;
  w.tag("RIFF");
  w.u32(static_cast<std::uint32_t>(4 + 8 + fmt_size + 8 + payload.size()));
  w.tag("WAVE");
  w.tag("fmt ");
  w.u32(fmt_size);
  w.u16(extensible ? 0xFFFE : format);
  w.u16(static_cast<std::uint16_t>(channels));
  w.u32(static_cast<std::uint32_t>(rate));
  w.u32(static_cast<std::uint32_t>(rate * channels * bits / 8));
  w.u16(static_cast<std::uint16_t>(channels * bits / 8));
  w.u16(static_cast<std::uint16_t>(bits));
  if (extensible) {
    w.u16(22);
    w.u16(static_cast<std::uint16_t>(bits));
    w.u32(0);
    w.u16(format);  // first two bytes of the sub-format GUID
    w.b.append(14, '\0');
  }
  w.tag("data");
  w.u32(static_cast<std::uint32_t>(payload.size()));
  w.b += payload;
  return w.b;
}

std::string pcm16(const std::vector<std::int16_t>& v) {
  WavBytes w;
  for (auto s : v) w.u16(static_cast<std::uint16_t>(s));
  return w.b;
}

std::string f32(const std::vector<float>& v) {
  std::string s(v.size() * 4, '\0');
  std::memcpy(s.data(), v.data(), s.size());
  return s;
}

Eigen::ArrayXd tone(double hz, int rate, Eigen::Index n, double amp = 1.0) {
  Eigen::ArrayXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * kPi * hz * i / rate);
  return x;
}

}  // namespace

TEST_SUITE("audio") {

TEST_CASE("pcm16 header arithmetic and normalisation") {
  TempDir dir("wav16");
  std::vector<std::int16_t> v(8000, 0);
  v[0] = 32767;
  v[1] = -32768;
  v[2] = 16384;
  testing::spit(dir / "a.wav", make_wav(1, 1, 16000, 16, pcm16(v)));
  AudioClip c = read_wav(dir / "a.wav");
  CHECK(c.size() == 8000);
  CHECK(c.sample_rate == 16000);
  CHECK(c.duration_seconds() == doctest::Approx(0.5));
  CHECK(c.samples[0] == 32767.0 / 32768.0);
  CHECK(c.samples[0] == doctest::Approx(0.999969).epsilon(1e-6));
  CHECK(c.samples[1] == -1.0);
  CHECK(c.samples[2] == 0.5);
}

TEST_CASE("pcm24 sign extension") {
  TempDir dir("wav24");
  std::string payload;
  for (std::int32_t v : {0x7FFFFF, -0x800000, 0x400000, -1}) {
    const auto u = static_cast<std::uint32_t>(v);
    payload.push_back(static_cast<char>(u & 0xFF));
    payload.push_back(static_cast<char>((u >> 8) & 0xFF));
    payload.push_back(static_cast<char>((u >> 16) & 0xFF));
  }
  testing::spit(dir / "a.wav", make_wav(1, 1, 48000, 24, payload));
  AudioClip c = read_wav(dir / "a.wav");
  REQUIRE(c.size() == 4);
  CHECK(c.samples[0] == 8388607.0 / 8388608.0);
  CHECK(c.samples[1] == -1.0);
  CHECK(c.samples[2] == 0.5);
  CHECK(c.samples[3] == -1.0 / 8388608.0);
}

TEST_CASE("stereo is averaged unless a channel is chosen") {
  TempDir dir("stereo");
  testing::spit(dir / "s.wav", make_wav(3, 2, 16000, 32, f32({0.2f, 0.4f, -0.5f, 0.25f})));
  AudioClip mono = read_wav(dir / "s.wav");
  REQUIRE(mono.size() == 2);
  CHECK(mono.samples[0] == doctest::Approx(0.3).epsilon(1e-7));
  CHECK(mono.samples[1] == doctest::Approx(-0.125).epsilon(1e-7));
  AudioClip right = read_wav(dir / "s.wav", 1);
  CHECK(right.samples[0] == doctest::Approx(0.4).epsilon(1e-7));
  CHECK_THROWS_AS(read_wav(dir / "s.wav", 2), DomainError);
}

TEST_CASE("extensible float header") {
  TempDir dir("ext");
  testing::spit(dir / "e.wav", make_wav(3, 1, 16000, 32, f32({0.125f, -0.75f}), true));
  AudioClip c = read_wav(dir / "e.wav");
  REQUIRE(c.size() == 2);
  CHECK(c.samples[1] == -0.75);
}

TEST_CASE("malformed and unsupported files") {
  TempDir dir("bad");
  testing::spit(dir / "junk.wav", "definitely not audio");
  CHECK_THROWS_AS(read_wav(dir / "junk.wav"), FormatError);
  testing::spit(dir / "alaw.wav", make_wav(6, 1, 8000, 8, std::string(16, '\0')));
  CHECK_THROWS_AS(read_wav(dir / "alaw.wav"), UnsupportedFormatError);
  testing::spit(dir / "pcm8.wav", make_wav(1, 1, 8000, 8, std::string(16, '\0')));
  CHECK_THROWS_AS(read_wav(dir / "pcm8.wav"), UnsupportedFormatError);
  std::string no_data = make_wav(1, 1, 8000, 16, "");
  no_data.resize(no_data.size() - 8);
  testing::spit(dir / "nodata.wav", no_data);
  CHECK_THROWS_AS(read_wav(dir / "nodata.wav"), FormatError);
  CHECK_THROWS_AS(read_wav(dir / "absent.wav"), IoError);
}

TEST_CASE("write_wav round trips") {
  TempDir dir("rt");
  Rng rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  AudioClip clip{Eigen::ArrayXd(1000), 16000};
  for (Eigen::Index i = 0; i < clip.size(); ++i) clip.samples[i] = static_cast<float>(u(rng));

  write_wav(clip, dir / "f.wav", SampleFormat::kFloat32);
  AudioClip back = read_wav(dir / "f.wav");
  CHECK(back.sample_rate == 16000);
  CHECK((back.samples == clip.samples).all());

  write_wav(clip, dir / "p.wav", SampleFormat::kPcm16);
  back = read_wav(dir / "p.wav");
  CHECK((back.samples - clip.samples).abs().maxCoeff() <= std::ldexp(1.0, -15));

  write_wav(clip, dir / "p24.wav", SampleFormat::kPcm24);
  back = read_wav(dir / "p24.wav");
  CHECK((back.samples - clip.samples).abs().maxCoeff() <= std::ldexp(1.0, -23));
}

TEST_CASE("pcm16 quantisation and clamp") {
  TempDir dir("clamp");
  AudioClip clip{Eigen::ArrayXd(3), 16000};
  clip.samples << 0.5, 1.2, -1.7;
  write_wav(clip, dir / "c.wav", SampleFormat::kPcm16);
  AudioClip back = read_wav(dir / "c.wav");
  CHECK(std::abs(back.samples[0] - 0.5) <= std::ldexp(1.0, -15));
  CHECK(back.samples[1] == 1.0 - std::ldexp(1.0, -15));
  CHECK(back.samples[2] == -1.0);
}

TEST_CASE("write_wav errors") {
  AudioClip clip{Eigen::ArrayXd::Zero(4), 16000};
  CHECK_THROWS_AS(write_wav(clip, "/nonexistent_dir_xyz/a.wav"), IoError);
  clip.samples[1] = std::nan("");
  TempDir dir("nan");
  CHECK_THROWS_AS(write_wav(clip, dir / "n.wav"), DomainError);
}

TEST_CASE("resample lengths and identity") {
  AudioClip c{tone(440.0, 48000, 48000), 48000};
  AudioClip d = resample(c, 16000);
  CHECK(d.size() == 16000);
  CHECK(d.sample_rate == 16000);

  AudioClip same = resample(c, 48000);
  CHECK((same.samples == c.samples).all());

  AudioClip odd{tone(300.0, 44100, 44100), 44100};
  AudioClip o = resample(odd, 16000);
  CHECK(o.size() == 16000);
  AudioClip up = resample(AudioClip{tone(300.0, 8000, 1001), 8000}, 16000);
  CHECK(up.size() == 2002);
  CHECK_THROWS_AS(resample(c, 0), DomainError);
}

TEST_CASE("1 kHz tone through 48k to 16k keeps its bin and rejects aliases") {
  AudioClip c{tone(1000.0, 48000, 96000, 0.9), 48000};
  AudioClip d = resample(c, 16000);
  // Skip filter edges; 16000 samples of steady state give 1 Hz bins.
  Eigen::ArrayXd mid = d.samples.segment(8000, 16000);
  Eigen::ArrayXd spec = magnitude_spectrum(mid).square();
  Eigen::Index peak;
  spec.maxCoeff(&peak);
  CHECK(bin_frequency(peak, 16000, 16000) == doctest::Approx(1000.0));
  const double tone_energy = spec.segment(peak - 2, 5).sum();
  const double above = spec.tail(spec.size() - 7200).sum();
  CHECK(10.0 * std::log10(above / tone_energy) <= -60.0);
}

TEST_CASE("decimation suppresses an out-of-band tone by 60 dB") {
  // 20 kHz would fold onto 4 kHz without the anti-alias filter.
  AudioClip c{tone(1000.0, 48000, 96000, 0.5) + tone(20000.0, 48000, 96000, 0.5), 48000};
  Eigen::ArrayXd mid = resample(c, 16000).samples.segment(8000, 16000);
  Eigen::ArrayXd spec = magnitude_spectrum(mid).square();
  const double wanted = spec.segment(998, 5).sum();
  const double alias = spec.segment(3998, 5).sum();
  CHECK(10.0 * std::log10(alias / wanted) <= -60.0);
}

TEST_CASE("lowpass fir shape") {
  Eigen::ArrayXd h = lowpass_fir(0.15, 255);
  CHECK(h.size() == 255);
  CHECK(h.sum() == doctest::Approx(1.0).epsilon(1e-9));
  for (int i = 0; i < 127; ++i) CHECK(h[i] == doctest::Approx(h[254 - i]).epsilon(1e-12));
  // Stopband by direct DTFT: everything that folds below 7.2 kHz after 48k -> 16k.
  double worst = 0.0;
  for (double f = 8800.0 / 48000.0; f < 0.5; f += 0.0005) {
    std::complex<double> acc = 0.0;
    for (int i = 0; i < 255; ++i) acc += h[i] * std::polar(1.0, -2.0 * kPi * f * i);
    worst = std::max(worst, std::abs(acc));
  }
  CHECK(20.0 * std::log10(worst) <= -60.0);
  CHECK_THROWS_AS(lowpass_fir(0.6, 255), DomainError);
  CHECK_THROWS_AS(lowpass_fir(0.2, 254), DomainError);
}

TEST_CASE("resample is linear") {
  Rng rng(3);
  std::normal_distribution<double> n(0.0, 0.3);
  Eigen::ArrayXd x(4800), y(4800);
  for (int i = 0; i < 4800; ++i) {
    x[i] = n(rng);
    y[i] = n(rng);
  }
  const double a = 0.7, b = -1.3;
  for (int target : {16000, 22050}) {
    Eigen::ArrayXd lhs = resample(AudioClip{a * x + b * y, 48000}, target).samples;
    Eigen::ArrayXd rhs = a * resample(AudioClip{x, 48000}, target).samples +
                         b * resample(AudioClip{y, 48000}, target).samples;
    CHECK((lhs - rhs).abs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("segment windows") {
  AudioClip ten{Eigen::ArrayXd::LinSpaced(160000, 0.0, 1.0), 16000};
  auto segs = segment(ten, 0.5);
  REQUIRE(segs.size() == 20);
  Eigen::Index pos = 0;
  for (const auto& s : segs) {
    CHECK(s.size() == 8000);
    CHECK(s.sample_rate == 16000);
    CHECK((s.samples == ten.samples.segment(pos, 8000)).all());
    pos += 8000;
  }
  CHECK(segment(AudioClip{Eigen::ArrayXd::Zero(6400), 16000}, 0.5).empty());
  auto two = segment(AudioClip{Eigen::ArrayXd::Zero(20000), 16000}, 0.5);
  CHECK(two.size() == 2);
  CHECK_THROWS_AS(segment(ten, 0.0), DomainError);
}

TEST_CASE("rms examples") {
  CHECK(rms(AudioClip{Eigen::ArrayXd::Constant(100, 0.5), 16000}) == doctest::Approx(0.5));
  CHECK(rms(AudioClip{tone(100.0, 16000, 1600), 16000}) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(rms(AudioClip{Eigen::ArrayXd::Zero(10), 16000}) == 0.0);
  CHECK_THROWS_AS(rms(AudioClip{Eigen::ArrayXd(0), 16000}), DomainError);
}

TEST_CASE("mix gains") {
  Rng rng(1);
  AudioClip s{tone(200.0, 16000, 8000), 16000};
  AudioClip n{tone(300.0, 16000, 16000), 16000};
  auto m0 = mix_components(s, n, 0.0, rng);
  CHECK(m0.gain == doctest::Approx(1.0).epsilon(1e-9));
  auto m20 = mix_components(s, n, 20.0, rng);
  CHECK(m20.gain == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(rms(m20.noise) == doctest::Approx(0.1 * rms(s)).epsilon(1e-12));
  CHECK(snr_db(m20.signal, m20.noise) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("mix crop and tiling") {
  Rng rng(5);
  AudioClip s{tone(200.0, 16000, 8000), 16000};
  Eigen::ArrayXd ramp = Eigen::ArrayXd::LinSpaced(3000, 0.1, 1.0);
  AudioClip n{ramp, 16000};
  auto m = mix_components(s, n, 12.0, rng);
  REQUIRE(m.noise.size() == 8000);
  for (Eigen::Index i = 0; i < 8000; ++i) {
    CHECK(m.noise[i] == doctest::Approx(m.gain * ramp[(m.noise_offset + i) % 3000]));
  }
  AudioClip mixed = mix_at_snr(s, n, 12.0, rng);
  CHECK(mixed.size() == 8000);
}

TEST_CASE("mix determinism and errors") {
  AudioClip s{tone(200.0, 16000, 8000), 16000};
  Rng noise_rng(9);
  std::normal_distribution<double> g;
  Eigen::ArrayXd nv(40000);
  for (auto& v : nv) v = g(noise_rng);
  AudioClip n{nv, 16000};
  Rng r1(42), r2(42);
  AudioClip a = mix_at_snr(s, n, 11.5, r1);
  AudioClip b = mix_at_snr(s, n, 11.5, r2);
  CHECK((a.samples == b.samples).all());
  Rng r(0);
  CHECK_THROWS_AS(mix_at_snr(AudioClip{Eigen::ArrayXd::Zero(10), 16000}, n, 10.0, r), DomainError);
  CHECK_THROWS_AS(mix_at_snr(s, AudioClip{Eigen::ArrayXd::Zero(10), 16000}, 10.0, r), DomainError);
  CHECK_THROWS_AS(mix_at_snr(s, AudioClip{nv, 48000}, 10.0, r), DomainError);
}

}  // TEST_SUITE
