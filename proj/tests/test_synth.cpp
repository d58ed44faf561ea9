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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "dronefault/errors.hpp"
#include "dronefault/spectrum.hpp"
#include "dronefault/synth.hpp"

using namespace dronefault;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::ArrayXd hann(Eigen::Index n) {
  Eigen::ArrayXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / n);
  return w;
}

// Hand copy of the mixer table: rows forward, backward, right, left, cw, ccw.
const double kTable[6][4] = {{0.95, 0.95, 1.05, 1.05}, {1.05, 1.05, 0.95, 0.95},
                             {1.05, 0.95, 1.05, 0.95}, {0.95, 1.05, 0.95, 1.05},
                             {0.95, 1.05, 1.05, 0.95}, {1.05, 0.95, 0.95, 1.05}};

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("rotor speeds for forward flight") {
  const Eigen::Array4d base = Eigen::Array4d::Constant(275.0);
  Eigen::Array4d s = rotor_speeds(DirectionLabel::kForward, MixerMatrix::standard(), base);
  CHECK(s[0] == doctest::Approx(261.25));
  CHECK(s[1] == doctest::Approx(261.25));
  CHECK(s[2] == doctest::Approx(288.75));
  CHECK(s[3] == doctest::Approx(288.75));
  CHECK_THROWS_AS(rotor_speeds(DirectionLabel::kLeft, MixerMatrix::standard(),
                               Eigen::Array4d(1.0, 0.0, 1.0, 1.0)),
                  DomainError);
}

TEST_CASE("mixer table invariants") {
  const MixerMatrix m = MixerMatrix::standard();
  for (int d = 0; d < 6; ++d) {
    for (int r = 0; r < 4; ++r) {
      CHECK(m.factors(d, r) == doctest::Approx(kTable[d][r]));
      CHECK(m.factors(d, r) > 0.8);
      CHECK(m.factors(d, r) < 1.2);
    }
  }
  for (int pair : {0, 2, 4}) {
    for (int r = 0; r < 4; ++r) {
      CHECK(m.factors(pair + 1, r) == doctest::Approx(2.0 - m.factors(pair, r)));
    }
  }
  const int cw = index(DirectionLabel::kClockwise), ccw = index(DirectionLabel::kCounterClockwise);
  CHECK(m.factors(cw, 0) == m.factors(ccw, 1));
  CHECK(m.factors(cw, 3) == m.factors(ccw, 2));
  CHECK(m.factors(cw, 1) == m.factors(ccw, 0));
  CHECK(m.factors(cw, 2) == m.factors(ccw, 3));
  // Every row moves every rotor.
  CHECK(((m.factors.array() - 1.0).abs() > 0.01).all());
}

TEST_CASE("synthesis is deterministic, finite and bounded") {
  const DroneProfile p = drone_profile("A");
  for (StatusLabel s : {StatusLabel::kNormal, StatusLabel::kPropCut3, StatusLabel::kMotorFault2}) {
    Rng a(99), b(99);
    AudioClip x = synth_drone_sound(s, DirectionLabel::kRight, p, 0.5, 16000, a);
    AudioClip y = synth_drone_sound(s, DirectionLabel::kRight, p, 0.5, 16000, b);
    CHECK(x.size() == 8000);
    CHECK((x.samples == y.samples).all());
    CHECK(x.samples.isFinite().all());
    CHECK(x.samples.abs().maxCoeff() == doctest::Approx(0.9));
  }
  Rng r(0);
  CHECK_THROWS_AS(synth_drone_sound(StatusLabel::kNormal, DirectionLabel::kRight, p, 0.0, 16000, r),
                  DomainError);
}

TEST_CASE("status changes no random draw and only one rotor") {
  const DroneProfile p = drone_profile("B");
  Rng a(5), b(5);
  DroneRender n = render_drone_sound(StatusLabel::kNormal, DirectionLabel::kLeft, p, 0.5, 16000, a);
  DroneRender f =
      render_drone_sound(StatusLabel::kMotorFault4, DirectionLabel::kLeft, p, 0.5, 16000, b);
  CHECK((n.rotor_hz == f.rotor_hz).all());
  CHECK((n.motor_hz == f.motor_hz).all());
  CHECK(a() == b());
}

TEST_CASE("direction moves all four rotors") {
  const DroneProfile p = drone_profile("A");
  for (DirectionLabel d : kAllDirection) {
    Rng rng(17);
    DroneRender r = render_drone_sound(StatusLabel::kNormal, d, p, 0.1, 16000, rng);
    for (int k = 0; k < 4; ++k) {
      CHECK(r.rotor_hz[k] == doctest::Approx(r.blade_pass_hz[k] * kTable[index(d)][k]));
      CHECK(std::abs(r.rotor_hz[k] - r.blade_pass_hz[k]) > 1.0);
    }
  }
}

TEST_CASE("blade-pass peaks sit at every rotor speed") {
  const DroneProfile p = drone_profile("A");
  const int rate = 16000;
  const double seconds = 4.0;
  const auto n = static_cast<Eigen::Index>(seconds * rate);
  const double bin_hz = 1.0 / seconds;
  const Eigen::ArrayXd w = hann(n);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    for (DirectionLabel d : kAllDirection) {
      Rng rng(seed);
      DroneRender r = render_drone_sound(StatusLabel::kNormal, d, p, seconds, rate, rng);
      Eigen::ArrayXd mag = rfft(r.clip.samples * w).abs();
      for (int k = 0; k < 4; ++k) {
        const double expect = r.blade_pass_hz[k] * kTable[index(d)][k];
        CHECK(expect >= 237.0);
        CHECK(expect <= 316.0);
        const auto centre = static_cast<Eigen::Index>(std::llround(expect / bin_hz));
        Eigen::Index off;
        mag.segment(centre - 1, 3).maxCoeff(&off);
        const Eigen::Index peak = centre - 1 + off;
        INFO("seed " << seed << " dir " << name(d) << " rotor " << k);
        CHECK(mag[peak] >= mag[peak - 1]);
        CHECK(mag[peak] >= mag[peak + 1]);
        // A genuine tone, far above the noise floor around it.
        CHECK(mag[peak] > 20.0 * mag.segment(centre - 400, 200).mean());
      }
    }
  }
}

TEST_CASE("propeller cut changes only the cut rotor's harmonic grid") {
  const DroneProfile p = drone_profile("A");
  const int rate = 16000;
  const Eigen::Index n = rate;  // 1 Hz bins
  const Eigen::ArrayXd w = hann(n);
  for (int rotor = 0; rotor < 4; ++rotor) {
    const StatusLabel cut = status_from_index(1 + rotor);
    for (DirectionLabel d : {DirectionLabel::kForward, DirectionLabel::kClockwise}) {
      Rng a(21), b(21);
      DroneRender clean = render_drone_sound(StatusLabel::kNormal, d, p, 1.0, rate, a);
      DroneRender bad = render_drone_sound(cut, d, p, 1.0, rate, b);
      Eigen::ArrayXd diff_power = rfft((bad.raw - clean.raw) * w).abs2();
      const double f = clean.rotor_hz[rotor];
      // Half-integer multiples of f (modulation sidebands) and the detuned
      // odd harmonics with their sidebands.
      std::vector<double> grid;
      for (int k = 1; k <= 2 * p.n_prop_harmonics + 1; ++k) grid.push_back(0.5 * k * f);
      for (int h = 1; h <= p.n_prop_harmonics; h += 2) {
        for (double s : {-0.5, 0.0, 0.5}) grid.push_back((1.03 * h + s) * f);
      }
      std::vector<bool> on(diff_power.size(), false);
      for (double g : grid) {
        const auto c = static_cast<Eigen::Index>(std::llround(g));
        for (Eigen::Index k = std::max<Eigen::Index>(0, c - 3);
             k <= std::min<Eigen::Index>(diff_power.size() - 1, c + 3); ++k) {
          on[k] = true;
        }
      }
      double inside = 0.0;
      for (Eigen::Index k = 0; k < diff_power.size(); ++k) {
        if (on[k]) inside += diff_power[k];
      }
      INFO("rotor " << rotor << " dir " << name(d));
      CHECK(inside / diff_power.sum() >= 0.9);
    }
  }
}

TEST_CASE("profiles occupy disjoint blade-pass bands") {
  const MixerMatrix m = MixerMatrix::standard();
  for (const DroneProfile& p : default_profiles()) CHECK_NOTHROW(validate(p, 8000.0));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng ra(seed), rb(seed), rc(seed);
    DroneRender a = render_drone_sound(StatusLabel::kNormal, DirectionLabel::kForward,
                                       drone_profile("A"), 0.5, 16000, ra, m);
    DroneRender b = render_drone_sound(StatusLabel::kNormal, DirectionLabel::kForward,
                                       drone_profile("B"), 0.5, 16000, rb, m);
    DroneRender c = render_drone_sound(StatusLabel::kNormal, DirectionLabel::kForward,
                                       drone_profile("C"), 0.5, 16000, rc, m);
    CHECK(a.rotor_hz.maxCoeff() < b.rotor_hz.minCoeff());
    CHECK(b.rotor_hz.maxCoeff() < c.rotor_hz.minCoeff());
    // Strongest component below 600 Hz sits in each profile's own band.
    for (const DroneRender* r : {&a, &b, &c}) {
      Eigen::ArrayXd mag = magnitude_spectrum(r->clip.samples);
      Eigen::Index k;
      mag.segment(50, 250).maxCoeff(&k);
      const double hz = bin_frequency(50 + k, 8000, 16000.0);
      CHECK(hz >= r->rotor_hz.minCoeff() - 2.0);
      CHECK(hz <= r->rotor_hz.maxCoeff() + 2.0);
    }
  }
  CHECK_THROWS_AS(drone_profile("Z"), DomainError);
  DroneProfile bad = drone_profile("A");
  bad.motor_hz = {2000.0, 7500.0};
  CHECK_THROWS_AS(validate(bad, 8000.0), DomainError);
}

TEST_CASE("backgrounds are deterministic with rms 0.1") {
  for (NoiseKind k : kAllNoiseKinds) {
    Rng a(3), b(3);
    AudioClip x = synth_background(k, 2.0, 16000, a);
    AudioClip y = synth_background(k, 2.0, 16000, b);
    CHECK(x.size() == 32000);
    CHECK((x.samples == y.samples).all());
    CHECK(x.samples.isFinite().all());
    CHECK(rms(x) == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(parse_noise_kind(name(k)) == k);
  }
  Rng a(3), b(4);
  CHECK((synth_background(NoiseKind::kPond, 1.0, 16000, a).samples !=
         synth_background(NoiseKind::kPond, 1.0, 16000, b).samples)
            .any());
  CHECK_FALSE(parse_noise_kind("desert").has_value());
}

TEST_CASE("pink noise falls 3 dB per octave") {
  Rng rng(8);
  const int rate = 16000;
  Eigen::ArrayXd x = pink_noise(20 * rate, rate, rng);
  CHECK(rms(x) == doctest::Approx(1.0).epsilon(1e-9));
  const Eigen::Index seg = 4096;
  Eigen::ArrayXd psd = welch_psd(x, seg);
  // Least-squares slope of 10 log10 P against log2 f over 100 Hz - 4 kHz.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (Eigen::Index k = 1; k < psd.size(); ++k) {
    const double f = bin_frequency(k, seg, rate);
    if (f < 100.0 || f > 4000.0) continue;
    const double lx = std::log2(f), ly = 10.0 * std::log10(psd[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  CHECK(slope >= -4.0);
  CHECK(slope <= -2.0);
}

TEST_CASE("status is linearly decodable from spectra") {
  // Per direction: 200 training clips, ridge one-vs-rest on log spectra,
  // scored on 90 fresh clips.
  const DroneProfile p = drone_profile("A");
  const int rate = 16000;
  const Eigen::Index n = 8000;
  const Eigen::ArrayXd w = hann(n);
  const Eigen::Index n_feat = 2000;  // 0-4 kHz at 2 Hz
  auto features = [&](const AudioClip& c) {
    Eigen::ArrayXd mag = rfft(c.samples * w).abs();
    return Eigen::VectorXd((mag.head(n_feat) + 1e-3).log().matrix());
  };
  for (DirectionLabel d : kAllDirection) {
    const int n_train = 200, n_test = 90;
    Eigen::MatrixXd x(n_train + n_test, n_feat);
    std::vector<int> y(n_train + n_test);
    for (int i = 0; i < n_train + n_test; ++i) {
      y[i] = i % kNumStatus;
      Rng rng(1000 * (index(d) + 1) + i);
      x.row(i) = features(synth_drone_sound(status_from_index(y[i]), d, p, 0.5, rate, rng))
                     .transpose();
    }
    Eigen::RowVectorXd mu = x.topRows(n_train).colwise().mean();
    x.rowwise() -= mu;
    Eigen::MatrixXd xt = x.topRows(n_train);
    Eigen::MatrixXd targets = Eigen::MatrixXd::Constant(n_train, kNumStatus, -1.0);
    for (int i = 0; i < n_train; ++i) targets(i, y[i]) = 1.0;
    // Dual ridge: W = X^T (X X^T + lambda I)^-1 Y.
    const double lambda = 1e-2 * (xt * xt.transpose()).trace() / n_train;
    Eigen::MatrixXd gram = xt * xt.transpose();
    gram.diagonal().array() += lambda;
    Eigen::MatrixXd alpha = gram.ldlt().solve(targets);
    Eigen::MatrixXd scores = x.bottomRows(n_test) * (xt.transpose() * alpha);
    int correct = 0;
    for (int i = 0; i < n_test; ++i) {
      Eigen::Index best;
      scores.row(i).maxCoeff(&best);
      correct += best == y[n_train + i];
    }
    const double acc = static_cast<double>(correct) / n_test;
    INFO("direction " << name(d) << " accuracy " << acc);
    CHECK(acc > 0.8);
  }
}

}  // TEST_SUITE
