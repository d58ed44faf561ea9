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

namespace dronefault {

/// Equivalent rectangular bandwidth in Hz: 24.7 (4.37 f / 1000 + 1).
double erb(double f_hz);

/// ERB-rate scale: 21.4 log10(1 + 0.00437 f).
double erb_rate(double f_hz);
double erb_rate_inverse(double rate);

/// `n` centre frequencies equally spaced on the ERB-rate scale, endpoints
/// included.
Eigen::ArrayXd erb_space(double f_low, double f_high, int n);

/// Fourth-order gammatone impulse response, zero phase, bandwidth factor
/// 1.019, scaled so the peak of its `taps`-point DFT magnitude is 1:
///   g[n] = t^3 exp(-2 pi 1.019 ERB(fc) t) cos(2 pi fc t),  t = n / fs.
Eigen::ArrayXd gammatone_kernel(double fc, double fs, int taps);

/// Learnable front-end initialisation: one kernel per row.
struct GammatoneBank {
  int n_filters = 64;
  int taps = 512;
  int sample_rate = 16000;
  double f_low = 50.0;
  double f_high = 7800.0;
  Eigen::ArrayXd center_freqs;
  Eigen::MatrixXd kernels;  // n_filters x taps

  static GammatoneBank make(int n_filters = 64, int taps = 512, int sample_rate = 16000,
                            double f_low = 50.0, double f_high = 7800.0);
};

/// |DTFT| of `kernel` at `f_hz`.
double frequency_response(const Eigen::Ref<const Eigen::ArrayXd>& kernel, double f_hz, double fs);

}  // namespace dronefault
