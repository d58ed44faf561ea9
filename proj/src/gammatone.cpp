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

#include "dronefault/gammatone.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "dronefault/errors.hpp"
#include "dronefault/spectrum.hpp"

namespace dronefault {

double erb(double f_hz) { return 24.7 * (4.37 * f_hz / 1000.0 + 1.0); }

double erb_rate(double f_hz) { return 21.4 * std::log10(1.0 + 0.00437 * f_hz); }

double erb_rate_inverse(double rate) { return (std::pow(10.0, rate / 21.4) - 1.0) / 0.00437; }

Eigen::ArrayXd erb_space(double f_low, double f_high, int n) {
  if (!(f_low > 0.0 && f_low < f_high) || n < 2) {
    throw DomainError("erb_space: need 0 < f_low < f_high and n >= 2");
  }
  const double lo = erb_rate(f_low), hi = erb_rate(f_high);
  Eigen::ArrayXd out(n);
  for (int i = 0; i < n; ++i) out[i] = erb_rate_inverse(lo + (hi - lo) * i / (n - 1));
  out[0] = f_low;
  out[n - 1] = f_high;
  return out;
}

Eigen::ArrayXd gammatone_kernel(double fc, double fs, int taps) {
  if (!(fc > 0.0 && fc < fs / 2.0)) {
    throw DomainError("gammatone_kernel: centre " + std::to_string(fc) +
                      " Hz outside (0, Nyquist)");
  }
  if (taps < 2) throw DomainError("gammatone_kernel: need at least two taps");
  const double b = 2.0 * std::numbers::pi * 1.019 * erb(fc);
  const double w = 2.0 * std::numbers::pi * fc;
  Eigen::ArrayXd g(taps);
  for (int n = 0; n < taps; ++n) {
    const double t = n / fs;
    g[n] = t * t * t * std::exp(-b * t) * std::cos(w * t);
  }
  const double peak = magnitude_spectrum(g).maxCoeff();
  return g / peak;
}

double frequency_response(const Eigen::Ref<const Eigen::ArrayXd>& kernel, double f_hz, double fs) {
  const double w = 2.0 * std::numbers::pi * f_hz / fs;
  std::complex<double> acc = 0.0;
  for (Eigen::Index n = 0; n < kernel.size(); ++n) {
    acc += kernel[n] * std::polar(1.0, -w * static_cast<double>(n));
  }
  return std::abs(acc);
}

GammatoneBank GammatoneBank::make(int n_filters, int taps, int sample_rate, double f_low,
                                  double f_high) {
  if (f_high >= sample_rate / 2.0) throw DomainError("gammatone bank: f_high at or above Nyquist");
  GammatoneBank bank;
  bank.n_filters = n_filters;
  bank.taps = taps;
  bank.sample_rate = sample_rate;
  bank.f_low = f_low;
  bank.f_high = f_high;
  bank.center_freqs = erb_space(f_low, f_high, n_filters);
  bank.kernels.resize(n_filters, taps);
  for (int k = 0; k < n_filters; ++k) {
    bank.kernels.row(k) = gammatone_kernel(bank.center_freqs[k], sample_rate, taps).matrix().transpose();
  }
  return bank;
}

}  // namespace dronefault
