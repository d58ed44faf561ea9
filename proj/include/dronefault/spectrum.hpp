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
#include <complex>

namespace dronefault {

/// Discrete Fourier transform of a real sequence, bins 0..n/2 inclusive.
Eigen::ArrayXcd rfft(const Eigen::Ref<const Eigen::ArrayXd>& x);

/// Full-length inverse transform of a half spectrum produced by rfft()
/// (or shaped in place); `n` is the length of the time-domain signal.
Eigen::ArrayXd irfft(const Eigen::Ref<const Eigen::ArrayXcd>& half, Eigen::Index n);

/// |rfft(x)|, optionally after zero-padding to `n_fft` points.
Eigen::ArrayXd magnitude_spectrum(const Eigen::Ref<const Eigen::ArrayXd>& x,
                                  Eigen::Index n_fft = 0);

/// Welch power spectral density with a Hann window and 50% overlap.
/// Returns one value per bin 0..segment/2.
Eigen::ArrayXd welch_psd(const Eigen::Ref<const Eigen::ArrayXd>& x, Eigen::Index segment);

/// Frequency in Hz of bin k for an n-point transform at `rate`.
inline double bin_frequency(Eigen::Index k, Eigen::Index n, double rate) {
  return static_cast<double>(k) * rate / static_cast<double>(n);
}

}  // namespace dronefault
