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

#include "dronefault/spectrum.hpp"

#include <cmath>
#include <numbers>
#include <unsupported/Eigen/FFT>
#include <vector>

#include "dronefault/errors.hpp"

namespace dronefault {

Eigen::ArrayXcd rfft(const Eigen::Ref<const Eigen::ArrayXd>& x) {
  if (x.size() <= 1) return x.cast<std::complex<double>>();  // kissfft needs n >= 2
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> in(x.data(), x.data() + x.size());
  std::vector<std::complex<double>> out;
  fft.fwd(out, in);
  Eigen::ArrayXcd half(x.size() / 2 + 1);
  for (Eigen::Index k = 0; k < half.size(); ++k) half[k] = out[k];
  return half;
}

Eigen::ArrayXd irfft(const Eigen::Ref<const Eigen::ArrayXcd>& half, Eigen::Index n) {
  if (half.size() != n / 2 + 1) throw ShapeError("irfft: half spectrum length mismatch");
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<std::complex<double>> in(half.data(), half.data() + half.size());
  std::vector<double> out;
  fft.inv(out, in, n);
  return Eigen::Map<const Eigen::ArrayXd>(out.data(), n);
}

Eigen::ArrayXd magnitude_spectrum(const Eigen::Ref<const Eigen::ArrayXd>& x, Eigen::Index n_fft) {
  if (n_fft <= 0) n_fft = x.size();
  Eigen::ArrayXd padded = Eigen::ArrayXd::Zero(n_fft);
  const Eigen::Index n = std::min(n_fft, x.size());
  padded.head(n) = x.head(n);
  return rfft(padded).abs();
}

Eigen::ArrayXd welch_psd(const Eigen::Ref<const Eigen::ArrayXd>& x, Eigen::Index segment) {
  if (segment < 2 || segment > x.size()) throw DomainError("welch_psd: bad segment length");
  Eigen::ArrayXd window(segment);
  for (Eigen::Index i = 0; i < segment; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / segment);
  }
  const double scale = window.square().sum();
  const Eigen::Index hop = segment / 2;
  Eigen::ArrayXd psd = Eigen::ArrayXd::Zero(segment / 2 + 1);
  int count = 0;
  for (Eigen::Index start = 0; start + segment <= x.size(); start += hop) {
    Eigen::ArrayXd frame = x.segment(start, segment) * window;
    psd += rfft(frame).abs2();
    ++count;
  }
  return psd / (scale * count);
}

}  // namespace dronefault
