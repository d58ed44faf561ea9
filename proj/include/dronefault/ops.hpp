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

#include "dronefault/tensor.hpp"

namespace dronefault::ad {

// Differentiable primitives. Shapes are explicit: the only broadcast is the
// bias/affine parameter along the channel axis. Every op reports both shapes
// in its ShapeError.

/// Cross-correlation (no kernel flip) of x (B, Cin, T) with w (Cout, Cin, L).
/// Output length floor((T + 2 padding - L) / stride) + 1. `bias` (Cout) may be
/// an undefined tensor.
template <typename Scalar>
Tensor<Scalar> conv1d(const Tensor<Scalar>& x, const Tensor<Scalar>& w, const Tensor<Scalar>& bias,
                      Index stride = 1, Index padding = 0);

/// x (B, F) times w (O, F) transposed plus b (O).
template <typename Scalar>
Tensor<Scalar> linear(const Tensor<Scalar>& x, const Tensor<Scalar>& w, const Tensor<Scalar>& b);

enum class NormMode { kTrain, kEval };

template <typename Scalar>
struct BatchNormStats {
  Array<Scalar> mean;
  Array<Scalar> var;

  explicit BatchNormStats(Index channels = 0)
      : mean(Array<Scalar>::Zero(channels)), var(Array<Scalar>::Ones(channels)) {}
};

/// Per-channel normalisation over (B, T). Train mode uses batch statistics
/// and, when `update_stats` is set, blends them into `stats` with `momentum`
/// (the running variance uses the unbiased estimate). Eval mode uses `stats`.
template <typename Scalar>
Tensor<Scalar> batchnorm1d(const Tensor<Scalar>& x, const Tensor<Scalar>& gamma,
                           const Tensor<Scalar>& beta, BatchNormStats<Scalar>& stats,
                           NormMode mode, double momentum = 0.1, double eps = 1e-5,
                           bool update_stats = true);

enum class PoolKind { kMax, kAvg };

/// Windowed max or mean along time. In ceil mode a trailing partial window
/// is kept when it starts inside the input (and averaged over its valid
/// samples). Max ties go to the first index.
template <typename Scalar>
Tensor<Scalar> pool1d(const Tensor<Scalar>& x, PoolKind kind, Index size, Index stride,
                      bool ceil_mode = false);

enum class Activation { kRelu, kSigmoid, kAbs, kExp, kLog1p };

/// relu and abs use subgradient 0 at 0.
template <typename Scalar>
Tensor<Scalar> elementwise(const Tensor<Scalar>& x, Activation kind);

template <typename Scalar>
Tensor<Scalar> relu(const Tensor<Scalar>& x) { return elementwise(x, Activation::kRelu); }
template <typename Scalar>
Tensor<Scalar> sigmoid(const Tensor<Scalar>& x) { return elementwise(x, Activation::kSigmoid); }
template <typename Scalar>
Tensor<Scalar> abs(const Tensor<Scalar>& x) { return elementwise(x, Activation::kAbs); }
template <typename Scalar>
Tensor<Scalar> exp(const Tensor<Scalar>& x) { return elementwise(x, Activation::kExp); }
template <typename Scalar>
Tensor<Scalar> log1p(const Tensor<Scalar>& x) { return elementwise(x, Activation::kLog1p); }

/// Mean over time: (B, C, T) -> (B, C).
template <typename Scalar>
Tensor<Scalar> global_avg_pool(const Tensor<Scalar>& x);

/// Mean over channels: (B, C, T) -> (B, T).
template <typename Scalar>
Tensor<Scalar> channel_mean(const Tensor<Scalar>& x);

/// x (B, C, T) scaled by s (B, C) per channel.
template <typename Scalar>
Tensor<Scalar> scale_channels(const Tensor<Scalar>& x, const Tensor<Scalar>& s);

template <typename Scalar>
Tensor<Scalar> add(const Tensor<Scalar>& a, const Tensor<Scalar>& b);
template <typename Scalar>
Tensor<Scalar> mul(const Tensor<Scalar>& a, const Tensor<Scalar>& b);
template <typename Scalar>
Tensor<Scalar> scale(const Tensor<Scalar>& x, Scalar factor);
template <typename Scalar>
Tensor<Scalar> sum(const Tensor<Scalar>& x);

/// Batch mean of categorical cross entropy between softmax(logits) and
/// `target` rows, via log-sum-exp. Gradient (softmax - y) / B.
template <typename Scalar>
Tensor<Scalar> softmax_cce(const Tensor<Scalar>& logits, const Tensor<Scalar>& target);

/// Row-wise softmax, no history.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> softmax(
    const Tensor<Scalar>& logits);

namespace testing {
/// Flips the sign of linear()'s backward pass; used to prove the gradient
/// checker catches a broken primitive.
void set_corrupt_linear_backward(bool on);
bool corrupt_linear_backward();
}  // namespace testing

}  // namespace dronefault::ad
