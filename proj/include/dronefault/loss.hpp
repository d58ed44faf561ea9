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

#include <cmath>

#include "dronefault/ops.hpp"
#include "dronefault/tensor.hpp"

namespace dronefault {

template <typename Scalar>
struct TaskLosses {
  ad::Tensor<Scalar> status;
  ad::Tensor<Scalar> direction;  // undefined when no direction head
};

/// Batch-mean cross-entropy per task. Throws ShapeError on mismatched shapes.
template <typename Scalar>
TaskLosses<Scalar> task_losses(const ad::Tensor<Scalar>& status_logits,
                               const ad::Tensor<Scalar>& direction_logits,
                               const ad::Tensor<Scalar>& y_status,
                               const ad::Tensor<Scalar>& y_direction);

/// Learnable observation noise, sigma^2 = exp(rho). rho starts at 0.
template <typename Scalar>
struct UncertaintyWeights {
  ad::Tensor<Scalar> rho_s = ad::Tensor<Scalar>::scalar(0, true);
  ad::Tensor<Scalar> rho_d = ad::Tensor<Scalar>::scalar(0, true);

  double sigma_sq_s() const { return std::exp(static_cast<double>(rho_s.item())); }
  double sigma_sq_d() const { return std::exp(static_cast<double>(rho_d.item())); }
  double sigma_s() const { return std::sqrt(sigma_sq_s()); }
  double sigma_d() const { return std::sqrt(sigma_sq_d()); }
};

/// L_s / s_s + L_d / s_d + ln(1 + s_s) + ln(1 + s_d) with s = sigma^2.
template <typename Scalar>
ad::Tensor<Scalar> total_loss(const ad::Tensor<Scalar>& loss_s, const ad::Tensor<Scalar>& loss_d,
                              const UncertaintyWeights<Scalar>& weights);

/// Same objective on plain numbers.
double total_loss_value(double loss_s, double loss_d, double sigma_sq_s, double sigma_sq_d);

/// Closed-form minimiser over sigma^2 of L / s + ln(1 + s) for fixed L > 0.
double stationary_sigma_sq(double loss);

}  // namespace dronefault
