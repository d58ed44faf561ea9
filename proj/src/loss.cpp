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

#include "dronefault/loss.hpp"

#include <cmath>

#include "dronefault/errors.hpp"

namespace dronefault {

template <typename Scalar>
TaskLosses<Scalar> task_losses(const ad::Tensor<Scalar>& status_logits,
                               const ad::Tensor<Scalar>& direction_logits,
                               const ad::Tensor<Scalar>& y_status,
                               const ad::Tensor<Scalar>& y_direction) {
  TaskLosses<Scalar> out;
  out.status = ad::softmax_cce(status_logits, y_status);
  if (direction_logits.defined()) {
    if (!y_direction.defined()) throw ShapeError("direction logits given without direction targets");
    if (direction_logits.dim(0) != status_logits.dim(0)) {
      throw ShapeError("status and direction logits disagree on batch size");
    }
    out.direction = ad::softmax_cce(direction_logits, y_direction);
  }
  return out;
}

template <typename Scalar>
ad::Tensor<Scalar> total_loss(const ad::Tensor<Scalar>& loss_s, const ad::Tensor<Scalar>& loss_d,
                              const UncertaintyWeights<Scalar>& w) {
  auto term = [](const ad::Tensor<Scalar>& loss, const ad::Tensor<Scalar>& rho) {
    const auto inv = ad::exp(ad::scale(rho, Scalar(-1)));
    return ad::add(ad::mul(loss, inv), ad::log1p(ad::exp(rho)));
  };
  return ad::add(term(loss_s, w.rho_s), term(loss_d, w.rho_d));
}

double total_loss_value(double loss_s, double loss_d, double sigma_sq_s, double sigma_sq_d) {
  return loss_s / sigma_sq_s + loss_d / sigma_sq_d + std::log1p(sigma_sq_s) + std::log1p(sigma_sq_d);
}

double stationary_sigma_sq(double loss) {
  if (!(loss > 0.0)) throw DomainError("stationary point needs a positive loss");
  // s^2 - L s - L = 0, positive root.
  return 0.5 * (loss + std::sqrt(loss * loss + 4.0 * loss));
}

template struct TaskLosses<float>;
template struct TaskLosses<double>;
template TaskLosses<float> task_losses(const ad::Tensor<float>&, const ad::Tensor<float>&,
                                       const ad::Tensor<float>&, const ad::Tensor<float>&);
template TaskLosses<double> task_losses(const ad::Tensor<double>&, const ad::Tensor<double>&,
                                        const ad::Tensor<double>&, const ad::Tensor<double>&);
template ad::Tensor<float> total_loss(const ad::Tensor<float>&, const ad::Tensor<float>&,
                                      const UncertaintyWeights<float>&);
template ad::Tensor<double> total_loss(const ad::Tensor<double>&, const ad::Tensor<double>&,
                                       const UncertaintyWeights<double>&);

}  // namespace dronefault
