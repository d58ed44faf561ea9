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

#include "dronefault/optim.hpp"

#include <cmath>
#include <numbers>

#include "dronefault/errors.hpp"

namespace dronefault {

template <typename Scalar>
Adam<Scalar>::Adam(std::vector<ad::Tensor<Scalar>> params, std::vector<std::string> names,
                   AdamOptions options)
    : params_(std::move(params)), names_(std::move(names)), options_(options) {
  if (names_.size() != params_.size()) throw ContractError("Adam: one name per tensor required");
  for (const auto& p : params_) {
    m_.push_back(ad::Array<double>::Zero(p.size()));
    v_.push_back(ad::Array<double>::Zero(p.size()));
  }
}

template <typename Scalar>
void Adam<Scalar>::step(double lr) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!params_[i].has_grad()) throw ContractError("Adam: no gradient for '" + names_[i] + "'");
  }
  ++t_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const ad::Array<double> g = params_[i].grad().template cast<double>();
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g.square();
    const ad::Array<double> update = lr * (m_[i] / c1) / ((v_[i] / c2).sqrt() + options_.eps);
    params_[i].data() -= update.template cast<Scalar>();
  }
}

template <typename Scalar>
void Adam<Scalar>::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

double lr_at(int epoch, double initial, int total) {
  if (total <= 0 || epoch < 0 || epoch >= total) throw DomainError("lr_at: epoch outside [0, total)");
  return initial * 0.5 * (1.0 + std::cos(std::numbers::pi * epoch / total));
}

template <typename Scalar>
void SwaAverager<Scalar>::update(const std::vector<ad::Tensor<Scalar>>& params) {
  if (n_ == 0) {
    mean_.clear();
    for (const auto& p : params) mean_.push_back(p.data().template cast<double>());
  } else {
    if (params.size() != mean_.size()) throw ContractError("SWA: parameter list changed");
    const double n = n_;
    for (std::size_t i = 0; i < params.size(); ++i) {
      mean_[i] = (mean_[i] * n + params[i].data().template cast<double>()) / (n + 1.0);
    }
  }
  ++n_;
}

template <typename Scalar>
void SwaAverager<Scalar>::assign_to(const std::vector<ad::Tensor<Scalar>>& params) const {
  if (n_ == 0) throw ContractError("SWA: no snapshots accumulated");
  if (params.size() != mean_.size()) throw ContractError("SWA: parameter list changed");
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i];
    p.data() = mean_[i].template cast<Scalar>();
  }
}

template class Adam<float>;
template class Adam<double>;
template class SwaAverager<float>;
template class SwaAverager<double>;

}  // namespace dronefault
