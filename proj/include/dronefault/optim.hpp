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

#include <string>
#include <vector>

#include "dronefault/tensor.hpp"

namespace dronefault {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam over a fixed, named list of tensors.
template <typename Scalar>
class Adam {
 public:
  Adam(std::vector<ad::Tensor<Scalar>> params, std::vector<std::string> names,
       AdamOptions options = {});

  /// Throws ContractError naming the first tensor that has no gradient.
  void step(double lr);
  void zero_grad();

  long long steps() const { return t_; }
  const std::vector<ad::Array<double>>& first_moments() const { return m_; }
  const std::vector<ad::Array<double>>& second_moments() const { return v_; }

 private:
  std::vector<ad::Tensor<Scalar>> params_;
  std::vector<std::string> names_;
  AdamOptions options_;
  std::vector<ad::Array<double>> m_, v_;
  long long t_ = 0;
};

/// initial * 0.5 * (1 + cos(pi * epoch / total)).
double lr_at(int epoch, double initial = 5e-4, int total = 100);

/// Running mean of parameter snapshots.
template <typename Scalar>
class SwaAverager {
 public:
  void update(const std::vector<ad::Tensor<Scalar>>& params);
  /// Copies the mean into `params` (same order and shapes as the snapshots).
  void assign_to(const std::vector<ad::Tensor<Scalar>>& params) const;

  int count() const { return n_; }
  const std::vector<ad::Array<double>>& mean() const { return mean_; }

 private:
  std::vector<ad::Array<double>> mean_;
  int n_ = 0;
};

extern template class Adam<float>;
extern template class Adam<double>;
extern template class SwaAverager<float>;
extern template class SwaAverager<double>;

}  // namespace dronefault
