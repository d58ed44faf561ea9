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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dronefault/errors.hpp"
#include "dronefault/tensor.hpp"

namespace dronefault::ad {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_param = 0;
  Index worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  Index probes = 0;
};

/// |a - n| / max(|a|, |n|, 1e-8).
inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

/// Compares the reverse-mode gradient of the scalar `fn` with respect to
/// each tensor in `params` against central differences
/// (fn(p + eps) - fn(p - eps)) / (2 eps), element by element.
///
/// `fn` must be deterministic. If `state_digest` is given it is sampled
/// around every probe; a change (e.g. batch-norm running statistics being
/// updated) raises ContractError.
template <typename Scalar>
GradCheckResult grad_check(const std::function<Tensor<Scalar>()>& fn,
                           std::vector<Tensor<Scalar>> params, double eps = 1e-5,
                           const std::function<std::uint64_t()>& state_digest = {}) {
  for (auto& p : params) p.zero_grad();
  const std::uint64_t digest = state_digest ? state_digest() : 0;
  auto check_state = [&] {
    if (state_digest && state_digest() != digest) {
      throw ContractError("grad_check: function mutated hidden state between probes");
    }
  };

  Tensor<Scalar> loss = fn();
  check_state();
  backward(loss);
  std::vector<Array<Scalar>> analytic;
  analytic.reserve(params.size());
  for (auto& p : params) {
    analytic.push_back(p.has_grad() ? p.grad() : Array<Scalar>::Zero(p.size()));
  }

  GradCheckResult result;
  NoGradGuard no_grad;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Array<Scalar>& values = params[k].data();
    for (Index i = 0; i < values.size(); ++i) {
      const Scalar saved = values[i];
      values[i] = saved + static_cast<Scalar>(eps);
      const double up = fn().item();
      check_state();
      values[i] = saved - static_cast<Scalar>(eps);
      const double down = fn().item();
      check_state();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double err = relative_error(analytic[k][i], numeric);
      ++result.probes;
      if (err > result.max_rel_error || !std::isfinite(err)) {
        result.max_rel_error = std::isfinite(err) ? err : INFINITY;
        result.worst_param = k;
        result.worst_index = i;
        result.analytic = analytic[k][i];
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace dronefault::ad
