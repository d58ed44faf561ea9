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

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "dronefault/loss.hpp"
#include "dronefault/model.hpp"

namespace dronefault {

inline constexpr int kCheckpointVersion = 1;

struct StoredTensor {
  std::string name;
  ad::Shape shape;
  Eigen::ArrayXf values;
};

/// Model parameters, batch-norm buffers and (multi-task) rho_s / rho_d, all
/// stored as little-endian float32 after a JSON header.
struct Checkpoint {
  ModelConfig model;
  std::vector<StoredTensor> tensors;
  nlohmann::json metadata = nlohmann::json::object();

  const StoredTensor* find(const std::string& name) const;
};

template <typename Scalar>
Checkpoint make_checkpoint(Model<Scalar>& model, const UncertaintyWeights<Scalar>* weights,
                           nlohmann::json metadata);

std::string serialize(const Checkpoint& checkpoint);
Checkpoint deserialize(const std::string& bytes);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
/// Throws FormatError on a bad magic, an unknown version or a truncated payload.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies stored values into a model built from `checkpoint.model`. Throws
/// FormatError when names or shapes do not line up.
template <typename Scalar>
void restore(const Checkpoint& checkpoint, Model<Scalar>& model,
             UncertaintyWeights<Scalar>* weights = nullptr);

template <typename Scalar>
Model<Scalar> model_from_checkpoint(const Checkpoint& checkpoint);

}  // namespace dronefault
