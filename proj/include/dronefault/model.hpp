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

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "dronefault/audio.hpp"
#include "dronefault/labels.hpp"
#include "dronefault/ops.hpp"
#include "dronefault/tensor.hpp"

namespace dronefault {

enum class TaskMode { kMultiTask, kSingleTask };

/// How the last residual output is reduced before the heads: the mean over
/// time (one value per channel) or the mean over channels (one per frame).
enum class HeadPooling { kTemporal, kChannel };

struct BlockSpec {
  Eigen::Index channels = 64;
  Eigen::Index stride = 1;
  bool operator==(const BlockSpec&) const = default;
};

struct ModelConfig {
  int sample_rate = 16000;
  Eigen::Index input_length = 8000;
  Eigen::Index n_filters = 64;
  Eigen::Index taps = 512;
  Eigen::Index frontend_stride = 4;
  Eigen::Index pool_size = 8;
  Eigen::Index pool_stride = 8;
  double f_low = 50.0;
  double f_high = 7800.0;
  std::vector<BlockSpec> blocks{{64, 1}, {128, 2}, {128, 1}, {256, 2}, {256, 1}};
  Eigen::Index se_reduction = 8;
  int n_status = kNumStatus;
  int n_direction = kNumDirection;
  TaskMode mode = TaskMode::kMultiTask;
  HeadPooling head_pooling = HeadPooling::kTemporal;

  /// 8 filters of 64 taps, one block, 512-sample input. Used for gradient
  /// checks and quick sanity runs.
  static ModelConfig tiny();

  /// "Same"-style padding so the front end decimates by exactly the stride.
  Eigen::Index frontend_padding() const { return (taps - frontend_stride) / 2; }
  Eigen::Index frontend_frames() const;
  Eigen::Index pooled_frames() const;
  /// Width of the vector fed to the heads.
  Eigen::Index feature_width() const;

  bool operator==(const ModelConfig&) const = default;
};

/// Throws ConfigError describing the first violated constraint.
void validate(const ModelConfig& config);

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

std::string_view name(TaskMode mode);
TaskMode parse_task_mode(std::string_view text);

template <typename Scalar>
struct NamedTensor {
  std::string name;
  ad::Tensor<Scalar> tensor;
};

/// Non-trainable state (batch-norm running statistics) addressed by name.
template <typename Scalar>
struct NamedBuffer {
  std::string name;
  ad::Array<Scalar>* values;
};

template <typename Scalar>
struct ModelOutputs {
  ad::Tensor<Scalar> status;
  ad::Tensor<Scalar> direction;  // undefined for single-task models

  bool has_direction() const { return direction.defined(); }
  /// Throws ContractError for single-task models.
  const ad::Tensor<Scalar>& direction_logits() const;
};

/// Gammatone-initialised front end (conv -> abs -> max-pool), residual
/// stack with squeeze-excitation on every main path, temporal average
/// pooling and linear status/direction heads.
template <typename Scalar>
class Model {
 public:
  using Tensor = ad::Tensor<Scalar>;

  /// Front-end rows are set to the gammatone kernels; every other weight is
  /// He-normal, biases zero, batch-norm affine (1, 0).
  Model(const ModelConfig& config, Rng& rng);

  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  /// Deep copy: parameters and running statistics.
  Model clone() const;

  const ModelConfig& config() const { return config_; }

  void train() { mode_ = ad::NormMode::kTrain; }
  void eval() { mode_ = ad::NormMode::kEval; }
  ad::NormMode mode() const { return mode_; }

  /// Disables running-stat updates in train mode (for gradient checks).
  void freeze_stats(bool frozen) { frozen_stats_ = frozen; }
  /// Overrides batch-norm momentum; used to recompute statistics as a
  /// cumulative average.
  void set_bn_momentum(double momentum) { bn_momentum_ = momentum; }
  void reset_bn_stats();

  ModelOutputs<Scalar> forward(const Tensor& x);

  /// Trainable tensors in a fixed order with unique dotted names.
  std::vector<NamedTensor<Scalar>> parameters() const;
  std::vector<NamedBuffer<Scalar>> buffers();
  Eigen::Index parameter_count() const;
  std::uint64_t stats_digest() const;

 private:
  struct ConvBn {
    Tensor weight, gamma, beta;
    ad::BatchNormStats<Scalar> stats;
    Eigen::Index stride = 1, padding = 0;
  };
  struct SqueezeExcite {
    Tensor w1, b1, w2, b2;
  };
  struct Block {
    ConvBn conv1, conv2;
    SqueezeExcite se;
    bool has_projection = false;
    ConvBn projection;
    Eigen::Index stride = 1;
  };
  struct Head {
    Tensor weight, bias;
  };

  Model() = default;
  Tensor conv_bn(ConvBn& layer, const Tensor& x);

  ModelConfig config_;
  Tensor frontend_;
  std::vector<Block> blocks_;
  Head status_head_, direction_head_;
  ad::NormMode mode_ = ad::NormMode::kTrain;
  bool frozen_stats_ = false;
  double bn_momentum_ = 0.1;
};

/// Argmax per row, ties to the lowest index.
template <typename Scalar>
std::vector<int> argmax_rows(const ad::Tensor<Scalar>& logits);

struct Prediction {
  std::vector<StatusLabel> status;
  std::vector<DirectionLabel> direction;  // empty for single-task models
};

/// Eval-mode labels for a batch; throws ContractError in train mode.
template <typename Scalar>
Prediction predict(Model<Scalar>& model, const ad::Tensor<Scalar>& x);

extern template class Model<float>;
extern template class Model<double>;

}  // namespace dronefault
