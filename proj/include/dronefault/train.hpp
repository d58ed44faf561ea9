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
#include <functional>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "dronefault/checkpoint.hpp"
#include "dronefault/dataset.hpp"
#include "dronefault/loss.hpp"
#include "dronefault/metrics.hpp"
#include "dronefault/model.hpp"

namespace dronefault {

struct TrainConfig {
  int epochs = 100;
  int batch_size = 16;
  double lr = 5e-4;
  /// Learning-rate multiplier for rho_s and rho_d.
  double sigma_lr_scale = 1.0;
  bool swa = true;
  int swa_start = 80;
  int eval_batch_size = 16;

  bool operator==(const TrainConfig&) const = default;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
void validate(const TrainConfig& c);

struct IterationTrace {
  long long iteration = 0;
  double loss_s = 0.0;
  // Multi-task only.
  std::optional<double> loss_d, sigma_s, sigma_d;
};

struct EpochTrace {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_f1_status = 0.0;
  std::optional<double> val_f1_direction;
};

struct TrainResult {
  TaskMode mode = TaskMode::kMultiTask;
  Checkpoint best;
  double best_val_f1 = -1.0;
  /// "epoch N" (zero-based) or "swa".
  std::string best_source;
  std::optional<double> swa_val_f1;
  std::vector<IterationTrace> iterations;
  std::vector<EpochTrace> epochs;
  /// Mean task losses over the last epoch.
  double final_loss_s = 0.0;
  std::optional<double> final_loss_d;
  std::optional<double> final_sigma_s, final_sigma_d;
  long long steps = 0;
};

/// Called after each epoch (validation done, SWA updated). Return false to
/// stop early.
using EpochCallback = std::function<bool(const EpochTrace&, Model<float>&)>;

struct TrainOptions {
  std::string config_hash;
  std::uint64_t seed = 0;
  EpochCallback on_epoch;
  /// Progress lines are written here when set.
  std::ostream* log = nullptr;
};

/// Trains on the train split, validates each epoch on the valid split.
/// Throws TrainingError on a non-finite loss and DomainError on empty splits.
TrainResult train(const TrainConfig& config, const ModelConfig& model_config, WaveformStore& store,
                  const TrainOptions& options);

/// Eval-mode metrics over one split, in manifest order with fixed batches.
MetricsReport evaluate(Model<float>& model, WaveformStore& store, Split split, int batch_size,
                       const std::string& model_name = "model");

/// Re-estimates batch-norm statistics with one pass over the train split.
void recompute_bn_stats(Model<float>& model, WaveformStore& store, int batch_size);

std::string iteration_csv(const TrainResult& result, const std::string& config_hash,
                          std::uint64_t seed);
std::string epoch_csv(const TrainResult& result, const std::string& config_hash,
                      std::uint64_t seed);
void write_traces(const TrainResult& result, const std::filesystem::path& dir,
                  const std::string& config_hash, std::uint64_t seed);

}  // namespace dronefault
