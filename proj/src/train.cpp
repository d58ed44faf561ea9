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

#include "dronefault/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "dronefault/errors.hpp"
#include "dronefault/optim.hpp"
#include "dronefault/seeding.hpp"

namespace dronefault {

using nlohmann::json;

void to_json(json& j, const TrainConfig& c) {
  j = json{{"epochs", c.epochs},
           {"batch_size", c.batch_size},
           {"lr", c.lr},
           {"sigma_lr_scale", c.sigma_lr_scale},
           {"swa", c.swa},
           {"swa_start", c.swa_start},
           {"eval_batch_size", c.eval_batch_size}};
}

void from_json(const json& j, TrainConfig& c) {
  static const std::vector<std::string> kKeys = {"epochs",    "batch_size", "lr",
                                                 "sigma_lr_scale", "swa", "swa_start",
                                                 "eval_batch_size"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw ConfigError("training: unknown key '" + key + "'");
    }
  }
  if (j.contains("epochs")) c.epochs = j.at("epochs").get<int>();
  if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<int>();
  if (j.contains("lr")) c.lr = j.at("lr").get<double>();
  if (j.contains("sigma_lr_scale")) c.sigma_lr_scale = j.at("sigma_lr_scale").get<double>();
  if (j.contains("swa")) c.swa = j.at("swa").get<bool>();
  if (j.contains("swa_start")) c.swa_start = j.at("swa_start").get<int>();
  if (j.contains("eval_batch_size")) c.eval_batch_size = j.at("eval_batch_size").get<int>();
}

void validate(const TrainConfig& c) {
  auto fail = [](const std::string& what) { throw ConfigError("training: " + what); };
  if (c.epochs < 1) fail("epochs must be positive");
  if (c.batch_size < 1) fail("batch_size must be positive");
  if (c.eval_batch_size < 1) fail("eval_batch_size must be positive");
  if (!(c.lr > 0.0)) fail("lr must be positive");
  if (!(c.sigma_lr_scale >= 0.0)) fail("sigma_lr_scale must be non-negative");
  if (c.swa && (c.swa_start < 0 || c.swa_start >= c.epochs)) fail("swa_start must lie in [0, epochs)");
}

MetricsReport evaluate(Model<float>& model, WaveformStore& store, Split split, int batch_size,
                       const std::string& model_name) {
  const ad::NormMode previous = model.mode();
  model.eval();
  ad::NoGradGuard no_grad;
  std::vector<int> pred_s, pred_d, true_s, true_d;
  const bool mtl = model.config().mode == TaskMode::kMultiTask;
  for (const auto& ids : batch_indices(store.manifest(), split, static_cast<std::size_t>(batch_size), std::nullopt)) {
    const auto batch = assemble_batch<float>(store, ids);
    const auto out = model.forward(batch.x);
    for (int p : argmax_rows(out.status)) pred_s.push_back(p);
    if (mtl) {
      for (int p : argmax_rows(out.direction)) pred_d.push_back(p);
    }
    for (std::size_t r : ids) {
      true_s.push_back(index(store.manifest().records[r].status));
      true_d.push_back(index(store.manifest().records[r].direction));
    }
  }
  if (previous == ad::NormMode::kTrain) model.train();

  MetricsReport report;
  report.model = model_name;
  report.split = std::string(name(split));
  report.status.f1 = macro_f1(pred_s, true_s, model.config().n_status);
  report.status.examples = true_s.size();
  if (mtl) {
    report.direction = TaskMetrics{macro_f1(pred_d, true_d, model.config().n_direction), true_d.size()};
  }
  return report;
}

void recompute_bn_stats(Model<float>& model, WaveformStore& store, int batch_size) {
  ad::NoGradGuard no_grad;
  model.reset_bn_stats();
  model.train();
  int k = 0;
  for (const auto& ids : batch_indices(store.manifest(), Split::kTrain, static_cast<std::size_t>(batch_size), std::nullopt)) {
    // Momentum 1/k turns the running update into a plain average over batches.
    model.set_bn_momentum(1.0 / ++k);
    model.forward(assemble_batch<float>(store, ids).x);
  }
  model.set_bn_momentum(0.1);
  model.eval();
}

namespace {

json checkpoint_meta(const TrainOptions& options, TaskMode mode, const std::string& source,
                     double val_f1) {
  json j;
  j["config_hash"] = options.config_hash;
  j["seed"] = options.seed;
  j["mode"] = std::string(name(mode));
  j["source"] = source;
  j["val_f1_status"] = val_f1;
  return j;
}

}  // namespace

TrainResult train(const TrainConfig& config, const ModelConfig& model_config, WaveformStore& store,
                  const TrainOptions& options) {
  validate(config);
  validate(model_config);
  const Manifest& manifest = store.manifest();
  if (manifest.count(Split::kTrain) == 0) throw DomainError("train split is empty");
  if (manifest.count(Split::kValid) == 0) throw DomainError("valid split is empty");
  if (store.length() != model_config.input_length) {
    throw ConfigError("model input_length " + std::to_string(model_config.input_length) +
                      " does not match the dataset's " + std::to_string(store.length()) + " samples");
  }

  const bool mtl = model_config.mode == TaskMode::kMultiTask;
  Rng init_rng(derive_seed(options.seed, 0x1417));
  Model<float> model(model_config, init_rng);
  UncertaintyWeights<float> weights;

  std::vector<ad::Tensor<float>> params;
  std::vector<std::string> names;
  for (const auto& p : model.parameters()) {
    params.push_back(p.tensor);
    names.push_back(p.name);
  }
  Adam<float> adam(params, names);
  Adam<float> sigma_adam({weights.rho_s, weights.rho_d}, {"uncertainty.rho_s", "uncertainty.rho_d"});
  SwaAverager<float> swa;

  TrainResult result;
  result.mode = model_config.mode;
  long long iteration = 0;
  model.train();
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_at(epoch, config.lr, config.epochs);
    const auto batches = batch_indices(manifest, Split::kTrain, static_cast<std::size_t>(config.batch_size),
                                       derive_seed(options.seed, 0x5000 + static_cast<std::uint64_t>(epoch)));
    double sum_total = 0.0, sum_s = 0.0, sum_d = 0.0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto batch = assemble_batch<float>(store, batches[b]);
      auto fail = [&](const std::string& what) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s at iteration %lld (epoch %d, batch %zu, lr %.6g)",
                      what.c_str(), iteration, epoch, b, lr);
        return TrainingError(buf);
      };
      TaskLosses<float> losses;
      ad::Tensor<float> total;
      try {
        const auto out = model.forward(batch.x);
        losses = task_losses(out.status, out.direction, batch.y_status, batch.y_direction);
        total = mtl ? total_loss(losses.status, losses.direction, weights) : losses.status;
      } catch (const DomainError& e) {
        throw fail(std::string("non-finite logits: ") + e.what());
      }
      const double value = total.item();
      if (!std::isfinite(value)) throw fail("non-finite loss");

      IterationTrace trace;
      trace.iteration = iteration;
      trace.loss_s = losses.status.item();
      if (mtl) {
        trace.loss_d = losses.direction.item();
        trace.sigma_s = weights.sigma_s();
        trace.sigma_d = weights.sigma_d();
        sum_d += *trace.loss_d;
      }
      sum_s += trace.loss_s;
      sum_total += value;
      result.iterations.push_back(trace);

      adam.zero_grad();
      sigma_adam.zero_grad();
      ad::backward(total);
      adam.step(lr);
      if (mtl) sigma_adam.step(lr * config.sigma_lr_scale);
      ++iteration;
    }
    const double n = static_cast<double>(batches.size());
    result.final_loss_s = sum_s / n;
    if (mtl) result.final_loss_d = sum_d / n;

    EpochTrace et;
    et.epoch = epoch;
    et.lr = lr;
    et.train_loss = sum_total / n;
    const auto report = evaluate(model, store, Split::kValid, config.eval_batch_size);
    et.val_f1_status = report.status.f1.macro;
    if (report.direction) et.val_f1_direction = report.direction->f1.macro;
    result.epochs.push_back(et);
    if (et.val_f1_status > result.best_val_f1) {
      result.best_val_f1 = et.val_f1_status;
      result.best_source = "epoch " + std::to_string(epoch);
      result.best = make_checkpoint(model, mtl ? &weights : nullptr,
                                    checkpoint_meta(options, model_config.mode, result.best_source,
                                                    et.val_f1_status));
    }
    if (config.swa && epoch >= config.swa_start) swa.update(params);
    if (options.log) {
      char buf[200];
      std::snprintf(buf, sizeof buf, "epoch %3d  lr %.3g  loss %.4f  val F1 status %.4f", epoch, lr,
                    et.train_loss, et.val_f1_status);
      *options.log << buf;
      if (et.val_f1_direction) {
        std::snprintf(buf, sizeof buf, "  direction %.4f  sigma_s %.3f  sigma_d %.3f", *et.val_f1_direction,
                      weights.sigma_s(), weights.sigma_d());
        *options.log << buf;
      }
      *options.log << std::endl;
    }
    if (options.on_epoch && !options.on_epoch(et, model)) break;
  }
  result.steps = adam.steps();
  if (mtl) {
    result.final_sigma_s = weights.sigma_s();
    result.final_sigma_d = weights.sigma_d();
  }

  if (swa.count() > 0) {
    Model<float> averaged = model.clone();
    std::vector<ad::Tensor<float>> targets;
    for (const auto& p : averaged.parameters()) targets.push_back(p.tensor);
    swa.assign_to(targets);
    recompute_bn_stats(averaged, store, config.eval_batch_size);
    const double f1 = evaluate(averaged, store, Split::kValid, config.eval_batch_size).status.f1.macro;
    result.swa_val_f1 = f1;
    if (options.log) *options.log << "swa over " << swa.count() << " epochs: val F1 status " << f1 << std::endl;
    if (f1 > result.best_val_f1) {
      result.best_val_f1 = f1;
      result.best_source = "swa";
      result.best = make_checkpoint(averaged, mtl ? &weights : nullptr,
                                    checkpoint_meta(options, model_config.mode, "swa", f1));
    }
  }
  return result;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string csv_preamble(const std::string& config_hash, std::uint64_t seed) {
  return "# config_hash=" + config_hash + " seed=" + std::to_string(seed) + "\n";
}

}  // namespace

std::string iteration_csv(const TrainResult& r, const std::string& config_hash, std::uint64_t seed) {
  const bool mtl = r.mode == TaskMode::kMultiTask;
  std::string out = csv_preamble(config_hash, seed);
  out += mtl ? "iteration,L_s,L_d,sigma_s,sigma_d\n" : "iteration,L_s\n";
  for (const auto& t : r.iterations) {
    out += std::to_string(t.iteration) + "," + fmt(t.loss_s);
    if (mtl) out += "," + fmt(*t.loss_d) + "," + fmt(*t.sigma_s) + "," + fmt(*t.sigma_d);
    out += "\n";
  }
  return out;
}

std::string epoch_csv(const TrainResult& r, const std::string& config_hash, std::uint64_t seed) {
  std::string out = csv_preamble(config_hash, seed);
  out += "epoch,lr,train_loss,val_f1_status,val_f1_direction\n";
  for (const auto& e : r.epochs) {
    out += std::to_string(e.epoch) + "," + fmt(e.lr) + "," + fmt(e.train_loss) + "," + fmt(e.val_f1_status) +
           "," + (e.val_f1_direction ? fmt(*e.val_f1_direction) : std::string("n/a")) + "\n";
  }
  return out;
}

void write_traces(const TrainResult& r, const std::filesystem::path& dir, const std::string& config_hash,
                  std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  auto put = [](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
  };
  put(dir / "iterations.csv", iteration_csv(r, config_hash, seed));
  put(dir / "epochs.csv", epoch_csv(r, config_hash, seed));
}

}  // namespace dronefault
