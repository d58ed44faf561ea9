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

#include "dronefault/experiment.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "dronefault/checkpoint.hpp"
#include "dronefault/errors.hpp"
#include "dronefault/seeding.hpp"
#include "dronefault/train.hpp"

namespace dronefault {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

template <typename T>
ordered_json opt(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

template <typename T>
std::optional<T> opt_get(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

std::string RunSpec::label() const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s_%s_f%g_s%llu", std::string(name(mode)).c_str(), profile.c_str(), fraction,
                static_cast<unsigned long long>(seed));
  return buf;
}

ordered_json to_json(const RunOutcome& o) {
  ordered_json j;
  j["mode"] = std::string(name(o.spec.mode));
  j["profile"] = o.spec.profile;
  j["fraction"] = o.spec.fraction;
  j["seed"] = o.spec.seed;
  j["run_hash"] = o.run_hash;
  j["train_examples"] = o.train_examples;
  j["test_f1_status"] = o.test_f1_status;
  j["test_f1_direction"] = opt(o.test_f1_direction);
  j["best_val_f1_status"] = o.best_val_f1;
  j["best_source"] = o.best_source;
  j["final_loss_s"] = o.final_loss_s;
  j["final_loss_d"] = opt(o.final_loss_d);
  j["final_sigma_s"] = opt(o.final_sigma_s);
  j["final_sigma_d"] = opt(o.final_sigma_d);
  return j;
}

RunOutcome run_outcome_from_json(const json& j) {
  RunOutcome o;
  try {
    o.spec.mode = parse_task_mode(j.at("mode").get<std::string>());
    o.spec.profile = j.at("profile").get<std::string>();
    o.spec.fraction = j.at("fraction").get<double>();
    o.spec.seed = j.at("seed").get<std::uint64_t>();
    o.run_hash = j.at("run_hash").get<std::string>();
    o.train_examples = j.at("train_examples").get<std::size_t>();
    o.test_f1_status = j.at("test_f1_status").get<double>();
    o.test_f1_direction = opt_get<double>(j, "test_f1_direction");
    o.best_val_f1 = j.at("best_val_f1_status").get<double>();
    o.best_source = j.at("best_source").get<std::string>();
    o.final_loss_s = j.at("final_loss_s").get<double>();
    o.final_loss_d = opt_get<double>(j, "final_loss_d");
    o.final_sigma_s = opt_get<double>(j, "final_sigma_s");
    o.final_sigma_d = opt_get<double>(j, "final_sigma_d");
  } catch (const json::exception& e) {
    throw FormatError(std::string("run result: ") + e.what());
  }
  return o;
}

std::vector<RunSpec> experiment_grid(const RunConfig& config) {
  std::vector<RunSpec> out;
  for (const auto& profile : config.dataset.profiles) {
    for (double fraction : config.experiment.fractions) {
      for (auto seed : config.seeds) {
        for (auto mode : config.experiment.modes) out.push_back({mode, profile, fraction, seed});
      }
    }
  }
  return out;
}

Manifest select_profile(const Manifest& manifest, const std::string& profile) {
  Manifest out;
  out.root = manifest.root;
  out.header = manifest.header;
  for (const auto& r : manifest.records) {
    if (r.drone_type == profile) out.records.push_back(r);
  }
  return out;
}

std::string run_hash(const RunConfig& config, const Manifest& manifest, const RunSpec& spec) {
  json training;
  to_json(training, config.training);
  json model;
  to_json(model, config.model);
  char manifest_hash[17];
  std::snprintf(manifest_hash, sizeof manifest_hash, "%016llx",
                static_cast<unsigned long long>(fnv1a(manifest_jsonl(manifest))));
  const json j = {{"model", model},
                  {"training", training},
                  {"manifest", manifest_hash},
                  {"mode", name(spec.mode)},
                  {"profile", spec.profile},
                  {"fraction", spec.fraction},
                  {"seed", spec.seed}};
  return config_hash(j);
}

RunOutcome run_single(const RunConfig& config, const Manifest& manifest, const RunSpec& spec,
                      const fs::path& out_dir, std::shared_ptr<SampleCache> cache, std::ostream* log) {
  const fs::path dir = out_dir / spec.label();
  const std::string hash = run_hash(config, manifest, spec);
  const fs::path result_file = dir / "result.json";
  if (fs::exists(result_file) && fs::exists(dir / "best.ckpt")) {
    std::ifstream in(result_file);
    try {
      const json j = json::parse(in);
      if (j.value("run_hash", std::string{}) == hash) {
        RunOutcome o = run_outcome_from_json(j);
        o.resumed = true;
        return o;
      }
    } catch (const json::exception&) {
      // Unreadable leftovers are simply recomputed.
    }
  }

  const Manifest profile = select_profile(manifest, spec.profile);
  if (profile.records.empty()) throw DomainError("manifest has no records for profile '" + spec.profile + "'");
  const Manifest subset = subsample_train(profile, spec.fraction, derive_seed(spec.seed, 0xF4AC));
  WaveformStore store(subset, config.model.input_length, std::move(cache));

  ModelConfig model_config = config.model;
  model_config.mode = spec.mode;
  TrainOptions options;
  options.config_hash = hash;
  options.seed = spec.seed;
  options.log = log;
  const TrainResult result = train(config.training, model_config, store, options);

  Model<float> best = model_from_checkpoint<float>(result.best);
  const MetricsReport test = evaluate(best, store, Split::kTest, config.training.eval_batch_size,
                                      spec.label());

  RunOutcome o;
  o.spec = spec;
  o.run_hash = hash;
  o.train_examples = subset.count(Split::kTrain);
  o.test_f1_status = test.status.f1.macro;
  if (test.direction) o.test_f1_direction = test.direction->f1.macro;
  o.best_val_f1 = result.best_val_f1;
  o.best_source = result.best_source;
  o.final_loss_s = result.final_loss_s;
  o.final_loss_d = result.final_loss_d;
  o.final_sigma_s = result.final_sigma_s;
  o.final_sigma_d = result.final_sigma_d;

  fs::create_directories(dir);
  save_checkpoint(result.best, dir / "best.ckpt");
  write_traces(result, dir, hash, spec.seed);
  ordered_json metrics = to_json(test);
  write_file(dir / "test_metrics.json", metrics.dump(2) + "\n");
  // Written last: its presence marks the run as complete.
  write_file(result_file, to_json(o).dump(2) + "\n");
  return o;
}

ExperimentReport run_experiment(const RunConfig& config, const Manifest& manifest, const fs::path& out_dir,
                                int jobs, std::ostream* log) {
  validate(config);
  const auto grid = experiment_grid(config);
  fs::create_directories(out_dir / "runs");
  auto cache = std::make_shared<SampleCache>();

  std::vector<RunOutcome> outcomes(grid.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  std::exception_ptr error;
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(grid.size())));
  auto work = [&] {
    for (std::size_t i; (i = next++) < grid.size();) {
      {
        std::lock_guard<std::mutex> lock(log_mutex);
        if (error) return;
        if (log) *log << "[" << i + 1 << "/" << grid.size() << "] " << grid[i].label() << std::endl;
      }
      try {
        outcomes[i] = run_single(config, manifest, grid[i], out_dir / "runs", cache, workers == 1 ? log : nullptr);
        std::lock_guard<std::mutex> lock(log_mutex);
        if (log) {
          *log << "  " << grid[i].label() << (outcomes[i].resumed ? " (resumed)" : "") << ": test F1 status "
               << fixed(outcomes[i].test_f1_status) << std::endl;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(log_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  ExperimentReport report;
  report.config_hash = config_hash(config);
  report.runs = std::move(outcomes);
  write_file(out_dir / "report.json", to_json(report).dump(2) + "\n");
  write_file(out_dir / "report.csv", report_csv(report));
  write_file(out_dir / "summary.txt", summary_table(report));
  return report;
}

ordered_json to_json(const ExperimentReport& report) {
  ordered_json j;
  j["config_hash"] = report.config_hash;
  ordered_json runs = ordered_json::array();
  for (const auto& r : report.runs) runs.push_back(to_json(r));
  j["runs"] = runs;
  return j;
}

std::string report_csv(const ExperimentReport& report) {
  std::string out = "# config_hash=" + report.config_hash + "\n";
  out += "mode,profile,fraction,seed,test_f1_status,test_f1_direction,best_val_f1_status,best_source,"
         "final_loss_s,final_loss_d,final_sigma_s,final_sigma_d\n";
  auto o = [](const std::optional<double>& v) { return v ? g9(*v) : std::string("n/a"); };
  for (const auto& r : report.runs) {
    out += std::string(name(r.spec.mode)) + "," + r.spec.profile + "," + g9(r.spec.fraction) + "," +
           std::to_string(r.spec.seed) + "," + g9(r.test_f1_status) + "," + o(r.test_f1_direction) + "," +
           g9(r.best_val_f1) + "," + r.best_source + "," + g9(r.final_loss_s) + "," + o(r.final_loss_d) + "," +
           o(r.final_sigma_s) + "," + o(r.final_sigma_d) + "\n";
  }
  return out;
}

std::string summary_table(const ExperimentReport& report) {
  struct Cell {
    double status = 0.0, direction = 0.0;
    int n = 0, n_direction = 0;
  };
  std::map<std::tuple<std::string, double, std::string>, Cell> cells;
  for (const auto& r : report.runs) {
    auto& c = cells[{r.spec.profile, -r.spec.fraction, std::string(name(r.spec.mode))}];
    c.status += r.test_f1_status;
    ++c.n;
    if (r.test_f1_direction) {
      c.direction += *r.test_f1_direction;
      ++c.n_direction;
    }
  }
  std::ostringstream out;
  out << "config " << report.config_hash << "\n";
  out << "test macro F1, mean over seeds\n";
  out << "profile  fraction  mode  runs  status  direction\n";
  for (const auto& [key, c] : cells) {
    const auto& [profile, neg_fraction, mode] = key;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-7s  %8g  %-4s  %4d  %6s  %9s\n", profile.c_str(), -neg_fraction,
                  mode.c_str(), c.n, fixed(c.status / c.n).c_str(),
                  c.n_direction ? fixed(c.direction / c.n_direction).c_str() : "n/a");
    out << buf;
  }
  return out.str();
}

}  // namespace dronefault
