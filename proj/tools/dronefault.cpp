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

// Command-line entry point: synth, ingest, train, eval, compare, verify.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include "dronefault/checkpoint.hpp"
#include "dronefault/config.hpp"
#include "dronefault/dataset.hpp"
#include "dronefault/errors.hpp"
#include "dronefault/experiment.hpp"
#include "dronefault/train.hpp"
#include "dronefault/verify.hpp"

namespace fs = std::filesystem;
using namespace dronefault;

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kConfigFailed = 2, kDataFailed = 3, kTrainFailed = 4 };

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 0;
  bool paper_scale = false;
};

RunConfig resolve_config(const Globals& g) {
  RunConfig c = g.config.empty() ? RunConfig{} : load_run_config(g.config);
  if (g.seed) {
    c.dataset.seed = *g.seed;
    c.seeds = {*g.seed};
  }
  if (g.paper_scale) c.dataset.per_cell = kPaperScalePerCell;
  validate(c);
  return c;
}

int jobs_of(const Globals& g) {
  if (g.jobs > 0) return g.jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

fs::path out_or(const Globals& g, const char* fallback) { return g.out.empty() ? fs::path(fallback) : fs::path(g.out); }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

void print_summary(const Manifest& m, double segment_s) {
  std::map<std::string, int> status, direction, split;
  for (const auto& r : m.records) {
    ++status[std::string(name(r.status))];
    ++direction[std::string(name(r.direction))];
    ++split[std::string(name(r.split))];
  }
  std::printf("%zu examples, %.1f s of audio\n", m.records.size(), m.records.size() * segment_s);
  for (const auto* table : {&split, &status, &direction}) {
    for (const auto& [k, v] : *table) std::cout << "  " << k << ": " << v << "\n";
  }
  std::cout << "config hash " << m.header.config_hash << std::endl;
}

int cmd_synth(const Globals& g) {
  const RunConfig c = resolve_config(g);
  const fs::path out = out_or(g, "data/synth");
  nlohmann::json params;
  to_json(params, c.dataset);
  const std::string hash = config_hash(params);
  if (fs::exists(out / kManifestFile)) {
    const Manifest existing = read_manifest(out);
    if (existing.header.config_hash == hash && missing_files(existing).empty()) {
      std::cout << "manifest in " << out.string() << " is up to date (config hash " << hash << ")" << std::endl;
      return kOk;
    }
  }
  const Manifest m = build_dataset(c.dataset, out, jobs_of(g));
  write_manifest(m, out);
  print_summary(m, c.dataset.segment_s);
  return kOk;
}

int cmd_ingest(const Globals& g, const std::string& wav_dir, const std::string& labels, std::optional<int> channel) {
  const RunConfig c = resolve_config(g);
  const fs::path out = out_or(g, "data/ingested");
  IngestOptions options;
  options.target_rate = c.dataset.sample_rate;
  options.segment_s = c.dataset.segment_s;
  options.channel = channel;
  IngestReport report = ingest(wav_dir, labels, out, options);
  for (const auto& row : report.rejected_rows) std::cerr << "rejected " << row << "\n";
  for (const auto& file : report.missing_files) std::cerr << "missing " << file << "\n";
  if (report.manifest.records.empty()) {
    std::cerr << "no usable rows in " << labels << std::endl;
    return kDataFailed;
  }
  Manifest m = split_dataset(std::move(report.manifest), c.dataset.ratios, c.dataset.seed);
  m.header.seed = c.dataset.seed;
  write_manifest(m, out);
  std::cout << report.source_files << " files ingested\n";
  print_summary(m, c.dataset.segment_s);
  return kOk;
}

int cmd_train(const Globals& g, const std::string& manifest_dir, const std::string& mode, double fraction,
              std::string profile) {
  const RunConfig c = resolve_config(g);
  const Manifest m = read_manifest(manifest_dir);
  if (profile.empty()) profile = c.dataset.profiles.front();
  const RunSpec spec{parse_task_mode(mode), profile, fraction, c.seeds.front()};
  const fs::path out = out_or(g, "runs");
  const RunOutcome o = run_single(c, m, spec, out, nullptr, &std::cout);
  std::printf("%s: best val F1 status %.4f (%s), test F1 status %.4f", spec.label().c_str(), o.best_val_f1,
              o.best_source.c_str(), o.test_f1_status);
  if (o.test_f1_direction) std::printf(", direction %.4f", *o.test_f1_direction);
  std::printf("\nrun hash %s, outputs in %s\n", o.run_hash.c_str(), (out / spec.label()).string().c_str());
  return kOk;
}

int cmd_eval(const Globals& g, const std::string& checkpoint_path, const std::string& manifest_dir,
             const std::string& split_name, bool json) {
  const RunConfig c = resolve_config(g);
  const Checkpoint ck = load_checkpoint(checkpoint_path);
  Model<float> model = model_from_checkpoint<float>(ck);
  WaveformStore store(read_manifest(manifest_dir), ck.model.input_length);
  const MetricsReport report =
      evaluate(model, store, parse_split(split_name), c.training.eval_batch_size, fs::path(checkpoint_path).filename().string());
  if (json) {
    std::cout << to_json(report).dump(2) << std::endl;
  } else {
    std::cout << format_report(report);
    if (ck.metadata.contains("val_f1_status")) {
      std::printf("stored best val F1 status %.6f (%s)\n", ck.metadata["val_f1_status"].get<double>(),
                  ck.metadata.value("source", std::string("?")).c_str());
    }
  }
  if (!g.out.empty()) write_text(g.out, to_json(report).dump(2) + "\n");
  return kOk;
}

int cmd_compare(const Globals& g, const std::string& manifest_dir) {
  const RunConfig c = resolve_config(g);
  const Manifest m = read_manifest(manifest_dir);
  const fs::path out = out_or(g, "experiment");
  const ExperimentReport report = run_experiment(c, m, out, jobs_of(g), &std::cout);
  std::cout << summary_table(report);
  return kOk;
}

int cmd_verify(const Globals& g, bool inject_fault, int cases) {
  VerifyOptions options;
  options.seed = g.seed.value_or(0);
  options.inject_fault = inject_fault;
  options.cases_per_op = cases;
  const auto results = run_verify(options);
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%-16s %s  %s = %.3e (threshold %.1e, %zu cases)\n", r.name.c_str(), r.passed ? "PASS" : "FAIL",
                r.metric.c_str(), r.worst, r.threshold, r.cases);
    for (const auto& d : r.details) std::printf("    %s\n", d.c_str());
    ok = ok && r.passed;
  }
  const std::string json = to_json(results).dump(2) + "\n";
  if (g.out.empty()) {
    std::cout << json;
  } else {
    write_text(g.out, json);
  }
  return ok ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drone fault classification from rotor sound"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "Run configuration (JSON, e.g. paper.defaults)");
  app.add_option("--seed", g.seed, "Override dataset and training seed");
  app.add_option("--out", g.out, "Output directory or file");
  app.add_option("--jobs", g.jobs, "Worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
  app.add_flag("--paper-scale", g.paper_scale, "54000 examples per drone profile");

  auto* synth = app.add_subcommand("synth", "Synthesize a labelled noisy dataset");

  auto* ingest_cmd = app.add_subcommand("ingest", "Resample and segment real recordings");
  std::string wav_dir, labels_csv;
  std::optional<int> channel;
  ingest_cmd->add_option("wav_dir", wav_dir, "Directory the CSV paths are relative to")->required();
  ingest_cmd->add_option("labels_csv", labels_csv, "CSV with path,status,direction,drone_type")->required();
  ingest_cmd->add_option("--channel", channel, "Use one channel instead of the mono mix");

  auto* train_cmd = app.add_subcommand("train", "Train one (mode, fraction, seed) job");
  std::string manifest_dir, mode = "mtl", profile;
  double fraction = 1.0;
  train_cmd->add_option("--manifest", manifest_dir, "Dataset directory")->required();
  train_cmd->add_option("--mode", mode, "mtl or stl");
  train_cmd->add_option("--fraction", fraction, "Fraction of the training split")->check(CLI::Range(0.0, 1.0));
  train_cmd->add_option("--profile", profile, "Drone type (default: first configured)");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on one split");
  std::string checkpoint, split = "test";
  bool json = false;
  eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--manifest", manifest_dir, "Dataset directory")->required();
  eval_cmd->add_option("--split", split, "train, valid or test");
  eval_cmd->add_flag("--json", json, "Print JSON instead of a table");

  auto* compare_cmd = app.add_subcommand("compare", "Run the MTL-vs-STL grid");
  compare_cmd->add_option("--manifest", manifest_dir, "Dataset directory")->required();

  auto* verify_cmd = app.add_subcommand("verify", "Run the property suites");
  bool inject_fault = false;
  int cases = 100;
  verify_cmd->add_flag("--inject-fault", inject_fault, "Corrupt one backward pass (checker sanity)");
  verify_cmd->add_option("--cases", cases, "Random cases per primitive")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigFailed;
  }

  try {
    if (*synth) return cmd_synth(g);
    if (*ingest_cmd) return cmd_ingest(g, wav_dir, labels_csv, channel);
    if (*train_cmd) return cmd_train(g, manifest_dir, mode, fraction, profile);
    if (*eval_cmd) return cmd_eval(g, checkpoint, manifest_dir, split, json);
    if (*compare_cmd) return cmd_compare(g, manifest_dir);
    if (*verify_cmd) return cmd_verify(g, inject_fault, cases);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kConfigFailed;
  } catch (const TrainingError& e) {
    std::cerr << "training failed: " << e.what() << std::endl;
    return kTrainFailed;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << std::endl;
    return kDataFailed;
  }
  return kOk;
}
