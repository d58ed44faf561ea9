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

#include <array>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dronefault/audio.hpp"
#include "dronefault/labels.hpp"
#include "dronefault/synth.hpp"
#include "dronefault/tensor.hpp"

namespace dronefault {

enum class Split { kUnassigned = 0, kTrain, kValid, kTest };
enum class Source { kSynthetic, kIngested };

std::string_view name(Split split);
Split parse_split(std::string_view text);
std::string_view name(Source source);

/// One manifest line. `path` is relative to the manifest directory.
struct ExampleRecord {
  std::string path;
  std::string drone_type;
  StatusLabel status = StatusLabel::kNormal;
  DirectionLabel direction = DirectionLabel::kForward;
  std::optional<double> snr_db;  // absent when no noise was mixed in here
  std::string noise_kind;        // empty when no noise was mixed in here
  Split split = Split::kUnassigned;
  Source source = Source::kSynthetic;

  bool operator==(const ExampleRecord&) const = default;
};

/// A record together with its 0.5 s waveform.
struct Example {
  Eigen::ArrayXf waveform;
  ExampleRecord record;
};

struct ManifestHeader {
  std::uint64_t seed = 0;
  std::array<double, 3> ratios{0.6, 0.2, 0.2};
  std::string config_hash;
  nlohmann::json params = nlohmann::json::object();
};

struct Manifest {
  std::filesystem::path root;  // directory the record paths are relative to
  ManifestHeader header;
  std::vector<ExampleRecord> records;

  std::size_t count(Split split) const;
  std::vector<std::size_t> indices(Split split) const;
  std::filesystem::path resolve(const ExampleRecord& r) const { return root / r.path; }
};

inline constexpr const char* kManifestFile = "manifest.jsonl";
inline constexpr const char* kManifestSidecar = "manifest.meta.json";

/// One JSON object per line, fields in a fixed order.
std::string to_jsonl(const ExampleRecord& record);
ExampleRecord record_from_json(const nlohmann::json& j);
std::string manifest_jsonl(const Manifest& manifest);
std::string sidecar_json(const Manifest& manifest);

/// Writes manifest.jsonl and manifest.meta.json into `dir`.
void write_manifest(const Manifest& manifest, const std::filesystem::path& dir);
/// Reads `path` (a manifest.jsonl or the directory holding one) and its sidecar.
Manifest read_manifest(const std::filesystem::path& path);
/// Paths listed in the manifest that are not on disk.
std::vector<std::string> missing_files(const Manifest& manifest);

/// Synthetic dataset recipe.
struct DatasetConfig {
  std::vector<std::string> profiles{"A"};
  int per_cell = 100;  // examples per (status, direction) cell and profile
  std::vector<NoiseKind> noise_kinds{kAllNoiseKinds.begin(), kAllNoiseKinds.end()};
  double snr_low = 10.0;
  double snr_high = 15.0;
  int sample_rate = 16000;
  double segment_s = 0.5;
  double ambience_s = 30.0;  // length of each synthesized venue recording
  double mixer_offset = 0.05;
  std::uint64_t seed = 0;
  std::array<double, 3> ratios{0.6, 0.2, 0.2};
  /// Crop train/valid/test noise from disjoint stretches of each venue recording.
  bool venue_disjoint = false;
  SampleFormat format = SampleFormat::kFloat32;

  bool operator==(const DatasetConfig&) const = default;
};

void to_json(nlohmann::json& j, const DatasetConfig& c);
void from_json(const nlohmann::json& j, DatasetConfig& c);
void validate(const DatasetConfig& c);
std::string config_hash(const nlohmann::json& j);

/// Split assignment for n items: uniform shuffle, then counts
/// round(r_valid n), round(r_test n) with the remainder to train.
std::vector<Split> assign_splits(std::size_t n, const std::array<double, 3>& ratios,
                                 std::uint64_t seed);

/// Synthesizes every example (drone segment + venue noise at SNR ~ U[lo, hi])
/// into `out_dir` and returns the manifest (not yet written). Splits come
/// from assign_splits with the config's ratios and seed.
Manifest build_dataset(const DatasetConfig& config, const std::filesystem::path& out_dir,
                       int jobs = 1);

/// Stamps train/valid/test on every record; deterministic in `seed`.
Manifest split_dataset(Manifest manifest, const std::array<double, 3>& ratios, std::uint64_t seed);

/// Keeps floor(fraction * n_train) train records, stratified by
/// (status, direction) cell; valid and test records are untouched.
Manifest subsample_train(const Manifest& manifest, double fraction, std::uint64_t seed);

/// Lazily loads and caches waveforms of a fixed length. Thread-safe.
/// Decoded waveforms shared between stores, keyed by file path.
class SampleCache {
 public:
  std::shared_ptr<const Eigen::ArrayXf> find(const std::string& key) const;
  std::shared_ptr<const Eigen::ArrayXf> insert(const std::string& key, Eigen::ArrayXf samples);

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const Eigen::ArrayXf>> entries_;
};

class WaveformStore {
 public:
  explicit WaveformStore(Manifest manifest, Eigen::Index length = 8000,
                         std::shared_ptr<SampleCache> cache = nullptr);

  const Manifest& manifest() const { return manifest_; }
  Eigen::Index length() const { return length_; }
  /// Throws IoError naming the record when the file is missing or malformed.
  const Eigen::ArrayXf& waveform(std::size_t record);
  Example example(std::size_t record);

 private:
  Manifest manifest_;
  Eigen::Index length_;
  std::shared_ptr<SampleCache> shared_;
  std::vector<std::shared_ptr<const Eigen::ArrayXf>> cache_;
};

template <typename Scalar>
struct Batch {
  ad::Tensor<Scalar> x;            // (B, 1, T)
  ad::Tensor<Scalar> y_status;     // (B, 9) one-hot
  ad::Tensor<Scalar> y_direction;  // (B, 6) one-hot
  std::vector<std::size_t> records;
};

/// Record indices of `split` cut into batches. With an epoch seed the order
/// is reshuffled; without one it follows the manifest. The last batch may be short.
std::vector<std::vector<std::size_t>> batch_indices(const Manifest& manifest, Split split,
                                                    std::size_t batch_size,
                                                    std::optional<std::uint64_t> epoch_seed);

template <typename Scalar>
Batch<Scalar> assemble_batch(WaveformStore& store, const std::vector<std::size_t>& records);

/// Iterates the batches of one epoch in order.
template <typename Scalar>
class BatchStream {
 public:
  BatchStream(WaveformStore& store, Split split, std::size_t batch_size,
              std::optional<std::uint64_t> epoch_seed)
      : store_(store),
        batches_(batch_indices(store.manifest(), split, batch_size, epoch_seed)) {}

  std::size_t size() const { return batches_.size(); }
  bool next(Batch<Scalar>& out) {
    if (cursor_ >= batches_.size()) return false;
    out = assemble_batch<Scalar>(store_, batches_[cursor_++]);
    return true;
  }

 private:
  WaveformStore& store_;
  std::vector<std::vector<std::size_t>> batches_;
  std::size_t cursor_ = 0;
};

/// Options and outcome of importing labelled recordings.
struct IngestOptions {
  int target_rate = 16000;
  double segment_s = 0.5;
  std::optional<int> channel;
  SampleFormat format = SampleFormat::kFloat32;
};

struct IngestReport {
  Manifest manifest;
  std::vector<std::string> rejected_rows;  // "line N: reason"
  std::vector<std::string> missing_files;
  std::size_t source_files = 0;
};

/// Reads a CSV with columns path,status,direction,drone_type (any order,
/// header required), resamples and segments each listed file into `out_dir`.
IngestReport ingest(const std::filesystem::path& wav_dir, const std::filesystem::path& labels_csv,
                    const std::filesystem::path& out_dir, const IngestOptions& options = {});

}  // namespace dronefault
