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

#include "dronefault/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "dronefault/errors.hpp"
#include "dronefault/seeding.hpp"

namespace dronefault {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kManifestVersion = 1;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

void check_ratios(const std::array<double, 3>& r) {
  if (r[0] <= 0.0 || r[1] <= 0.0 || r[2] <= 0.0 || std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
    throw DomainError("split ratios must be positive and sum to 1");
  }
}

int cell_of(const ExampleRecord& r) { return index(r.status) * kNumDirection + index(r.direction); }

// Runs fn(i) for i in [0, n) on up to `jobs` threads; results must not
// depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
  for (int t = 0; t < jobs; ++t) {
    workers.emplace_back([&, t] {
      try {
        for (std::size_t i = static_cast<std::size_t>(t); i < n; i += static_cast<std::size_t>(jobs)) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  out.push_back(cell);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
  }
  return out;
}

}  // namespace

std::string_view name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
    default: return "none";
  }
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "valid") return Split::kValid;
  if (text == "test") return Split::kTest;
  if (text == "none") return Split::kUnassigned;
  throw FormatError("unknown split '" + std::string(text) + "'");
}

std::string_view name(Source source) {
  return source == Source::kSynthetic ? "synthetic" : "ingested";
}

std::size_t Manifest::count(Split split) const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [&](const auto& r) { return r.split == split; }));
}

std::vector<std::size_t> Manifest::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split == split) out.push_back(i);
  }
  return out;
}

std::string to_jsonl(const ExampleRecord& r) {
  ordered_json j;
  j["path"] = r.path;
  j["drone_type"] = r.drone_type;
  j["status"] = name(r.status);
  j["direction"] = name(r.direction);
  j["snr_db"] = r.snr_db ? ordered_json(*r.snr_db) : ordered_json(nullptr);
  j["noise_kind"] = r.noise_kind.empty() ? ordered_json(nullptr) : ordered_json(r.noise_kind);
  j["split"] = name(r.split);
  j["source"] = name(r.source);
  return j.dump();
}

ExampleRecord record_from_json(const json& j) {
  ExampleRecord r;
  try {
    r.path = j.at("path").get<std::string>();
    r.drone_type = j.at("drone_type").get<std::string>();
    const auto status = parse_status(j.at("status").get<std::string>());
    const auto direction = parse_direction(j.at("direction").get<std::string>());
    if (!status || !direction) throw FormatError("unknown label in record " + r.path);
    r.status = *status;
    r.direction = *direction;
    if (!j.at("snr_db").is_null()) r.snr_db = j.at("snr_db").get<double>();
    if (!j.at("noise_kind").is_null()) r.noise_kind = j.at("noise_kind").get<std::string>();
    r.split = parse_split(j.at("split").get<std::string>());
    const auto source = j.at("source").get<std::string>();
    if (source == "synthetic") r.source = Source::kSynthetic;
    else if (source == "ingested") r.source = Source::kIngested;
    else throw FormatError("unknown source '" + source + "'");
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest record: ") + e.what());
  }
  return r;
}

std::string manifest_jsonl(const Manifest& m) {
  std::string out;
  for (const auto& r : m.records) {
    out += to_jsonl(r);
    out += '\n';
  }
  return out;
}

std::string sidecar_json(const Manifest& m) {
  ordered_json j;
  j["format_version"] = kManifestVersion;
  j["seed"] = m.header.seed;
  j["ratios"] = m.header.ratios;
  j["config_hash"] = m.header.config_hash;
  j["records"] = m.records.size();
  j["params"] = m.header.params;
  return j.dump(2) + "\n";
}

void write_manifest(const Manifest& m, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / kManifestFile, manifest_jsonl(m));
  write_text(dir / kManifestSidecar, sidecar_json(m));
}

Manifest read_manifest(const fs::path& path) {
  const fs::path file = fs::is_directory(path) ? path / kManifestFile : path;
  Manifest m;
  m.root = file.parent_path();
  std::istringstream lines(read_text(file));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      m.records.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw FormatError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  const fs::path sidecar = m.root / kManifestSidecar;
  if (fs::exists(sidecar)) {
    try {
      const json j = json::parse(read_text(sidecar));
      m.header.seed = j.value("seed", std::uint64_t{0});
      if (j.contains("ratios")) m.header.ratios = j.at("ratios").get<std::array<double, 3>>();
      m.header.config_hash = j.value("config_hash", std::string{});
      if (j.contains("params")) m.header.params = j.at("params");
    } catch (const json::exception& e) {
      throw FormatError(sidecar.string() + ": " + e.what());
    }
  }
  return m;
}

std::vector<std::string> missing_files(const Manifest& m) {
  std::vector<std::string> out;
  for (const auto& r : m.records) {
    if (!fs::exists(m.resolve(r))) out.push_back(r.path);
  }
  return out;
}

void to_json(json& j, const DatasetConfig& c) {
  std::vector<std::string> kinds;
  for (auto k : c.noise_kinds) kinds.emplace_back(name(k));
  j = json{{"profiles", c.profiles},
           {"per_cell", c.per_cell},
           {"noise_kinds", kinds},
           {"snr_db", {c.snr_low, c.snr_high}},
           {"sample_rate", c.sample_rate},
           {"segment_s", c.segment_s},
           {"ambience_s", c.ambience_s},
           {"mixer_offset", c.mixer_offset},
           {"seed", c.seed},
           {"ratios", c.ratios},
           {"venue_disjoint", c.venue_disjoint},
           {"format", c.format == SampleFormat::kPcm16 ? "pcm16" : "float32"}};
}

void from_json(const json& j, DatasetConfig& c) {
  static const std::vector<std::string> kKeys = {
      "profiles", "per_cell", "noise_kinds", "snr_db", "sample_rate", "segment_s",
      "ambience_s", "mixer_offset", "seed", "ratios", "venue_disjoint", "format"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw ConfigError("dataset: unknown key '" + key + "'");
    }
  }
  if (j.contains("profiles")) c.profiles = j.at("profiles").get<std::vector<std::string>>();
  if (j.contains("per_cell")) c.per_cell = j.at("per_cell").get<int>();
  if (j.contains("noise_kinds")) {
    c.noise_kinds.clear();
    for (const auto& k : j.at("noise_kinds")) {
      const auto kind = parse_noise_kind(k.get<std::string>());
      if (!kind) throw ConfigError("dataset: unknown noise kind '" + k.get<std::string>() + "'");
      c.noise_kinds.push_back(*kind);
    }
  }
  if (j.contains("snr_db")) {
    const auto r = j.at("snr_db").get<std::array<double, 2>>();
    c.snr_low = r[0];
    c.snr_high = r[1];
  }
  if (j.contains("sample_rate")) c.sample_rate = j.at("sample_rate").get<int>();
  if (j.contains("segment_s")) c.segment_s = j.at("segment_s").get<double>();
  if (j.contains("ambience_s")) c.ambience_s = j.at("ambience_s").get<double>();
  if (j.contains("mixer_offset")) c.mixer_offset = j.at("mixer_offset").get<double>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("ratios")) c.ratios = j.at("ratios").get<std::array<double, 3>>();
  if (j.contains("venue_disjoint")) c.venue_disjoint = j.at("venue_disjoint").get<bool>();
  if (j.contains("format")) {
    const auto f = j.at("format").get<std::string>();
    if (f == "pcm16") c.format = SampleFormat::kPcm16;
    else if (f == "float32") c.format = SampleFormat::kFloat32;
    else throw ConfigError("dataset: format must be pcm16 or float32");
  }
}

void validate(const DatasetConfig& c) {
  auto fail = [](const std::string& what) { throw ConfigError("dataset: " + what); };
  if (c.profiles.empty()) fail("profiles must not be empty");
  for (const auto& p : c.profiles) {
    try {
      validate(drone_profile(p), c.sample_rate / 2.0);
    } catch (const DomainError& e) {
      fail(e.what());
    }
  }
  if (c.per_cell < 1) fail("per_cell must be positive");
  if (c.noise_kinds.empty()) fail("noise_kinds must not be empty");
  if (!(c.snr_low <= c.snr_high)) fail("snr_db must be [low, high] with low <= high");
  if (c.sample_rate <= 0) fail("sample_rate must be positive");
  if (!(c.segment_s > 0.0)) fail("segment_s must be positive");
  if (!(c.ambience_s >= c.segment_s)) fail("ambience_s must be at least segment_s");
  if (!(c.mixer_offset > 0.0 && c.mixer_offset < 0.2)) fail("mixer_offset must lie in (0, 0.2)");
  try {
    check_ratios(c.ratios);
  } catch (const DomainError& e) {
    fail(e.what());
  }
}

std::string config_hash(const json& j) { return hex64(fnv1a(j.dump())); }

std::vector<Split> assign_splits(std::size_t n, const std::array<double, 3>& ratios,
                                 std::uint64_t seed) {
  check_ratios(ratios);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, 0x5B11));
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_valid = static_cast<std::size_t>(std::llround(ratios[1] * static_cast<double>(n)));
  const auto n_test = static_cast<std::size_t>(std::llround(ratios[2] * static_cast<double>(n)));
  const std::size_t n_train = n - std::min(n, n_valid + n_test);
  std::vector<Split> out(n, Split::kTrain);
  for (std::size_t k = n_train; k < n; ++k) {
    out[order[k]] = k < n_train + n_valid ? Split::kValid : Split::kTest;
  }
  return out;
}

Manifest split_dataset(Manifest manifest, const std::array<double, 3>& ratios, std::uint64_t seed) {
  if (manifest.records.empty()) throw DomainError("cannot split an empty manifest");
  const auto splits = assign_splits(manifest.records.size(), ratios, seed);
  for (std::size_t i = 0; i < splits.size(); ++i) manifest.records[i].split = splits[i];
  manifest.header.ratios = ratios;
  return manifest;
}

Manifest subsample_train(const Manifest& manifest, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw DomainError("fraction must lie in (0, 1]");
  const auto train = manifest.indices(Split::kTrain);
  const auto target = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(train.size())));
  if (target == 0) throw DomainError("fraction leaves no training records");
  if (target == train.size()) return manifest;

  std::map<int, std::vector<std::size_t>> cells;
  for (std::size_t i : train) cells[cell_of(manifest.records[i])].push_back(i);

  Rng rng(derive_seed(seed, 0xF7AC));
  struct Quota {
    int cell;
    std::size_t take;
    double remainder;
    std::uint64_t tie;
  };
  std::vector<Quota> quotas;
  std::size_t assigned = 0;
  for (const auto& [cell, members] : cells) {
    const double exact = fraction * static_cast<double>(members.size());
    const auto take = static_cast<std::size_t>(std::floor(exact));
    quotas.push_back({cell, take, exact - static_cast<double>(take), rng()});
    assigned += take;
  }
  // Hand the leftover records to the cells with the largest remainders.
  std::vector<std::size_t> order(quotas.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (quotas[a].remainder != quotas[b].remainder) return quotas[a].remainder > quotas[b].remainder;
    return quotas[a].tie < quotas[b].tie;
  });
  for (std::size_t k = 0; assigned < target && k < order.size(); ++k) {
    auto& q = quotas[order[k]];
    if (q.take < cells[q.cell].size()) {
      ++q.take;
      ++assigned;
    }
  }

  std::vector<bool> keep(manifest.records.size(), true);
  for (std::size_t i : train) keep[i] = false;
  for (const auto& q : quotas) {
    auto members = cells[q.cell];
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t k = 0; k < q.take; ++k) keep[members[k]] = true;
  }

  Manifest out;
  out.root = manifest.root;
  out.header = manifest.header;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    if (keep[i]) out.records.push_back(manifest.records[i]);
  }
  return out;
}

Manifest build_dataset(const DatasetConfig& config, const fs::path& out_dir, int jobs) {
  validate(config);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  const MixerMatrix mixer = MixerMatrix::standard(config.mixer_offset);
  const int rate = config.sample_rate;

  // One long ambience recording per venue, cropped per example.
  std::vector<AudioClip> ambience;
  for (NoiseKind kind : config.noise_kinds) {
    Rng rng(derive_seed(config.seed, 1'000'000'000ULL + static_cast<std::uint64_t>(kind)));
    ambience.push_back(synth_background(kind, config.ambience_s, rate, rng));
  }

  const std::size_t per_profile = static_cast<std::size_t>(config.per_cell) * kNumStatus * kNumDirection;
  const std::size_t total = per_profile * config.profiles.size();
  const std::vector<Split> splits = assign_splits(total, config.ratios, config.seed);

  // Region of each venue recording reserved for a split (whole recording otherwise).
  auto region = [&](const AudioClip& clip, Split split) {
    if (!config.venue_disjoint) return clip;
    const double n = static_cast<double>(clip.size());
    const auto a = static_cast<Eigen::Index>(std::floor(config.ratios[0] * n));
    const auto b = static_cast<Eigen::Index>(std::floor((config.ratios[0] + config.ratios[1]) * n));
    const Eigen::Index lo = split == Split::kTrain ? 0 : split == Split::kValid ? a : b;
    const Eigen::Index hi = split == Split::kTrain ? a : split == Split::kValid ? b : clip.size();
    return AudioClip{clip.samples.segment(lo, hi - lo), clip.sample_rate};
  };

  for (const auto& p : config.profiles) fs::create_directories(out_dir / "audio" / p);

  std::vector<ExampleRecord> records(total);
  parallel_for(total, jobs, [&](std::size_t i) {
    const std::size_t profile_idx = i / per_profile;
    const std::size_t within = i % per_profile;
    const int cell = static_cast<int>(within / static_cast<std::size_t>(config.per_cell));
    const int rep = static_cast<int>(within % static_cast<std::size_t>(config.per_cell));
    const StatusLabel status = status_from_index(cell / kNumDirection);
    const DirectionLabel direction = direction_from_index(cell % kNumDirection);
    const DroneProfile profile = drone_profile(config.profiles[profile_idx]);

    Rng rng(derive_seed(config.seed, i));
    const AudioClip drone = synth_drone_sound(status, direction, profile, config.segment_s, rate, rng, mixer);
    std::uniform_int_distribution<std::size_t> pick_kind(0, config.noise_kinds.size() - 1);
    const std::size_t kind_idx = pick_kind(rng);
    std::uniform_real_distribution<double> pick_snr(config.snr_low, config.snr_high);
    const double snr = pick_snr(rng);
    const Split split = splits[i];
    AudioClip mix = mix_at_snr(drone, region(ambience[kind_idx], split), snr, rng);
    // Scaling both components together keeps the SNR and avoids clipping.
    const double peak = mix.samples.abs().maxCoeff();
    if (peak > 0.999) mix.samples *= 0.999 / peak;

    char file[96];
    std::snprintf(file, sizeof file, "audio/%s/%s_%s_%04d.wav", profile.name.c_str(),
                  std::string(name(status)).c_str(), std::string(name(direction)).c_str(), rep);
    write_wav(mix, out_dir / file, config.format);

    ExampleRecord& r = records[i];
    r.path = file;
    r.drone_type = profile.name;
    r.status = status;
    r.direction = direction;
    r.snr_db = snr;
    r.noise_kind = std::string(name(config.noise_kinds[kind_idx]));
    r.split = split;
    r.source = Source::kSynthetic;
  });

  Manifest m;
  m.root = out_dir;
  m.records = std::move(records);
  json params;
  to_json(params, config);
  m.header.seed = config.seed;
  m.header.ratios = config.ratios;
  m.header.config_hash = config_hash(params);
  m.header.params = params;
  return m;
}

std::shared_ptr<const Eigen::ArrayXf> SampleCache::find(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : it->second;
}

std::shared_ptr<const Eigen::ArrayXf> SampleCache::insert(const std::string& key,
                                                         Eigen::ArrayXf samples) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto& slot = entries_[key];
  if (!slot) slot = std::make_shared<const Eigen::ArrayXf>(std::move(samples));
  return slot;
}

WaveformStore::WaveformStore(Manifest manifest, Eigen::Index length,
                             std::shared_ptr<SampleCache> cache)
    : manifest_(std::move(manifest)),
      length_(length),
      shared_(cache ? std::move(cache) : std::make_shared<SampleCache>()),
      cache_(manifest_.records.size()) {}

const Eigen::ArrayXf& WaveformStore::waveform(std::size_t i) {
  if (i >= cache_.size()) throw DomainError("record index out of range");
  if (cache_[i]) return *cache_[i];
  const auto& r = manifest_.records[i];
  const std::string key = manifest_.resolve(r).string();
  if (auto hit = shared_->find(key)) {
    cache_[i] = std::move(hit);
    return *cache_[i];
  }
  AudioClip clip;
  try {
    clip = read_wav(manifest_.resolve(r));
  } catch (const std::exception& e) {
    throw IoError("record " + std::to_string(i) + " (" + r.path + "): " + e.what());
  }
  if (clip.size() != length_) {
    throw IoError("record " + std::to_string(i) + " (" + r.path + "): expected " +
                  std::to_string(length_) + " samples, found " + std::to_string(clip.size()));
  }
  cache_[i] = shared_->insert(key, clip.samples.cast<float>());
  return *cache_[i];
}

Example WaveformStore::example(std::size_t i) {
  return Example{waveform(i), manifest_.records.at(i)};
}

std::vector<std::vector<std::size_t>> batch_indices(const Manifest& manifest, Split split,
                                                    std::size_t batch_size,
                                                    std::optional<std::uint64_t> epoch_seed) {
  if (batch_size == 0) throw DomainError("batch size must be positive");
  auto members = manifest.indices(split);
  if (members.empty()) throw DomainError(std::string("split '") + std::string(name(split)) + "' is empty");
  if (epoch_seed) {
    Rng rng(*epoch_seed);
    std::shuffle(members.begin(), members.end(), rng);
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < members.size(); start += batch_size) {
    const std::size_t end = std::min(members.size(), start + batch_size);
    out.emplace_back(members.begin() + static_cast<std::ptrdiff_t>(start),
                     members.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

template <typename Scalar>
Batch<Scalar> assemble_batch(WaveformStore& store, const std::vector<std::size_t>& records) {
  const auto b = static_cast<Eigen::Index>(records.size());
  Batch<Scalar> batch;
  batch.records = records;
  const auto& first = store.waveform(records.at(0));
  const Eigen::Index t = first.size();
  batch.x = ad::Tensor<Scalar>(ad::Shape{b, 1, t});
  batch.y_status = ad::Tensor<Scalar>(ad::Shape{b, kNumStatus});
  batch.y_direction = ad::Tensor<Scalar>(ad::Shape{b, kNumDirection});
  for (Eigen::Index i = 0; i < b; ++i) {
    const std::size_t rec = records[static_cast<std::size_t>(i)];
    batch.x.data().segment(i * t, t) = store.waveform(rec).template cast<Scalar>();
    const auto& r = store.manifest().records[rec];
    batch.y_status.data()[i * kNumStatus + index(r.status)] = 1;
    batch.y_direction.data()[i * kNumDirection + index(r.direction)] = 1;
  }
  return batch;
}

template Batch<float> assemble_batch<float>(WaveformStore&, const std::vector<std::size_t>&);
template Batch<double> assemble_batch<double>(WaveformStore&, const std::vector<std::size_t>&);

IngestReport ingest(const fs::path& wav_dir, const fs::path& labels_csv, const fs::path& out_dir,
                    const IngestOptions& options) {
  std::istringstream lines(read_text(labels_csv));
  std::string line;
  if (!std::getline(lines, line)) throw FormatError(labels_csv.string() + ": empty CSV");
  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string key;
    for (char c : header[i]) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    column[key] = i;
  }
  for (const char* need : {"path", "status", "direction", "drone_type"}) {
    if (!column.count(need)) {
      throw FormatError(labels_csv.string() + ": missing column '" + need + "'");
    }
  }

  IngestReport report;
  report.manifest.root = out_dir;
  fs::create_directories(out_dir / "audio");
  std::size_t line_no = 1;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (cells.size() != header.size()) {
      report.rejected_rows.push_back(where + "expected " + std::to_string(header.size()) +
                                     " fields, found " + std::to_string(cells.size()));
      continue;
    }
    const auto status = parse_status(cells[column["status"]]);
    const auto direction = parse_direction(cells[column["direction"]]);
    if (!status) {
      report.rejected_rows.push_back(where + "unknown status '" + cells[column["status"]] + "'");
      continue;
    }
    if (!direction) {
      report.rejected_rows.push_back(where + "unknown direction '" + cells[column["direction"]] + "'");
      continue;
    }
    const fs::path source = wav_dir / cells[column["path"]];
    if (!fs::exists(source)) {
      report.missing_files.push_back(source.string());
      continue;
    }
    AudioClip clip;
    try {
      clip = resample(read_wav(source, options.channel), options.target_rate);
    } catch (const std::exception& e) {
      report.rejected_rows.push_back(where + e.what());
      continue;
    }
    ++report.source_files;
    const auto segments = segment(clip, options.segment_s);
    const std::string stem = fs::path(cells[column["path"]]).replace_extension().string();
    for (std::size_t k = 0; k < segments.size(); ++k) {
      std::string flat = stem;
      std::replace(flat.begin(), flat.end(), '/', '_');
      char suffix[16];
      std::snprintf(suffix, sizeof suffix, "_%04zu.wav", k);
      const std::string rel = "audio/" + flat + suffix;
      write_wav(segments[k], out_dir / rel, options.format);
      ExampleRecord r;
      r.path = rel;
      r.drone_type = cells[column["drone_type"]];
      r.status = *status;
      r.direction = *direction;
      r.source = Source::kIngested;
      report.manifest.records.push_back(std::move(r));
    }
  }
  json params = {{"wav_dir", wav_dir.string()},
                 {"labels_csv", labels_csv.string()},
                 {"target_rate", options.target_rate},
                 {"segment_s", options.segment_s}};
  report.manifest.header.params = params;
  report.manifest.header.config_hash = config_hash(params);
  return report;
}

}  // namespace dronefault
