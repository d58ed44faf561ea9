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

#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "dronefault/audio.hpp"
#include "dronefault/dataset.hpp"
#include "dronefault/errors.hpp"
#include "dronefault/labels.hpp"
#include "test_util.hpp"

using namespace dronefault;
using dronefault::testing::TempDir;
namespace fs = std::filesystem;

namespace {

// In-memory manifest with `per_cell` records per (status, direction) cell.
Manifest grid_manifest(int per_cell, std::uint64_t seed) {
  Manifest m;
  for (StatusLabel s : kAllStatus) {
    for (DirectionLabel d : kAllDirection) {
      for (int k = 0; k < per_cell; ++k) {
        ExampleRecord r;
        r.path = "audio/A/" + std::string(name(s)) + "_" + std::string(name(d)) + "_" +
                 std::to_string(k) + ".wav";
        r.drone_type = "A";
        r.status = s;
        r.direction = d;
        r.snr_db = 12.5;
        r.noise_kind = "pond";
        m.records.push_back(r);
      }
    }
  }
  return split_dataset(std::move(m), {0.6, 0.2, 0.2}, seed);
}

std::string split_lines(const Manifest& m, Split s) {
  std::string out;
  for (const auto& r : m.records) {
    if (r.split == s) out += to_jsonl(r) + "\n";
  }
  return out;
}

DatasetConfig tiny_dataset() {
  DatasetConfig c;
  c.per_cell = 1;
  c.ambience_s = 3.0;
  c.seed = 11;
  return c;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("label encodings") {
  for (StatusLabel s : kAllStatus) {
    Eigen::VectorXd v = one_hot(s);
    CHECK(v.size() == 9);
    CHECK(v.sum() == 1.0);
    CHECK(v[index(s)] == 1.0);
    CHECK(parse_status(name(s)) == s);
    CHECK(status_from_index(index(s)) == s);
  }
  for (DirectionLabel d : kAllDirection) {
    Eigen::VectorXd v = one_hot(d);
    CHECK(v.size() == 6);
    CHECK(v.sum() == 1.0);
    CHECK(v[index(d)] == 1.0);
    CHECK(parse_direction(name(d)) == d);
  }
  CHECK(parse_status("Prop-Cut 1") == StatusLabel::kPropCut1);
  CHECK(parse_status("propeller_cut_1") == StatusLabel::kPropCut1);
  CHECK(parse_status("MOTORFAULT4") == StatusLabel::kMotorFault4);
  CHECK_FALSE(parse_status("exploded").has_value());
  CHECK(parse_direction("Counter-Clockwise") == DirectionLabel::kCounterClockwise);
  CHECK_FALSE(faulty_rotor(StatusLabel::kNormal).has_value());
  CHECK(faulty_rotor(StatusLabel::kPropCut3) == 2);
  CHECK(faulty_rotor(StatusLabel::kMotorFault1) == 0);
  CHECK(is_propeller_fault(StatusLabel::kPropCut4));
  CHECK(is_motor_fault(StatusLabel::kMotorFault2));
  CHECK_THROWS(status_from_index(9));
  CHECK_THROWS(direction_from_index(-1));
}

TEST_CASE("split counts") {
  auto count = [](const std::vector<Split>& v, Split s) {
    return std::count(v.begin(), v.end(), s);
  };
  auto ten = assign_splits(10, {0.6, 0.2, 0.2}, 0);
  CHECK(count(ten, Split::kTrain) == 6);
  CHECK(count(ten, Split::kValid) == 2);
  CHECK(count(ten, Split::kTest) == 2);

  auto big = assign_splits(54000, {0.6, 0.2, 0.2}, 7);
  CHECK(big.size() == 54000);
  CHECK(count(big, Split::kTrain) == 32400);
  CHECK(count(big, Split::kValid) == 10800);
  CHECK(count(big, Split::kTest) == 10800);
  CHECK(assign_splits(54000, {0.6, 0.2, 0.2}, 7) == big);
  CHECK(assign_splits(54000, {0.6, 0.2, 0.2}, 8) != big);
  CHECK_THROWS_AS(assign_splits(10, {0.5, 0.2, 0.2}, 0), DomainError);
}

TEST_CASE("split_dataset stamps every record once") {
  Manifest m = grid_manifest(10, 3);
  CHECK(m.records.size() == 540);
  CHECK(m.count(Split::kTrain) + m.count(Split::kValid) + m.count(Split::kTest) == 540);
  CHECK(m.count(Split::kUnassigned) == 0);
  std::set<std::string> seen;
  for (const auto& r : m.records) CHECK(seen.insert(r.path).second);
  CHECK_THROWS_AS(split_dataset(Manifest{}, {0.6, 0.2, 0.2}, 0), DomainError);
}

TEST_CASE("training fractions leave valid and test untouched") {
  Manifest m = grid_manifest(100, 1);
  const std::size_t n_train = m.count(Split::kTrain);
  const std::string valid = split_lines(m, Split::kValid);
  const std::string test = split_lines(m, Split::kTest);
  std::set<std::string> previous;
  for (double f : {1.0, 0.5, 0.25, 0.1}) {
    Manifest sub = subsample_train(m, f, 99);
    CHECK(sub.count(Split::kTrain) == static_cast<std::size_t>(std::floor(f * n_train)));
    CHECK(split_lines(sub, Split::kValid) == valid);
    CHECK(split_lines(sub, Split::kTest) == test);
    // Every cell keeps a share close to its original one.
    std::map<int, int> before, after;
    for (const auto& r : m.records) {
      if (r.split == Split::kTrain) before[index(r.status) * 6 + index(r.direction)]++;
    }
    for (const auto& r : sub.records) {
      if (r.split == Split::kTrain) after[index(r.status) * 6 + index(r.direction)]++;
    }
    for (const auto& [cell, n] : before) CHECK(std::abs(after[cell] - f * n) <= 1.0);
    CHECK(split_lines(subsample_train(m, f, 99), Split::kTrain) == split_lines(sub, Split::kTrain));
  }
  CHECK_THROWS_AS(subsample_train(m, 0.0, 1), DomainError);
  CHECK_THROWS_AS(subsample_train(m, 1.5, 1), DomainError);
}

TEST_CASE("batches") {
  Manifest m;
  for (int i = 0; i < 100; ++i) {
    ExampleRecord r;
    r.path = std::to_string(i);
    r.split = Split::kTrain;
    m.records.push_back(r);
  }
  auto ordered = batch_indices(m, Split::kTrain, 16, std::nullopt);
  REQUIRE(ordered.size() == 7);
  CHECK(ordered.back().size() == 4);
  CHECK(ordered[0][0] == 0);
  CHECK(ordered[6][3] == 99);
  auto shuffled = batch_indices(m, Split::kTrain, 16, 5);
  CHECK(shuffled.size() == 7);
  std::set<std::size_t> all;
  for (const auto& b : shuffled) all.insert(b.begin(), b.end());
  CHECK(all.size() == 100);
  CHECK(shuffled != ordered);
  CHECK(batch_indices(m, Split::kTrain, 16, 5) == shuffled);
  CHECK(batch_indices(m, Split::kTrain, 16, 6) != shuffled);
  CHECK_THROWS_AS(batch_indices(m, Split::kValid, 16, std::nullopt), DomainError);
  CHECK_THROWS_AS(batch_indices(m, Split::kTrain, 0, std::nullopt), DomainError);
}

TEST_CASE("manifest persistence") {
  TempDir dir("manifest");
  Manifest m = grid_manifest(1, 2);
  m.records[3].snr_db.reset();
  m.records[3].noise_kind.clear();
  m.records[4].source = Source::kIngested;
  m.header.seed = 2;
  m.header.config_hash = "00ff";
  m.header.params = {{"per_cell", 1}};
  write_manifest(m, dir.path());
  Manifest back = read_manifest(dir.path());
  CHECK(back.records == m.records);
  CHECK(back.header.seed == 2);
  CHECK(back.header.config_hash == "00ff");
  CHECK(back.header.params == m.header.params);
  CHECK(back.root == dir.path());
  CHECK(read_manifest(dir / kManifestFile).records.size() == 54);

  const std::string line = to_jsonl(m.records[0]);
  CHECK(line.find("\"path\"") < line.find("\"drone_type\""));
  CHECK(line.find("\"drone_type\"") < line.find("\"status\""));
  CHECK(line.find("\"split\"") < line.find("\"source\""));

  CHECK(missing_files(back).size() == 54);

  testing::spit(dir / kManifestFile, testing::slurp(dir / kManifestFile) + "{\"path\": 3}\n");
  CHECK_THROWS_AS(read_manifest(dir.path()), FormatError);
  CHECK_THROWS_AS(read_manifest(dir / "nowhere"), IoError);
}

TEST_CASE("dataset config json") {
  DatasetConfig c;
  c.per_cell = 7;
  c.noise_kinds = {NoiseKind::kGate};
  c.format = SampleFormat::kPcm16;
  nlohmann::json j = c;
  CHECK(j.get<DatasetConfig>() == c);
  CHECK(config_hash(j) == config_hash(nlohmann::json(c)));
  j["per_cell"] = 8;
  CHECK(config_hash(j) != config_hash(nlohmann::json(c)));
  j["venue"] = "pond";
  CHECK_THROWS_AS(j.get<DatasetConfig>(), ConfigError);
  c.snr_low = 16.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("build_dataset writes a balanced, reproducible dataset") {
  TempDir a("build_a"), b("build_b");
  const DatasetConfig cfg = tiny_dataset();
  Manifest ma = build_dataset(cfg, a.path(), 1);
  Manifest mb = build_dataset(cfg, b.path(), 2);
  REQUIRE(ma.records.size() == 54);
  CHECK(ma.count(Split::kTrain) == 32);
  CHECK(ma.count(Split::kValid) == 11);
  CHECK(ma.count(Split::kTest) == 11);
  CHECK(missing_files(ma).empty());
  CHECK(manifest_jsonl(ma) == manifest_jsonl(mb));
  std::map<int, int> cells;
  for (const auto& r : ma.records) {
    cells[index(r.status) * 6 + index(r.direction)]++;
    REQUIRE(r.snr_db.has_value());
    CHECK(*r.snr_db >= 10.0);
    CHECK(*r.snr_db <= 15.0);
    CHECK(parse_noise_kind(r.noise_kind).has_value());
    CHECK(testing::slurp(ma.resolve(r)) == testing::slurp(mb.resolve(r)));
  }
  CHECK(cells.size() == 54);

  WaveformStore store(ma);
  for (std::size_t i = 0; i < 5; ++i) {
    const Eigen::ArrayXf& w = store.waveform(i);
    CHECK(w.size() == 8000);
    CHECK(w.abs().maxCoeff() <= 1.0f);
  }
  auto batch = assemble_batch<float>(store, {0, 1, 2});
  CHECK(batch.x.shape() == ad::Shape{3, 1, 8000});
  CHECK(batch.y_status.shape() == ad::Shape{3, 9});
  CHECK(batch.y_direction.shape() == ad::Shape{3, 6});
  for (int k = 0; k < 3; ++k) {
    CHECK(batch.y_status.data()[k * 9 + index(ma.records[k].status)] == 1.0f);
    CHECK(batch.y_direction.data()[k * 6 + index(ma.records[k].direction)] == 1.0f);
  }
  CHECK(batch.y_status.data().sum() == 3.0f);

  fs::remove(ma.resolve(ma.records[7]));
  WaveformStore broken(ma);
  try {
    broken.waveform(7);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find(ma.records[7].path) != std::string::npos);
  }
}

TEST_CASE("ingest segments and labels recordings") {
  TempDir src("ingest_src"), out("ingest_out");
  AudioClip ten{Eigen::ArrayXd(480000), 48000};
  for (Eigen::Index i = 0; i < ten.size(); ++i) ten.samples[i] = 0.5 * std::sin(0.05 * i);
  fs::create_directories(src / "flights");
  write_wav(ten, src / "flights/take1.wav", SampleFormat::kPcm16);
  testing::spit(src / "labels.csv",
                "Drone_Type,Path,Status,Direction\n"
                "B,flights/take1.wav,propeller cut 2,clockwise\n"
                "B,flights/take2.wav,normal,left\n"
                "B,flights/take1.wav,sideways,left\n"
                "B,flights/take1.wav\n");
  IngestReport rep = ingest(src.path(), src / "labels.csv", out.path());
  CHECK(rep.source_files == 1);
  REQUIRE(rep.manifest.records.size() == 20);
  CHECK(rep.missing_files.size() == 1);
  REQUIRE(rep.rejected_rows.size() == 2);
  CHECK(rep.rejected_rows[0].rfind("line 4:", 0) == 0);
  CHECK(rep.rejected_rows[1].rfind("line 5:", 0) == 0);
  for (const auto& r : rep.manifest.records) {
    CHECK(r.status == StatusLabel::kPropCut2);
    CHECK(r.direction == DirectionLabel::kClockwise);
    CHECK(r.drone_type == "B");
    CHECK(r.source == Source::kIngested);
    CHECK_FALSE(r.snr_db.has_value());
    const AudioClip seg = read_wav(rep.manifest.resolve(r));
    CHECK(seg.size() == 8000);
    CHECK(seg.sample_rate == 16000);
  }
  testing::spit(src / "nohead.csv", "path,status\nx.wav,normal\n");
  CHECK_THROWS_AS(ingest(src.path(), src / "nohead.csv", out.path()), FormatError);
}

}  // TEST_SUITE
