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

#include "dronefault/config.hpp"
#include "dronefault/errors.hpp"
#include "test_util.hpp"

using namespace dronefault;

namespace {

std::string message_of(const std::string& text) {
  try {
    parse_run_config(text, "cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "no error";
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("paper defaults file matches the built-in defaults") {
  const auto c = load_run_config(std::string(DRONEFAULT_SOURCE_DIR) + "/paper.defaults");
  CHECK(c == RunConfig{});
  CHECK(config_hash(c) == config_hash(RunConfig{}));
  CHECK(c.training.epochs == 100);
  CHECK(c.training.batch_size == 16);
  CHECK(c.training.lr == 5e-4);
  CHECK(c.model.n_filters == 64);
  CHECK(c.dataset.ratios == std::array<double, 3>{0.6, 0.2, 0.2});
}

TEST_CASE("partial configs keep defaults") {
  const auto c = parse_run_config(R"({"dataset": {"per_cell": 7}, "training": {"seeds": [4]}})");
  CHECK(c.dataset.per_cell == 7);
  CHECK(c.seeds == std::vector<std::uint64_t>{4});
  CHECK(c.model == ModelConfig{});
  CHECK(parse_run_config("{}") == RunConfig{});
}

TEST_CASE("round trip through json") {
  RunConfig c;
  c.dataset.per_cell = 3;
  c.training.epochs = 12;
  c.training.swa_start = 10;
  c.experiment.fractions = {1.0, 0.25};
  c.experiment.modes = {TaskMode::kSingleTask};
  CHECK(parse_run_config(to_json(c).dump()) == c);
  CHECK(config_hash(c) != config_hash(RunConfig{}));
  CHECK(config_hash(c).size() == 16);
  CHECK(config_hash(c) == config_hash(parse_run_config(to_json(c).dump(4))));
}

TEST_CASE("diagnostics name the field and line") {
  CHECK(message_of("{\n  \"dataset\": {\n    \"per_cell\": 10,\n    \"venue\": \"pond\"\n  }\n}") ==
        "cfg: line 4: dataset.venue: unknown key");
  CHECK(message_of("{\n  \"optimizer\": {}\n}").find("line 2: optimizer: unknown section") != std::string::npos);
  CHECK(message_of("{\n  \"training\": {\n    \"epochs\": \"many\"\n  }\n}").find("line 3") != std::string::npos);
  CHECK(message_of("{\n  \"dataset\": {\n    \"per_cell\": 4,\n  }\n}").find("cfg: line 4") == 0);
  CHECK(message_of("[1, 2]").find("top level") != std::string::npos);
  CHECK(message_of(R"({"training": {"seeds": []}})").find("seeds") != std::string::npos);
  CHECK(message_of(R"({"experiment": {"fractions": [0.0]}})").find("fractions") != std::string::npos);
  CHECK(message_of(R"({"experiment": {"modes": ["both"]}})") != "no error");
  CHECK(message_of(R"({"model": {"input_length": 4000}})").find("input_length") != std::string::npos);
  CHECK_THROWS_AS(load_run_config("/nonexistent/paper.defaults"), ConfigError);
}

}  // TEST_SUITE
