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

#include "dronefault/config.hpp"

#include <fstream>
#include <sstream>

#include "dronefault/errors.hpp"

namespace dronefault {

using nlohmann::json;

namespace {

const std::vector<std::string> kSections = {"dataset", "model", "training", "experiment"};

// Line of the first occurrence of "key" in the text, 0 when unknown.
int line_of(const std::string& text, const std::string& key) {
  if (text.empty()) return 0;
  const auto at = text.find("\"" + key + "\"");
  if (at == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(at), '\n'));
}

[[noreturn]] void fail(const std::string& text, const std::string& field, const std::string& what) {
  const int line = line_of(text, field.substr(field.rfind('.') + 1));
  std::string where = line > 0 ? "line " + std::to_string(line) + ": " : "";
  throw ConfigError(where + field + ": " + what);
}

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

// Unknown keys and wrong value types against the default section.
void check_section(const json& given, const json& defaults, const std::string& section,
                   const std::string& text) {
  if (!given.is_object()) fail(text, section, "expected an object");
  for (const auto& [key, value] : given.items()) {
    const std::string field = section + "." + key;
    if (!defaults.contains(key)) fail(text, field, "unknown key");
    const json& d = defaults.at(key);
    if (!same_kind(value, d)) fail(text, field, std::string("expected ") + d.type_name() + ", found " + value.type_name());
    if (d.is_number_integer() && value.is_number_float()) fail(text, field, "expected an integer");
    if (d.is_number_unsigned() && value.is_number_integer() && value.get<long long>() < 0) {
      fail(text, field, "expected a non-negative integer");
    }
  }
}

json experiment_json(const ExperimentConfig& e) {
  std::vector<std::string> modes;
  for (auto m : e.modes) modes.emplace_back(name(m));
  return json{{"fractions", e.fractions}, {"modes", modes}};
}

}  // namespace

json to_json(const RunConfig& c) {
  json training;
  to_json(training, c.training);
  training["seeds"] = c.seeds;
  return json{{"dataset", c.dataset}, {"model", c.model}, {"training", training},
              {"experiment", experiment_json(c.experiment)}};
}

RunConfig run_config_from_json(const json& j, const std::string& text) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  const json defaults = to_json(RunConfig{});
  for (const auto& [key, value] : j.items()) {
    if (std::find(kSections.begin(), kSections.end(), key) == kSections.end()) fail(text, key, "unknown section");
    check_section(value, defaults.at(key), key, text);
  }

  RunConfig c;
  auto section = [&](const char* key) { return j.contains(key) ? j.at(key) : json::object(); };
  std::string current = "dataset";
  try {
    c.dataset = section("dataset").get<DatasetConfig>();
    current = "model";
    c.model = section("model").get<ModelConfig>();
    current = "training";
    json training = section("training");
    if (training.contains("seeds")) {
      c.seeds = training.at("seeds").get<std::vector<std::uint64_t>>();
      training.erase("seeds");
    }
    c.training = training.get<TrainConfig>();
    current = "experiment";
    const json exp = section("experiment");
    if (exp.contains("fractions")) c.experiment.fractions = exp.at("fractions").get<std::vector<double>>();
    if (exp.contains("modes")) {
      c.experiment.modes.clear();
      for (const auto& m : exp.at("modes")) c.experiment.modes.push_back(parse_task_mode(m.get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw ConfigError(current + ": " + e.what());
  }
  try {
    validate(c);
  } catch (const ConfigError& e) {
    // Messages read "section: field must ...", so the word after the
    // colon is the key to locate.
    const std::string msg = e.what();
    const auto colon = msg.find(": ");
    if (colon != std::string::npos) {
      const auto start = colon + 2;
      const int line = line_of(text, msg.substr(start, msg.find(' ', start) - start));
      if (line > 0) throw ConfigError("line " + std::to_string(line) + ": " + msg);
    }
    throw;
  }
  return c;
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ConfigError(origin + ": line " + std::to_string(line) + ": " + e.what());
  }
  try {
    return run_config_from_json(j, text);
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.string());
}

void validate(const RunConfig& c) {
  validate(c.dataset);
  validate(c.model);
  validate(c.training);
  if (c.seeds.empty()) throw ConfigError("training: seeds must not be empty");
  if (c.experiment.fractions.empty()) throw ConfigError("experiment: fractions must not be empty");
  for (double f : c.experiment.fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("experiment: fractions must lie in (0, 1]");
  }
  if (c.experiment.modes.empty()) throw ConfigError("experiment: modes must not be empty");
  if (c.model.sample_rate != c.dataset.sample_rate) {
    throw ConfigError("model: sample_rate must equal the dataset's sample_rate");
  }
  const auto samples = static_cast<Eigen::Index>(std::llround(c.dataset.segment_s * c.dataset.sample_rate));
  if (c.model.input_length != samples) {
    throw ConfigError("model: input_length must equal segment_s * sample_rate (" + std::to_string(samples) + ")");
  }
}

std::string config_hash(const RunConfig& c) { return config_hash(to_json(c)); }

}  // namespace dronefault
