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

#include "dronefault/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dronefault/errors.hpp"

namespace dronefault {

namespace {

constexpr char kMagic[8] = {'D', 'R', 'N', 'F', 'C', 'K', 'P', 'T'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(const std::string& in, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

template <typename Scalar>
void copy_into(const StoredTensor& src, ad::Array<Scalar>& dst, const std::string& name) {
  if (src.values.size() != dst.size()) {
    throw FormatError("checkpoint tensor '" + name + "' has " + std::to_string(src.values.size()) +
                      " values, model expects " + std::to_string(dst.size()));
  }
  dst = src.values.cast<Scalar>();
}

}  // namespace

const StoredTensor* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

template <typename Scalar>
Checkpoint make_checkpoint(Model<Scalar>& model, const UncertaintyWeights<Scalar>* weights,
                           nlohmann::json metadata) {
  Checkpoint c;
  c.model = model.config();
  c.metadata = std::move(metadata);
  for (const auto& p : model.parameters()) {
    c.tensors.push_back({p.name, p.tensor.shape(), p.tensor.data().template cast<float>()});
  }
  for (const auto& b : model.buffers()) {
    c.tensors.push_back({b.name, ad::Shape{b.values->size()}, b.values->template cast<float>()});
  }
  if (weights) {
    c.tensors.push_back({"uncertainty.rho_s", ad::Shape{1}, weights->rho_s.data().template cast<float>()});
    c.tensors.push_back({"uncertainty.rho_d", ad::Shape{1}, weights->rho_d.data().template cast<float>()});
  }
  return c;
}

std::string serialize(const Checkpoint& c) {
  nlohmann::ordered_json header;
  header["format_version"] = kCheckpointVersion;
  nlohmann::json model;
  to_json(model, c.model);
  header["model"] = model;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& t : c.tensors) {
    list.push_back({{"name", t.name}, {"shape", t.shape}, {"dtype", "float32"}});
  }
  header["tensors"] = list;
  header["metadata"] = c.metadata;
  const std::string text = header.dump();

  std::string out(kMagic, sizeof kMagic);
  put_u64(out, text.size());
  out += text;
  for (const auto& t : c.tensors) {
    out.append(reinterpret_cast<const char*>(t.values.data()), t.values.size() * sizeof(float));
  }
  return out;
}

Checkpoint deserialize(const std::string& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw FormatError("not a checkpoint file (bad magic)");
  }
  const std::uint64_t header_len = get_u64(bytes, 8);
  if (header_len > bytes.size() - 16) throw FormatError("checkpoint header truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(16, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  }
  const int version = header.value("format_version", -1);
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint c;
  try {
    c.model = header.at("model").get<ModelConfig>();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint model config: ") + e.what());
  }
  c.metadata = header.value("metadata", nlohmann::json::object());
  std::size_t at = 16 + header_len;
  for (const auto& entry : header.at("tensors")) {
    StoredTensor t;
    t.name = entry.at("name").get<std::string>();
    t.shape = entry.at("shape").get<ad::Shape>();
    if (entry.at("dtype").get<std::string>() != "float32") throw FormatError("unsupported dtype for " + t.name);
    const ad::Index n = ad::numel(t.shape);
    const std::size_t len = static_cast<std::size_t>(n) * sizeof(float);
    if (at + len > bytes.size()) throw FormatError("checkpoint payload truncated at '" + t.name + "'");
    t.values.resize(n);
    std::memcpy(t.values.data(), bytes.data() + at, len);
    at += len;
    c.tensors.push_back(std::move(t));
  }
  if (at != bytes.size()) throw FormatError("checkpoint has trailing bytes");
  return c;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  const std::string bytes = serialize(checkpoint);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

template <typename Scalar>
void restore(const Checkpoint& c, Model<Scalar>& model, UncertaintyWeights<Scalar>* weights) {
  if (!(c.model == model.config())) throw FormatError("checkpoint was written for a different model config");
  auto fetch = [&](const std::string& name, const ad::Shape& shape) -> const StoredTensor& {
    const StoredTensor* t = c.find(name);
    if (!t) throw FormatError("checkpoint lacks tensor '" + name + "'");
    if (t->shape != shape) throw FormatError("checkpoint tensor '" + name + "' has the wrong shape");
    return *t;
  };
  for (auto& p : model.parameters()) {
    auto tensor = p.tensor;
    copy_into(fetch(p.name, tensor.shape()), tensor.data(), p.name);
  }
  for (auto& b : model.buffers()) copy_into(fetch(b.name, ad::Shape{b.values->size()}), *b.values, b.name);
  if (weights) {
    copy_into(fetch("uncertainty.rho_s", ad::Shape{1}), weights->rho_s.data(), "uncertainty.rho_s");
    copy_into(fetch("uncertainty.rho_d", ad::Shape{1}), weights->rho_d.data(), "uncertainty.rho_d");
  }
}

template <typename Scalar>
Model<Scalar> model_from_checkpoint(const Checkpoint& c) {
  validate(c.model);
  Rng rng(0);
  Model<Scalar> model(c.model, rng);
  restore(c, model);
  model.eval();
  return model;
}

template Checkpoint make_checkpoint(Model<float>&, const UncertaintyWeights<float>*, nlohmann::json);
template Checkpoint make_checkpoint(Model<double>&, const UncertaintyWeights<double>*, nlohmann::json);
template void restore(const Checkpoint&, Model<float>&, UncertaintyWeights<float>*);
template void restore(const Checkpoint&, Model<double>&, UncertaintyWeights<double>*);
template Model<float> model_from_checkpoint(const Checkpoint&);
template Model<double> model_from_checkpoint(const Checkpoint&);

}  // namespace dronefault
