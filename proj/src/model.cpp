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

#include "dronefault/model.hpp"

#include <cmath>

#include "dronefault/errors.hpp"
#include "dronefault/gammatone.hpp"
#include "dronefault/seeding.hpp"

namespace dronefault {

using ad::Index;

ModelConfig ModelConfig::tiny() {
  ModelConfig c;
  c.input_length = 512;
  c.n_filters = 8;
  c.taps = 64;
  c.blocks = {{8, 1}};
  c.se_reduction = 4;
  return c;
}

Index ModelConfig::frontend_frames() const {
  return (input_length + 2 * frontend_padding() - taps) / frontend_stride + 1;
}

Index ModelConfig::pooled_frames() const { return (frontend_frames() - pool_size) / pool_stride + 1; }

namespace {

Index strided_length(Index t, Index stride) { return (t + 2 - 3) / stride + 1; }

}  // namespace

Index ModelConfig::feature_width() const {
  if (head_pooling == HeadPooling::kTemporal) return blocks.empty() ? n_filters : blocks.back().channels;
  Index t = pooled_frames();
  for (const auto& b : blocks) t = strided_length(t, b.stride);
  return t;
}

void validate(const ModelConfig& c) {
  auto fail = [](const std::string& what) { throw ConfigError("model: " + what); };
  if (c.sample_rate <= 0) fail("sample_rate must be positive");
  if (c.input_length < 1) fail("input_length must be positive");
  if (c.n_filters < 1) fail("n_filters must be positive");
  if (c.taps < 2) fail("taps must be at least 2");
  if (c.frontend_stride < 1 || c.frontend_stride > c.taps) fail("frontend_stride must lie in [1, taps]");
  if (c.pool_size < 1 || c.pool_stride < 1) fail("pool_size and pool_stride must be positive");
  if (!(c.f_low > 0.0 && c.f_low < c.f_high && c.f_high < c.sample_rate / 2.0)) {
    fail("need 0 < f_low < f_high < sample_rate / 2");
  }
  if (c.taps > c.input_length + 2 * c.frontend_padding()) fail("taps longer than the padded input");
  if (c.frontend_frames() < c.pool_size) fail("input too short for the front-end pooling");
  if (c.se_reduction < 1) fail("se_reduction must be positive");
  Index t = c.pooled_frames();
  for (std::size_t i = 0; i < c.blocks.size(); ++i) {
    const auto& b = c.blocks[i];
    if (b.channels < 1) fail("block " + std::to_string(i) + ": channels must be positive");
    if (b.stride != 1 && b.stride != 2) fail("block " + std::to_string(i) + ": stride must be 1 or 2");
    if (b.channels / c.se_reduction < 1) {
      fail("block " + std::to_string(i) + ": channels smaller than se_reduction");
    }
    t = strided_length(t, b.stride);
    if (t < 1) fail("block " + std::to_string(i) + ": no frames left");
  }
  if (c.n_status < 2) fail("n_status must be at least 2");
  if (c.mode == TaskMode::kMultiTask && c.n_direction < 2) fail("n_direction must be at least 2");
}

std::string_view name(TaskMode mode) { return mode == TaskMode::kMultiTask ? "mtl" : "stl"; }

TaskMode parse_task_mode(std::string_view text) {
  if (text == "mtl" || text == "MTL") return TaskMode::kMultiTask;
  if (text == "stl" || text == "STL") return TaskMode::kSingleTask;
  throw ConfigError("unknown mode '" + std::string(text) + "' (expected mtl or stl)");
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : c.blocks) blocks.push_back({b.channels, b.stride});
  j = nlohmann::json{{"sample_rate", c.sample_rate},
                     {"input_length", c.input_length},
                     {"n_filters", c.n_filters},
                     {"taps", c.taps},
                     {"frontend_stride", c.frontend_stride},
                     {"pool_size", c.pool_size},
                     {"pool_stride", c.pool_stride},
                     {"f_low", c.f_low},
                     {"f_high", c.f_high},
                     {"blocks", blocks},
                     {"se_reduction", c.se_reduction},
                     {"n_status", c.n_status},
                     {"n_direction", c.n_direction},
                     {"mode", name(c.mode)},
                     {"head_pooling", c.head_pooling == HeadPooling::kTemporal ? "temporal" : "channel"}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  static const std::vector<std::string> kKeys = {
      "sample_rate", "input_length", "n_filters", "taps",         "frontend_stride",
      "pool_size",   "pool_stride",  "f_low",     "f_high",       "blocks",
      "se_reduction", "n_status",    "n_direction", "mode",       "head_pooling"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw ConfigError("model: unknown key '" + key + "'");
    }
  }
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("sample_rate", c.sample_rate);
  get("input_length", c.input_length);
  get("n_filters", c.n_filters);
  get("taps", c.taps);
  get("frontend_stride", c.frontend_stride);
  get("pool_size", c.pool_size);
  get("pool_stride", c.pool_stride);
  get("f_low", c.f_low);
  get("f_high", c.f_high);
  get("se_reduction", c.se_reduction);
  get("n_status", c.n_status);
  get("n_direction", c.n_direction);
  if (j.contains("blocks")) {
    c.blocks.clear();
    for (const auto& b : j.at("blocks")) {
      if (!b.is_array() || b.size() != 2) throw ConfigError("model: blocks entries are [channels, stride]");
      c.blocks.push_back({b[0].get<Index>(), b[1].get<Index>()});
    }
  }
  if (j.contains("mode")) c.mode = parse_task_mode(j.at("mode").get<std::string>());
  if (j.contains("head_pooling")) {
    const auto p = j.at("head_pooling").get<std::string>();
    if (p == "temporal") c.head_pooling = HeadPooling::kTemporal;
    else if (p == "channel") c.head_pooling = HeadPooling::kChannel;
    else throw ConfigError("model: head_pooling must be temporal or channel");
  }
}

template <typename Scalar>
const ad::Tensor<Scalar>& ModelOutputs<Scalar>::direction_logits() const {
  if (!direction.defined()) throw ContractError("single-task model has no direction head");
  return direction;
}

namespace {

template <typename Scalar>
ad::Tensor<Scalar> he_normal(ad::Shape shape, Index fan_in, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  ad::Tensor<Scalar> t(std::move(shape), true);
  for (Index i = 0; i < t.size(); ++i) t.data()[i] = static_cast<Scalar>(normal(rng));
  return t;
}

template <typename Scalar>
ad::Tensor<Scalar> filled(Index n, Scalar v) {
  ad::Tensor<Scalar> t(ad::Shape{n}, true);
  t.data().setConstant(v);
  return t;
}

}  // namespace

template <typename Scalar>
Model<Scalar>::Model(const ModelConfig& config, Rng& rng) : config_(config) {
  validate(config_);
  const auto bank = GammatoneBank::make(static_cast<int>(config_.n_filters), static_cast<int>(config_.taps),
                                        config_.sample_rate, config_.f_low, config_.f_high);
  frontend_ = Tensor(ad::Shape{config_.n_filters, 1, config_.taps}, true);
  for (Index k = 0; k < config_.n_filters; ++k) {
    for (Index i = 0; i < config_.taps; ++i) {
      frontend_.data()[k * config_.taps + i] = static_cast<Scalar>(bank.kernels(k, i));
    }
  }

  auto make_conv_bn = [&](Index cin, Index cout, Index len, Index stride) {
    ConvBn layer;
    layer.weight = he_normal<Scalar>(ad::Shape{cout, cin, len}, cin * len, rng);
    layer.gamma = filled<Scalar>(cout, 1);
    layer.beta = filled<Scalar>(cout, 0);
    layer.stats = ad::BatchNormStats<Scalar>(cout);
    layer.stride = stride;
    layer.padding = len / 2;
    return layer;
  };

  Index channels = config_.n_filters;
  for (const auto& spec : config_.blocks) {
    Block block;
    block.stride = spec.stride;
    block.conv1 = make_conv_bn(channels, spec.channels, 3, spec.stride);
    block.conv2 = make_conv_bn(spec.channels, spec.channels, 3, 1);
    const Index squeezed = spec.channels / config_.se_reduction;
    block.se.w1 = he_normal<Scalar>(ad::Shape{squeezed, spec.channels}, spec.channels, rng);
    block.se.b1 = filled<Scalar>(squeezed, 0);
    block.se.w2 = he_normal<Scalar>(ad::Shape{spec.channels, squeezed}, squeezed, rng);
    block.se.b2 = filled<Scalar>(spec.channels, 0);
    block.has_projection = spec.channels != channels || spec.stride != 1;
    if (block.has_projection) block.projection = make_conv_bn(channels, spec.channels, 1, 1);
    blocks_.push_back(std::move(block));
    channels = spec.channels;
  }

  const Index width = config_.feature_width();
  status_head_.weight = he_normal<Scalar>(ad::Shape{config_.n_status, width}, width, rng);
  status_head_.bias = filled<Scalar>(config_.n_status, 0);
  if (config_.mode == TaskMode::kMultiTask) {
    direction_head_.weight = he_normal<Scalar>(ad::Shape{config_.n_direction, width}, width, rng);
    direction_head_.bias = filled<Scalar>(config_.n_direction, 0);
  }
}

template <typename Scalar>
Model<Scalar> Model<Scalar>::clone() const {
  Model m;
  m.config_ = config_;
  m.mode_ = mode_;
  m.frozen_stats_ = frozen_stats_;
  m.bn_momentum_ = bn_momentum_;
  auto copy_conv = [](const ConvBn& src) {
    ConvBn dst = src;
    dst.weight = src.weight.clone();
    dst.gamma = src.gamma.clone();
    dst.beta = src.beta.clone();
    return dst;
  };
  m.frontend_ = frontend_.clone();
  for (const auto& b : blocks_) {
    Block c = b;
    c.conv1 = copy_conv(b.conv1);
    c.conv2 = copy_conv(b.conv2);
    c.se = {b.se.w1.clone(), b.se.b1.clone(), b.se.w2.clone(), b.se.b2.clone()};
    if (b.has_projection) c.projection = copy_conv(b.projection);
    m.blocks_.push_back(std::move(c));
  }
  m.status_head_ = {status_head_.weight.clone(), status_head_.bias.clone()};
  if (direction_head_.weight.defined()) {
    m.direction_head_ = {direction_head_.weight.clone(), direction_head_.bias.clone()};
  }
  return m;
}

template <typename Scalar>
void Model<Scalar>::reset_bn_stats() {
  for (auto& b : buffers()) {
    if (b.name.ends_with("running_mean")) b.values->setZero();
    else b.values->setOnes();
  }
}

template <typename Scalar>
ad::Tensor<Scalar> Model<Scalar>::conv_bn(ConvBn& layer, const Tensor& x) {
  const Tensor none;
  Tensor y = ad::conv1d(x, layer.weight, none, layer.stride, layer.padding);
  return ad::batchnorm1d(y, layer.gamma, layer.beta, layer.stats, mode_, bn_momentum_, 1e-5,
                         !frozen_stats_);
}

template <typename Scalar>
ModelOutputs<Scalar> Model<Scalar>::forward(const Tensor& x) {
  if (x.rank() != 3 || x.dim(1) != 1 || x.dim(2) != config_.input_length) {
    throw ShapeError("model input must be (B, 1, " + std::to_string(config_.input_length) + "), got " +
                     ad::to_string(x.shape()));
  }
  const Tensor none;
  Tensor h = ad::conv1d(x, frontend_, none, config_.frontend_stride, config_.frontend_padding());
  h = ad::abs(h);
  h = ad::pool1d(h, ad::PoolKind::kMax, config_.pool_size, config_.pool_stride);

  for (auto& block : blocks_) {
    Tensor main = ad::relu(conv_bn(block.conv1, h));
    main = conv_bn(block.conv2, main);
    // Squeeze-excitation gate on the main path.
    Tensor squeezed = ad::global_avg_pool(main);
    Tensor gate = ad::relu(ad::linear(squeezed, block.se.w1, block.se.b1));
    gate = ad::sigmoid(ad::linear(gate, block.se.w2, block.se.b2));
    main = ad::scale_channels(main, gate);

    Tensor skip = h;
    if (block.has_projection) {
      if (block.stride > 1) skip = ad::pool1d(skip, ad::PoolKind::kAvg, block.stride, block.stride, true);
      skip = conv_bn(block.projection, skip);
    }
    h = ad::relu(ad::add(main, skip));
  }

  Tensor features = config_.head_pooling == HeadPooling::kTemporal ? ad::global_avg_pool(h)
                                                                    : ad::channel_mean(h);
  ModelOutputs<Scalar> out;
  out.status = ad::linear(features, status_head_.weight, status_head_.bias);
  if (config_.mode == TaskMode::kMultiTask) {
    out.direction = ad::linear(features, direction_head_.weight, direction_head_.bias);
  }
  return out;
}

template <typename Scalar>
std::vector<NamedTensor<Scalar>> Model<Scalar>::parameters() const {
  std::vector<NamedTensor<Scalar>> out;
  out.push_back({"frontend.weight", frontend_});
  auto conv = [&](const std::string& prefix, const std::string& bn, const ConvBn& layer) {
    out.push_back({prefix + ".weight", layer.weight});
    out.push_back({bn + ".gamma", layer.gamma});
    out.push_back({bn + ".beta", layer.beta});
  };
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    const std::string p = "blocks." + std::to_string(i);
    conv(p + ".conv1", p + ".bn1", b.conv1);
    conv(p + ".conv2", p + ".bn2", b.conv2);
    out.push_back({p + ".se.fc1.weight", b.se.w1});
    out.push_back({p + ".se.fc1.bias", b.se.b1});
    out.push_back({p + ".se.fc2.weight", b.se.w2});
    out.push_back({p + ".se.fc2.bias", b.se.b2});
    if (b.has_projection) conv(p + ".skip.conv", p + ".skip.bn", b.projection);
  }
  out.push_back({"status_head.weight", status_head_.weight});
  out.push_back({"status_head.bias", status_head_.bias});
  if (direction_head_.weight.defined()) {
    out.push_back({"direction_head.weight", direction_head_.weight});
    out.push_back({"direction_head.bias", direction_head_.bias});
  }
  return out;
}

template <typename Scalar>
std::vector<NamedBuffer<Scalar>> Model<Scalar>::buffers() {
  std::vector<NamedBuffer<Scalar>> out;
  auto add = [&](const std::string& bn, ConvBn& layer) {
    out.push_back({bn + ".running_mean", &layer.stats.mean});
    out.push_back({bn + ".running_var", &layer.stats.var});
  };
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    auto& b = blocks_[i];
    const std::string p = "blocks." + std::to_string(i);
    add(p + ".bn1", b.conv1);
    add(p + ".bn2", b.conv2);
    if (b.has_projection) add(p + ".skip.bn", b.projection);
  }
  return out;
}

template <typename Scalar>
Index Model<Scalar>::parameter_count() const {
  Index n = 0;
  for (const auto& p : parameters()) n += p.tensor.size();
  return n;
}

template <typename Scalar>
std::uint64_t Model<Scalar>::stats_digest() const {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto feed = [&](const ad::Array<Scalar>& a) {
    h = fnv1a(std::string_view(reinterpret_cast<const char*>(a.data()), a.size() * sizeof(Scalar)), h);
  };
  for (const auto& b : blocks_) {
    feed(b.conv1.stats.mean);
    feed(b.conv1.stats.var);
    feed(b.conv2.stats.mean);
    feed(b.conv2.stats.var);
    if (b.has_projection) {
      feed(b.projection.stats.mean);
      feed(b.projection.stats.var);
    }
  }
  return h;
}

template <typename Scalar>
std::vector<int> argmax_rows(const ad::Tensor<Scalar>& logits) {
  if (logits.rank() != 2) throw ShapeError("argmax_rows: expected (B, K), got " + ad::to_string(logits.shape()));
  const Index rows = logits.dim(0), cols = logits.dim(1);
  std::vector<int> out(static_cast<std::size_t>(rows));
  for (Index r = 0; r < rows; ++r) {
    Index best = 0;
    for (Index c = 1; c < cols; ++c) {
      if (logits.data()[r * cols + c] > logits.data()[r * cols + best]) best = c;
    }
    out[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return out;
}

template <typename Scalar>
Prediction predict(Model<Scalar>& model, const ad::Tensor<Scalar>& x) {
  if (model.mode() != ad::NormMode::kEval) throw ContractError("predict() requires eval mode");
  ad::NoGradGuard no_grad;
  const auto out = model.forward(x);
  Prediction p;
  for (int i : argmax_rows(out.status)) p.status.push_back(status_from_index(i));
  if (out.has_direction()) {
    for (int i : argmax_rows(out.direction)) p.direction.push_back(direction_from_index(i));
  }
  return p;
}

template struct ModelOutputs<float>;
template struct ModelOutputs<double>;
template class Model<float>;
template class Model<double>;
template std::vector<int> argmax_rows<float>(const ad::Tensor<float>&);
template std::vector<int> argmax_rows<double>(const ad::Tensor<double>&);
template Prediction predict<float>(Model<float>&, const ad::Tensor<float>&);
template Prediction predict<double>(Model<double>&, const ad::Tensor<double>&);

}  // namespace dronefault
