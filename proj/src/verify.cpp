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

#include "dronefault/verify.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>

#include "dronefault/audio.hpp"
#include "dronefault/gradcheck.hpp"
#include "dronefault/loss.hpp"
#include "dronefault/metrics.hpp"
#include "dronefault/model.hpp"
#include "dronefault/ops.hpp"
#include "dronefault/seeding.hpp"

namespace dronefault {

namespace {

using T = ad::Tensor<double>;
using ad::Index;
using ad::Shape;

T random_tensor(Shape shape, Rng& rng, bool grad, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  T t(std::move(shape), grad);
  for (Index i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
  return t;
}

// Values bounded away from zero, for ops with a kink there.
T away_from_zero(Shape shape, Rng& rng) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::bernoulli_distribution sign(0.5);
  T t(std::move(shape), true);
  for (Index i = 0; i < t.size(); ++i) t.data()[i] = sign(rng) ? u(rng) : -u(rng);
  return t;
}

// Distinct values 0.05 apart in random order, so max pooling has no near ties.
T distinct(Shape shape, Rng& rng) {
  T t(std::move(shape), true);
  std::vector<double> v(static_cast<std::size_t>(t.size()));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.05 * static_cast<double>(i) - 1.0;
  std::shuffle(v.begin(), v.end(), rng);
  for (Index i = 0; i < t.size(); ++i) t.data()[i] = v[static_cast<std::size_t>(i)];
  return t;
}

// Scalar projection with fixed random weights.
T project(const T& y, const T& weights) { return ad::sum(ad::mul(y, weights)); }

struct Case {
  std::function<T()> fn;
  std::vector<T> params;
};

using CaseMaker = std::function<Case(Rng&)>;

Index pick(Rng& rng, Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(rng); }

template <typename Make>
CaseMaker projected(Make make) {
  return [make](Rng& rng) {
    auto [fn, params] = make(rng);
    const T probe = fn();
    const T w = random_tensor(probe.shape(), rng, false);
    return Case{[fn, w] { return project(fn(), w); }, params};
  };
}

std::vector<std::pair<std::string, CaseMaker>> op_cases() {
  std::vector<std::pair<std::string, CaseMaker>> out;
  out.emplace_back("conv1d", projected([](Rng& rng) {
    const Index b = pick(rng, 1, 2), cin = pick(rng, 1, 3), cout = pick(rng, 1, 3), k = pick(rng, 1, 5);
    const Index stride = pick(rng, 1, 3), pad = pick(rng, 0, 2), t = pick(rng, k, k + 8);
    T x = random_tensor({b, cin, t}, rng, true), w = random_tensor({cout, cin, k}, rng, true);
    T bias = std::bernoulli_distribution(0.5)(rng) ? random_tensor({cout}, rng, true) : T();
    std::vector<T> params{x, w};
    if (bias.defined()) params.push_back(bias);
    return std::pair{std::function<T()>([=] { return ad::conv1d(x, w, bias, stride, pad); }), params};
  }));
  out.emplace_back("linear", projected([](Rng& rng) {
    const Index b = pick(rng, 1, 3), in = pick(rng, 1, 6), o = pick(rng, 1, 5);
    T x = random_tensor({b, in}, rng, true), w = random_tensor({o, in}, rng, true), bias = random_tensor({o}, rng, true);
    return std::pair{std::function<T()>([=] { return ad::linear(x, w, bias); }), std::vector<T>{x, w, bias}};
  }));
  for (auto mode : {ad::NormMode::kTrain, ad::NormMode::kEval}) {
    out.emplace_back(mode == ad::NormMode::kTrain ? "batchnorm1d.train" : "batchnorm1d.eval", projected([mode](Rng& rng) {
      const Index b = pick(rng, 1, 3), c = pick(rng, 1, 3), t = pick(rng, 2, 6);
      T x = random_tensor({b, c, t}, rng, true), g = random_tensor({c}, rng, true, 0.5, 1.5), be = random_tensor({c}, rng, true);
      auto stats = std::make_shared<ad::BatchNormStats<double>>(c);
      stats->mean = random_tensor({c}, rng, false).data();
      stats->var = random_tensor({c}, rng, false, 0.5, 2.0).data();
      return std::pair{std::function<T()>([=] { return ad::batchnorm1d(x, g, be, *stats, mode, 0.1, 1e-5, false); }),
                       std::vector<T>{x, g, be}};
    }));
  }
  for (auto kind : {ad::PoolKind::kMax, ad::PoolKind::kAvg}) {
    out.emplace_back(kind == ad::PoolKind::kMax ? "pool1d.max" : "pool1d.avg", projected([kind](Rng& rng) {
      const Index b = pick(rng, 1, 2), c = pick(rng, 1, 3), size = pick(rng, 1, 4), stride = pick(rng, 1, 4);
      const Index t = pick(rng, size, size + 9);
      const bool ceil = std::bernoulli_distribution(0.5)(rng);
      T x = distinct({b, c, t}, rng);
      return std::pair{std::function<T()>([=] { return ad::pool1d(x, kind, size, stride, ceil); }), std::vector<T>{x}};
    }));
  }
  const std::pair<const char*, ad::Activation> acts[] = {{"relu", ad::Activation::kRelu},
                                                         {"sigmoid", ad::Activation::kSigmoid},
                                                         {"abs", ad::Activation::kAbs},
                                                         {"exp", ad::Activation::kExp},
                                                         {"log1p", ad::Activation::kLog1p}};
  for (const auto& [label, act] : acts) {
    out.emplace_back(label, projected([act](Rng& rng) {
      const Shape s{pick(rng, 1, 3), pick(rng, 1, 6)};
      T x = act == ad::Activation::kLog1p ? random_tensor(s, rng, true, 0.0, 2.0) : away_from_zero(s, rng);
      return std::pair{std::function<T()>([=] { return ad::elementwise(x, act); }), std::vector<T>{x}};
    }));
  }
  out.emplace_back("global_avg_pool", projected([](Rng& rng) {
    T x = random_tensor({pick(rng, 1, 3), pick(rng, 1, 4), pick(rng, 1, 6)}, rng, true);
    return std::pair{std::function<T()>([=] { return ad::global_avg_pool(x); }), std::vector<T>{x}};
  }));
  out.emplace_back("channel_mean", projected([](Rng& rng) {
    T x = random_tensor({pick(rng, 1, 3), pick(rng, 1, 4), pick(rng, 1, 6)}, rng, true);
    return std::pair{std::function<T()>([=] { return ad::channel_mean(x); }), std::vector<T>{x}};
  }));
  out.emplace_back("scale_channels", projected([](Rng& rng) {
    const Index b = pick(rng, 1, 3), c = pick(rng, 1, 4);
    T x = random_tensor({b, c, pick(rng, 1, 6)}, rng, true), s = random_tensor({b, c}, rng, true);
    return std::pair{std::function<T()>([=] { return ad::scale_channels(x, s); }), std::vector<T>{x, s}};
  }));
  out.emplace_back("add", projected([](Rng& rng) {
    const Shape s{pick(rng, 1, 3), pick(rng, 1, 5)};
    T a = random_tensor(s, rng, true), b = random_tensor(s, rng, true);
    return std::pair{std::function<T()>([=] { return ad::add(a, b); }), std::vector<T>{a, b}};
  }));
  out.emplace_back("mul", projected([](Rng& rng) {
    const Shape s{pick(rng, 1, 3), pick(rng, 1, 5)};
    T a = random_tensor(s, rng, true), b = random_tensor(s, rng, true);
    return std::pair{std::function<T()>([=] { return ad::mul(a, b); }), std::vector<T>{a, b}};
  }));
  out.emplace_back("scale", projected([](Rng& rng) {
    T x = random_tensor({pick(rng, 1, 3), pick(rng, 1, 5)}, rng, true);
    const double f = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
    return std::pair{std::function<T()>([=] { return ad::scale(x, f); }), std::vector<T>{x}};
  }));
  out.emplace_back("reshape", projected([](Rng& rng) {
    const Index a = pick(rng, 1, 3), b = pick(rng, 1, 4);
    T x = random_tensor({a, b}, rng, true);
    return std::pair{std::function<T()>([=] { return x.reshape({b * a}); }), std::vector<T>{x}};
  }));
  out.emplace_back("softmax_cce", [](Rng& rng) {
    const Index b = pick(rng, 1, 4), k = pick(rng, 2, 9);
    T logits = random_tensor({b, k}, rng, true, -3.0, 3.0);
    T y({b, k});
    for (Index i = 0; i < b; ++i) y.data()[i * k + pick(rng, 0, k - 1)] = 1.0;
    return Case{[=] { return ad::softmax_cce(logits, y); }, {logits}};
  });
  out.emplace_back("total_loss", [](Rng& rng) {
    auto weights = std::make_shared<UncertaintyWeights<double>>();
    weights->rho_s.data()[0] = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
    weights->rho_d.data()[0] = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
    T ls = random_tensor({1}, rng, true, 0.0, 3.0), ld = random_tensor({1}, rng, true, 0.0, 3.0);
    return Case{[=] { return total_loss(ls, ld, *weights); }, {ls, ld, weights->rho_s, weights->rho_d}};
  });
  return out;
}

}  // namespace

SuiteResult gradient_suite(const VerifyOptions& options) {
  SuiteResult r;
  r.name = "gradient";
  r.metric = "max relative error";
  r.threshold = 1e-4;
  ad::testing::set_corrupt_linear_backward(options.inject_fault);
  std::uint64_t stream = 0;
  for (const auto& [label, make] : op_cases()) {
    double worst = 0.0;
    for (int k = 0; k < options.cases_per_op; ++k) {
      Rng rng(derive_seed(options.seed, ++stream));
      Case c = make(rng);
      worst = std::max(worst, ad::grad_check<double>(c.fn, c.params).max_rel_error);
      ++r.cases;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s: %d cases, max rel err %.3e", label.c_str(), options.cases_per_op, worst);
    r.details.push_back(buf);
    r.worst = std::max(r.worst, worst);
  }

  // Whole tiny model, both heads and both observation-noise parameters.
  Rng rng(derive_seed(options.seed, ++stream));
  Model<double> model(ModelConfig::tiny(), rng);
  model.train();
  model.freeze_stats(true);
  UncertaintyWeights<double> weights;
  weights.rho_s.data()[0] = 0.3;
  weights.rho_d.data()[0] = -0.2;
  const T x = random_tensor({2, 1, model.config().input_length}, rng, false);
  T ys({2, kNumStatus}), yd({2, kNumDirection});
  ys.data()[1] = ys.data()[kNumStatus + 7] = 1.0;
  yd.data()[4] = yd.data()[kNumDirection + 0] = 1.0;
  std::vector<T> params{weights.rho_s, weights.rho_d};
  for (const auto& p : model.parameters()) params.push_back(p.tensor);
  const auto result = ad::grad_check<double>(
      [&] {
        const auto out = model.forward(x);
        const auto losses = task_losses(out.status, out.direction, ys, yd);
        return total_loss(losses.status, losses.direction, weights);
      },
      params, 1e-5, [&] { return model.stats_digest(); });
  ++r.cases;
  char buf[128];
  std::snprintf(buf, sizeof buf, "tiny model: %lld probes, max rel err %.3e", static_cast<long long>(result.probes),
                result.max_rel_error);
  r.details.push_back(buf);
  r.worst = std::max(r.worst, result.max_rel_error);
  ad::testing::set_corrupt_linear_backward(false);
  r.passed = r.worst < r.threshold;
  return r;
}

SuiteResult snr_suite(const VerifyOptions& options) {
  SuiteResult r;
  r.name = "snr";
  r.metric = "max |achieved - requested| dB";
  r.threshold = 1e-9;
  int mismatched = 0;
  for (int k = 0; k < 1000; ++k) {
    Rng rng(derive_seed(options.seed, 0x5A00 + static_cast<std::uint64_t>(k)));
    std::normal_distribution<double> n01;
    const Index n_sig = std::uniform_int_distribution<Index>(256, 8000)(rng);
    const Index n_noise = std::uniform_int_distribution<Index>(64, 16000)(rng);
    AudioClip signal{Eigen::ArrayXd::NullaryExpr(n_sig, [&] { return n01(rng); }), 16000};
    AudioClip noise{Eigen::ArrayXd::NullaryExpr(n_noise, [&] { return 0.3 * n01(rng); }), 16000};
    const double snr = std::uniform_real_distribution<double>(10.0, 15.0)(rng);
    Rng a = rng, b = rng;
    const AudioClip mix = mix_at_snr(signal, noise, snr, a);
    const MixComponents parts = mix_components(signal, noise, snr, b);
    // The mixture must be exactly the sum of the reported components.
    if (!((signal.samples + parts.noise) == mix.samples).all()) ++mismatched;
    r.worst = std::max(r.worst, std::abs(snr_db(signal.samples, parts.noise) - snr));
    ++r.cases;
  }
  if (mismatched) r.details.push_back(std::to_string(mismatched) + " mixtures differ from signal + noise");
  r.passed = mismatched == 0 && r.worst < r.threshold;
  return r;
}

SuiteResult metric_suite(const VerifyOptions& options) {
  SuiteResult r;
  r.name = "macro_f1";
  r.metric = "max |macro_f1 - brute force|";
  r.threshold = 0.0;
  const double hand = macro_f1({1, 0, 1}, {1, 1, 0}, 2).macro;
  r.details.push_back("hand example: " + std::to_string(hand));
  bool ok = hand == 0.25;
  for (int k = 0; k < 1000; ++k) {
    Rng rng(derive_seed(options.seed, 0xF100 + static_cast<std::uint64_t>(k)));
    const int classes = std::uniform_int_distribution<int>(1, 12)(rng);
    const int n = std::uniform_int_distribution<int>(1, 200)(rng);
    std::uniform_int_distribution<int> label(0, classes - 1);
    std::vector<int> pred(static_cast<std::size_t>(n)), truth(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      truth[static_cast<std::size_t>(i)] = label(rng);
      pred[static_cast<std::size_t>(i)] = label(rng);
    }
    double total = 0.0;
    for (int c = 0; c < classes; ++c) {
      double tp = 0, fp = 0, fn = 0;
      for (int i = 0; i < n; ++i) {
        const bool p = pred[static_cast<std::size_t>(i)] == c, t = truth[static_cast<std::size_t>(i)] == c;
        tp += p && t;
        fp += p && !t;
        fn += !p && t;
      }
      const double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
      const double rec = tp + fn > 0 ? tp / (tp + fn) : 0.0;
      total += prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    }
    const double brute = total / classes;
    r.worst = std::max(r.worst, std::abs(brute - macro_f1(pred, truth, classes).macro));
    ++r.cases;
  }
  r.passed = ok && r.worst == 0.0;
  return r;
}

SuiteResult loss_suite(const VerifyOptions& options) {
  SuiteResult r;
  r.name = "uncertainty_loss";
  r.metric = "max deviation";
  r.threshold = 1e-6;
  bool ok = true;

  // sigma^2 = 1: the weighted sum reduces to L_s + L_d + 2 ln 2.
  Rng rng(derive_seed(options.seed, 0x10));
  UncertaintyWeights<double> unit;
  double worst_identity = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double ls = std::uniform_real_distribution<double>(0.0, 5.0)(rng);
    const double ld = std::uniform_real_distribution<double>(0.0, 5.0)(rng);
    const double got = total_loss(T::scalar(ls), T::scalar(ld), unit).item();
    const double want = ls + ld + 2.0 * std::numbers::ln2;
    worst_identity = std::max(worst_identity, std::abs(got - want) / std::max(1.0, std::abs(want)));
    ++r.cases;
  }
  ok = ok && worst_identity <= 4 * std::numeric_limits<double>::epsilon();
  r.details.push_back("unit sigma identity: max rel deviation " + std::to_string(worst_identity));

  // Stationary point for fixed L against golden-section search over ln(sigma^2).
  auto minimise = [](double loss) {
    auto f = [loss](double u) { return loss / std::exp(u) + std::log1p(std::exp(u)); };
    double lo = -10.0, hi = 10.0;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 200; ++it) {
      const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
      if (f(a) < f(b)) {
        hi = b;
      } else {
        lo = a;
      }
    }
    return std::exp(0.5 * (lo + hi));
  };
  const double at2 = minimise(2.0);
  const double dev = std::max(std::abs(at2 - (1.0 + std::sqrt(3.0))), std::abs(stationary_sigma_sq(2.0) - at2));
  r.details.push_back("stationary sigma^2 at L=2: " + std::to_string(at2));
  double previous = 0.0;
  for (double loss : {0.5, 1.0, 2.0, 4.0}) {
    const double s = minimise(loss);
    ok = ok && s > previous;
    previous = s;
    ++r.cases;
  }
  r.worst = dev;
  r.passed = ok && dev < r.threshold;
  return r;
}

std::vector<SuiteResult> run_verify(const VerifyOptions& options) {
  return {gradient_suite(options), snr_suite(options), metric_suite(options), loss_suite(options)};
}

nlohmann::ordered_json to_json(const std::vector<SuiteResult>& results) {
  nlohmann::ordered_json j;
  bool all = true;
  nlohmann::ordered_json suites = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json s;
    s["name"] = r.name;
    s["status"] = r.passed ? "pass" : "fail";
    s["metric"] = r.metric;
    s["worst"] = r.worst;
    s["threshold"] = r.threshold;
    s["cases"] = r.cases;
    s["details"] = r.details;
    suites.push_back(s);
    all = all && r.passed;
  }
  j["passed"] = all;
  j["suites"] = suites;
  return j;
}

}  // namespace dronefault
