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

#include "dronefault/ops.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "dronefault/errors.hpp"

namespace dronefault::ad {
namespace {

std::atomic<bool> g_corrupt_linear{false};

template <typename S>
using RowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using ColMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;
template <typename S>
using StridedPatches = Eigen::Map<const ColMat<S>, 0, Eigen::OuterStride<>>;

[[noreturn]] void shape_error(const std::string& op, const Shape& a, const Shape& b) {
  throw ShapeError(op + ": incompatible shapes " + to_string(a) + " and " + to_string(b));
}

void require_rank(const std::string& op, const Shape& s, std::size_t rank) {
  if (s.size() != rank) {
    throw ShapeError(op + ": expected rank " + std::to_string(rank) + ", got " + to_string(s));
  }
}

// Zero-padded copy of one example (Cin, T) -> (Cin, T + 2p), row-major.
template <typename S>
void pad_rows(const S* src, Index cin, Index t, Index pad, S* dst) {
  const Index tp = t + 2 * pad;
  for (Index c = 0; c < cin; ++c) {
    S* row = dst + c * tp;
    std::fill(row, row + pad, S(0));
    std::copy(src + c * t, src + (c + 1) * t, row + pad);
    std::fill(row + pad + t, row + tp, S(0));
  }
}

// im2col: column j holds the receptive field of output j, channel-major.
template <typename S>
void im2col(const S* xp, Index cin, Index tp, Index len, Index stride, Index tout, ColMat<S>& cols) {
  cols.resize(cin * len, tout);
  for (Index j = 0; j < tout; ++j) {
    S* col = cols.col(j).data();
    for (Index c = 0; c < cin; ++c) {
      const S* src = xp + c * tp + j * stride;
      std::copy(src, src + len, col + c * len);
    }
  }
}

template <typename S>
void col2im_add(const ColMat<S>& cols, Index cin, Index tp, Index len, Index stride, Index tout,
                S* gxp) {
  for (Index j = 0; j < tout; ++j) {
    const S* col = cols.col(j).data();
    for (Index c = 0; c < cin; ++c) {
      S* dst = gxp + c * tp + j * stride;
      for (Index k = 0; k < len; ++k) dst[k] += col[c * len + k];
    }
  }
}

}  // namespace

namespace testing {
void set_corrupt_linear_backward(bool on) { g_corrupt_linear = on; }
bool corrupt_linear_backward() { return g_corrupt_linear; }
}  // namespace testing

template <typename S>
Tensor<S> conv1d(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& bias, Index stride,
                 Index padding) {
  require_rank("conv1d input", x.shape(), 3);
  require_rank("conv1d weight", w.shape(), 3);
  const Index batch = x.dim(0), cin = x.dim(1), t = x.dim(2);
  const Index cout = w.dim(0), len = w.dim(2);
  if (w.dim(1) != cin) shape_error("conv1d", x.shape(), w.shape());
  if (stride < 1 || padding < 0) throw ShapeError("conv1d: stride must be >= 1 and padding >= 0");
  if (len > t + 2 * padding) shape_error("conv1d (kernel longer than padded input)", x.shape(), w.shape());
  const bool has_bias = bias.defined();
  if (has_bias && (bias.rank() != 1 || bias.dim(0) != cout)) {
    shape_error("conv1d bias", w.shape(), bias.shape());
  }
  const Index tp = t + 2 * padding;
  const Index tout = (tp - len) / stride + 1;
  const bool direct = cin == 1;  // strided map over the padded signal, no im2col copy

  Array<S> out(batch * cout * tout);
  const Eigen::Map<const RowMat<S>> wm(w.ptr(), cout, cin * len);
  std::vector<S> xp(static_cast<std::size_t>(cin * tp));
  ColMat<S> cols;
  for (Index b = 0; b < batch; ++b) {
    pad_rows(x.ptr() + b * cin * t, cin, t, padding, xp.data());
    Eigen::Map<RowMat<S>> ob(out.data() + b * cout * tout, cout, tout);
    if (direct) {
      StridedPatches<S> patches(xp.data(), len, tout, Eigen::OuterStride<>(stride));
      ob.noalias() = wm * patches;
    } else {
      im2col(xp.data(), cin, tp, len, stride, tout, cols);
      ob.noalias() = wm * cols;
    }
    if (has_bias) ob.colwise() += Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>>(bias.ptr(), cout);
  }

  std::vector<Tensor<S>> inputs{x, w};
  if (has_bias) inputs.push_back(bias);
  return make_result<S>(
      "conv1d", Shape{batch, cout, tout}, std::move(out), std::move(inputs),
      [=](detail::Node<S>& self) {
        auto& xn = *self.inputs[0];
        auto& wn = *self.inputs[1];
        const Eigen::Map<const RowMat<S>> wmat(wn.value.data(), cout, cin * len);
        std::vector<S> xpad(static_cast<std::size_t>(cin * tp));
        std::vector<S> gxpad;
        ColMat<S> cols_b, gcols;
        if (xn.requires_grad) gxpad.resize(static_cast<std::size_t>(cin * tp));
        for (Index b = 0; b < batch; ++b) {
          const Eigen::Map<const RowMat<S>> gy(self.grad.data() + b * cout * tout, cout, tout);
          if (wn.requires_grad) {
            pad_rows(xn.value.data() + b * cin * t, cin, t, padding, xpad.data());
            Eigen::Map<RowMat<S>> gw(wn.grad_buffer().data(), cout, cin * len);
            if (direct) {
              StridedPatches<S> patches(xpad.data(), len, tout, Eigen::OuterStride<>(stride));
              gw.noalias() += gy * patches.transpose();
            } else {
              im2col(xpad.data(), cin, tp, len, stride, tout, cols_b);
              gw.noalias() += gy * cols_b.transpose();
            }
          }
          if (has_bias && self.inputs[2]->requires_grad) {
            Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>> gb(self.inputs[2]->grad_buffer().data(), cout);
            gb += gy.rowwise().sum();
          }
          if (xn.requires_grad) {
            gcols.noalias() = wmat.transpose() * gy;
            std::fill(gxpad.begin(), gxpad.end(), S(0));
            col2im_add(gcols, cin, tp, len, stride, tout, gxpad.data());
            S* gx = xn.grad_buffer().data() + b * cin * t;
            for (Index c = 0; c < cin; ++c) {
              for (Index i = 0; i < t; ++i) gx[c * t + i] += gxpad[c * tp + padding + i];
            }
          }
        }
      });
}

template <typename S>
Tensor<S> linear(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b) {
  require_rank("linear input", x.shape(), 2);
  require_rank("linear weight", w.shape(), 2);
  const Index batch = x.dim(0), in = x.dim(1), out = w.dim(0);
  if (w.dim(1) != in) shape_error("linear", x.shape(), w.shape());
  if (b.rank() != 1 || b.dim(0) != out) shape_error("linear bias", w.shape(), b.shape());

  Array<S> y(batch * out);
  Eigen::Map<RowMat<S>> ym(y.data(), batch, out);
  const Eigen::Map<const RowMat<S>> xm(x.ptr(), batch, in);
  const Eigen::Map<const RowMat<S>> wm(w.ptr(), out, in);
  ym.noalias() = xm * wm.transpose();
  ym.rowwise() += Eigen::Map<const Eigen::Matrix<S, 1, Eigen::Dynamic>>(b.ptr(), out);

  return make_result<S>("linear", Shape{batch, out}, std::move(y), {x, w, b},
                        [=](detail::Node<S>& self) {
                          const S sign = testing::corrupt_linear_backward() ? S(-1) : S(1);
                          auto& xn = *self.inputs[0];
                          auto& wn = *self.inputs[1];
                          auto& bn = *self.inputs[2];
                          const Eigen::Map<const RowMat<S>> gy(self.grad.data(), batch, out);
                          const Eigen::Map<const RowMat<S>> xv(xn.value.data(), batch, in);
                          const Eigen::Map<const RowMat<S>> wv(wn.value.data(), out, in);
                          if (xn.requires_grad) {
                            Eigen::Map<RowMat<S>> gx(xn.grad_buffer().data(), batch, in);
                            gx.noalias() += sign * (gy * wv);
                          }
                          if (wn.requires_grad) {
                            Eigen::Map<RowMat<S>> gw(wn.grad_buffer().data(), out, in);
                            gw.noalias() += sign * (gy.transpose() * xv);
                          }
                          if (bn.requires_grad) {
                            Eigen::Map<Eigen::Matrix<S, 1, Eigen::Dynamic>> gb(bn.grad_buffer().data(), out);
                            gb += sign * gy.colwise().sum();
                          }
                        });
}

template <typename S>
Tensor<S> batchnorm1d(const Tensor<S>& x, const Tensor<S>& gamma, const Tensor<S>& beta,
                      BatchNormStats<S>& stats, NormMode mode, double momentum, double eps,
                      bool update_stats) {
  require_rank("batchnorm1d input", x.shape(), 3);
  const Index batch = x.dim(0), ch = x.dim(1), t = x.dim(2);
  if (gamma.size() != ch || beta.size() != ch) shape_error("batchnorm1d affine", x.shape(), gamma.shape());
  if (stats.mean.size() != ch || stats.var.size() != ch) {
    throw ShapeError("batchnorm1d: running stats have " + std::to_string(stats.mean.size()) +
                     " channels, input " + to_string(x.shape()));
  }
  const Index n = batch * t;
  if (mode == NormMode::kTrain && n <= 1) {
    throw ShapeError("batchnorm1d: train mode needs more than one value per channel, got " +
                     to_string(x.shape()));
  }

  Array<S> mean(ch), invstd(ch);
  if (mode == NormMode::kTrain) {
    for (Index c = 0; c < ch; ++c) {
      double s = 0.0;
      for (Index b = 0; b < batch; ++b) {
        const S* row = x.ptr() + (b * ch + c) * t;
        for (Index i = 0; i < t; ++i) s += row[i];
      }
      const double m = s / n;
      double v = 0.0;
      for (Index b = 0; b < batch; ++b) {
        const S* row = x.ptr() + (b * ch + c) * t;
        for (Index i = 0; i < t; ++i) v += (row[i] - m) * (row[i] - m);
      }
      v /= n;
      mean[c] = static_cast<S>(m);
      invstd[c] = static_cast<S>(1.0 / std::sqrt(v + eps));
      if (update_stats) {
        stats.mean[c] = static_cast<S>((1.0 - momentum) * stats.mean[c] + momentum * m);
        stats.var[c] = static_cast<S>((1.0 - momentum) * stats.var[c] +
                                      momentum * v * n / static_cast<double>(n - 1));
      }
    }
  } else {
    mean = stats.mean;
    invstd = (stats.var + static_cast<S>(eps)).sqrt().inverse();
  }

  Array<S> xhat(x.size()), y(x.size());
  for (Index b = 0; b < batch; ++b) {
    for (Index c = 0; c < ch; ++c) {
      const Index off = (b * ch + c) * t;
      xhat.segment(off, t) = (x.data().segment(off, t) - mean[c]) * invstd[c];
      y.segment(off, t) = xhat.segment(off, t) * gamma.data()[c] + beta.data()[c];
    }
  }

  const bool train = mode == NormMode::kTrain;
  return make_result<S>(
      "batchnorm1d", x.shape(), std::move(y), {x, gamma, beta},
      [=, xhat = std::move(xhat)](detail::Node<S>& self) {
        auto& xn = *self.inputs[0];
        auto& gn = *self.inputs[1];
        auto& bn = *self.inputs[2];
        for (Index c = 0; c < ch; ++c) {
          double sum_gy = 0.0, sum_gy_xhat = 0.0;
          for (Index b = 0; b < batch; ++b) {
            const Index off = (b * ch + c) * t;
            sum_gy += self.grad.segment(off, t).sum();
            sum_gy_xhat += (self.grad.segment(off, t) * xhat.segment(off, t)).sum();
          }
          if (gn.requires_grad) gn.grad_buffer()[c] += static_cast<S>(sum_gy_xhat);
          if (bn.requires_grad) bn.grad_buffer()[c] += static_cast<S>(sum_gy);
          if (!xn.requires_grad) continue;
          const S g = gn.value[c];
          auto& gx = xn.grad_buffer();
          for (Index b = 0; b < batch; ++b) {
            const Index off = (b * ch + c) * t;
            if (train) {
              // dx = invstd/N (N dxhat - sum dxhat - xhat sum(dxhat xhat)), dxhat = g dy
              const S k1 = static_cast<S>(g * sum_gy / n);
              const S k2 = static_cast<S>(g * sum_gy_xhat / n);
              gx.segment(off, t) +=
                  invstd[c] * (g * self.grad.segment(off, t) - k1 - xhat.segment(off, t) * k2);
            } else {
              gx.segment(off, t) += invstd[c] * g * self.grad.segment(off, t);
            }
          }
        }
      });
}

template <typename S>
Tensor<S> pool1d(const Tensor<S>& x, PoolKind kind, Index size, Index stride, bool ceil_mode) {
  require_rank("pool1d", x.shape(), 3);
  const Index batch = x.dim(0), ch = x.dim(1), t = x.dim(2);
  if (size < 1 || stride < 1) throw ShapeError("pool1d: size and stride must be >= 1");
  if (size > t) {
    throw ShapeError("pool1d: window " + std::to_string(size) + " longer than input " +
                     to_string(x.shape()));
  }
  Index tout = (t - size) / stride + 1;
  // A ceil-mode tail window must still start inside the input.
  if (ceil_mode && (t - size) % stride != 0 && tout * stride < t) ++tout;

  const Index rows = batch * ch;
  Array<S> y(rows * tout);
  std::vector<Index> argmax;
  if (kind == PoolKind::kMax) argmax.resize(static_cast<std::size_t>(rows * tout));
  for (Index r = 0; r < rows; ++r) {
    const S* in = x.ptr() + r * t;
    for (Index j = 0; j < tout; ++j) {
      const Index lo = j * stride, hi = std::min(lo + size, t);
      if (kind == PoolKind::kMax) {
        Index best = lo;
        for (Index i = lo + 1; i < hi; ++i) {
          if (in[i] > in[best]) best = i;
        }
        argmax[static_cast<std::size_t>(r * tout + j)] = best;
        y[r * tout + j] = in[best];
      } else {
        S acc = 0;
        for (Index i = lo; i < hi; ++i) acc += in[i];
        y[r * tout + j] = acc / static_cast<S>(hi - lo);
      }
    }
  }

  return make_result<S>(
      "pool1d", Shape{batch, ch, tout}, std::move(y), {x},
      [=, argmax = std::move(argmax)](detail::Node<S>& self) {
        auto& gx = self.inputs[0]->grad_buffer();
        for (Index r = 0; r < rows; ++r) {
          for (Index j = 0; j < tout; ++j) {
            const S g = self.grad[r * tout + j];
            if (kind == PoolKind::kMax) {
              gx[r * t + argmax[static_cast<std::size_t>(r * tout + j)]] += g;
            } else {
              const Index lo = j * stride, hi = std::min(lo + size, t);
              const S share = g / static_cast<S>(hi - lo);
              for (Index i = lo; i < hi; ++i) gx[r * t + i] += share;
            }
          }
        }
      });
}

template <typename S>
Tensor<S> elementwise(const Tensor<S>& x, Activation kind) {
  const Array<S>& v = x.data();
  Array<S> y;
  switch (kind) {
    case Activation::kRelu: y = v.max(S(0)); break;
    case Activation::kSigmoid: y = (S(1) + (-v).exp()).inverse(); break;
    case Activation::kAbs: y = v.abs(); break;
    case Activation::kExp: y = v.exp(); break;
    case Activation::kLog1p: y = v.log1p(); break;
  }
  static constexpr const char* kNames[] = {"relu", "sigmoid", "abs", "exp", "log1p"};
  return make_result<S>(kNames[static_cast<int>(kind)], x.shape(), std::move(y), {x},
                        [kind](detail::Node<S>& self) {
                          const Array<S>& in = self.inputs[0]->value;
                          const Array<S>& out = self.value;
                          auto& gx = self.inputs[0]->grad_buffer();
                          switch (kind) {
                            case Activation::kRelu:
                              gx += (in > S(0)).select(self.grad, S(0));
                              break;
                            case Activation::kSigmoid:
                              gx += self.grad * out * (S(1) - out);
                              break;
                            case Activation::kAbs:
                              gx += self.grad * ((in > S(0)).template cast<S>() -
                                                 (in < S(0)).template cast<S>());
                              break;
                            case Activation::kExp:
                              gx += self.grad * out;
                              break;
                            case Activation::kLog1p:
                              gx += self.grad / (S(1) + in);
                              break;
                          }
                        });
}

template <typename S>
Tensor<S> global_avg_pool(const Tensor<S>& x) {
  require_rank("global_avg_pool", x.shape(), 3);
  const Index batch = x.dim(0), ch = x.dim(1), t = x.dim(2);
  if (t < 1) throw ShapeError("global_avg_pool: empty time axis");
  const Eigen::Map<const RowMat<S>> xm(x.ptr(), batch * ch, t);
  Array<S> y = xm.rowwise().mean().array();
  return make_result<S>("global_avg_pool", Shape{batch, ch}, std::move(y), {x},
                        [=](detail::Node<S>& self) {
                          Eigen::Map<RowMat<S>> gx(self.inputs[0]->grad_buffer().data(), batch * ch, t);
                          const Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>> g(self.grad.data(), batch * ch);
                          gx.colwise() += g / static_cast<S>(t);
                        });
}

template <typename S>
Tensor<S> channel_mean(const Tensor<S>& x) {
  require_rank("channel_mean", x.shape(), 3);
  const Index batch = x.dim(0), ch = x.dim(1), t = x.dim(2);
  Array<S> y = Array<S>::Zero(batch * t);
  for (Index b = 0; b < batch; ++b) {
    for (Index c = 0; c < ch; ++c) y.segment(b * t, t) += x.data().segment((b * ch + c) * t, t);
  }
  y /= static_cast<S>(ch);
  return make_result<S>("channel_mean", Shape{batch, t}, std::move(y), {x},
                        [=](detail::Node<S>& self) {
                          auto& gx = self.inputs[0]->grad_buffer();
                          for (Index b = 0; b < batch; ++b) {
                            for (Index c = 0; c < ch; ++c) {
                              gx.segment((b * ch + c) * t, t) += self.grad.segment(b * t, t) / static_cast<S>(ch);
                            }
                          }
                        });
}

template <typename S>
Tensor<S> scale_channels(const Tensor<S>& x, const Tensor<S>& s) {
  require_rank("scale_channels input", x.shape(), 3);
  require_rank("scale_channels scale", s.shape(), 2);
  const Index batch = x.dim(0), ch = x.dim(1), t = x.dim(2);
  if (s.dim(0) != batch || s.dim(1) != ch) shape_error("scale_channels", x.shape(), s.shape());
  Array<S> y(x.size());
  for (Index r = 0; r < batch * ch; ++r) y.segment(r * t, t) = x.data().segment(r * t, t) * s.data()[r];
  return make_result<S>("scale_channels", x.shape(), std::move(y), {x, s},
                        [=](detail::Node<S>& self) {
                          auto& xn = *self.inputs[0];
                          auto& sn = *self.inputs[1];
                          for (Index r = 0; r < batch * ch; ++r) {
                            const auto g = self.grad.segment(r * t, t);
                            if (xn.requires_grad) xn.grad_buffer().segment(r * t, t) += g * sn.value[r];
                            if (sn.requires_grad) sn.grad_buffer()[r] += (g * xn.value.segment(r * t, t)).sum();
                          }
                        });
}

template <typename S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.shape() != b.shape()) shape_error("add", a.shape(), b.shape());
  return make_result<S>("add", a.shape(), a.data() + b.data(), {a, b}, [](detail::Node<S>& self) {
    for (auto& in : self.inputs) {
      if (in->requires_grad) in->grad_buffer() += self.grad;
    }
  });
}

template <typename S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.shape() != b.shape()) shape_error("mul", a.shape(), b.shape());
  return make_result<S>("mul", a.shape(), a.data() * b.data(), {a, b}, [](detail::Node<S>& self) {
    auto& an = *self.inputs[0];
    auto& bn = *self.inputs[1];
    if (an.requires_grad) an.grad_buffer() += self.grad * bn.value;
    if (bn.requires_grad) bn.grad_buffer() += self.grad * an.value;
  });
}

template <typename S>
Tensor<S> scale(const Tensor<S>& x, S factor) {
  return make_result<S>("scale", x.shape(), x.data() * factor, {x},
                        [factor](detail::Node<S>& self) {
                          self.inputs[0]->grad_buffer() += self.grad * factor;
                        });
}

template <typename S>
Tensor<S> sum(const Tensor<S>& x) {
  Array<S> y(1);
  y[0] = x.data().sum();
  return make_result<S>("sum", Shape{1}, std::move(y), {x}, [](detail::Node<S>& self) {
    self.inputs[0]->grad_buffer() += self.grad[0];
  });
}

template <typename S>
Tensor<S> softmax_cce(const Tensor<S>& logits, const Tensor<S>& target) {
  require_rank("softmax_cce logits", logits.shape(), 2);
  if (logits.shape() != target.shape()) shape_error("softmax_cce", logits.shape(), target.shape());
  if (!logits.data().isFinite().all()) throw DomainError("softmax_cce: non-finite logits");
  const Index batch = logits.dim(0), k = logits.dim(1);
  const Eigen::Map<const RowMat<S>> z(logits.ptr(), batch, k);
  const Eigen::Map<const RowMat<S>> y(target.ptr(), batch, k);

  RowMat<S> probs(batch, k);
  double loss = 0.0;
  for (Index b = 0; b < batch; ++b) {
    const S m = z.row(b).maxCoeff();
    const auto shifted = (z.row(b).array() - m).eval();
    const S lse = std::log(shifted.exp().sum());
    const auto logp = (shifted - lse).eval();
    probs.row(b) = logp.exp().matrix();
    loss -= (y.row(b).array() * logp).sum();
  }
  Array<S> out(1);
  out[0] = static_cast<S>(loss / batch);

  return make_result<S>("softmax_cce", Shape{1}, std::move(out), {logits, target},
                        [=, probs = std::move(probs)](detail::Node<S>& self) {
                          auto& zn = *self.inputs[0];
                          auto& yn = *self.inputs[1];
                          const Eigen::Map<const RowMat<S>> yv(yn.value.data(), batch, k);
                          const S g = self.grad[0] / static_cast<S>(batch);
                          if (zn.requires_grad) {
                            Eigen::Map<RowMat<S>> gz(zn.grad_buffer().data(), batch, k);
                            const Eigen::Matrix<S, Eigen::Dynamic, 1> row_mass = yv.rowwise().sum();
                            for (Index b = 0; b < batch; ++b) {
                              gz.row(b) += g * (probs.row(b) * row_mass(b) - yv.row(b));
                            }
                          }
                          if (yn.requires_grad) {
                            // d/dy of -sum y log p
                            Eigen::Map<RowMat<S>> gy(yn.grad_buffer().data(), batch, k);
                            gy.array() -= g * probs.array().log();
                          }
                        });
}

template <typename S>
Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> softmax(const Tensor<S>& logits) {
  require_rank("softmax", logits.shape(), 2);
  const Eigen::Map<const RowMat<S>> z(logits.ptr(), logits.dim(0), logits.dim(1));
  RowMat<S> p(z.rows(), z.cols());
  for (Index b = 0; b < z.rows(); ++b) {
    const auto e = (z.row(b).array() - z.row(b).maxCoeff()).exp().eval();
    p.row(b) = (e / e.sum()).matrix();
  }
  return p;
}

#define DRONEFAULT_INSTANTIATE(S)                                                               \
  template Tensor<S> conv1d<S>(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&, Index,    \
                               Index);                                                          \
  template Tensor<S> linear<S>(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&);           \
  template Tensor<S> batchnorm1d<S>(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&,       \
                                    BatchNormStats<S>&, NormMode, double, double, bool);        \
  template Tensor<S> pool1d<S>(const Tensor<S>&, PoolKind, Index, Index, bool);                 \
  template Tensor<S> elementwise<S>(const Tensor<S>&, Activation);                              \
  template Tensor<S> global_avg_pool<S>(const Tensor<S>&);                                      \
  template Tensor<S> channel_mean<S>(const Tensor<S>&);                                         \
  template Tensor<S> scale_channels<S>(const Tensor<S>&, const Tensor<S>&);                     \
  template Tensor<S> add<S>(const Tensor<S>&, const Tensor<S>&);                                \
  template Tensor<S> mul<S>(const Tensor<S>&, const Tensor<S>&);                                \
  template Tensor<S> scale<S>(const Tensor<S>&, S);                                             \
  template Tensor<S> sum<S>(const Tensor<S>&);                                                  \
  template Tensor<S> softmax_cce<S>(const Tensor<S>&, const Tensor<S>&);                        \
  template Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> softmax<S>(        \
      const Tensor<S>&);

DRONEFAULT_INSTANTIATE(float)
DRONEFAULT_INSTANTIATE(double)
#undef DRONEFAULT_INSTANTIATE

}  // namespace dronefault::ad
