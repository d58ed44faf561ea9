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

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace dronefault::ad {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

template <typename Scalar>
using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

Index numel(const Shape& shape);
std::string to_string(const Shape& shape);

namespace detail {

template <typename Scalar>
struct Node {
  Shape shape;
  Array<Scalar> value;
  Array<Scalar> grad;  // empty until first accumulation
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into the inputs' grads.
  std::function<void(Node&)> backward;

  Array<Scalar>& grad_buffer() {
    if (grad.size() != value.size()) grad.setZero(value.size());
    return grad;
  }
};

}  // namespace detail

/// Dense row-major tensor with an optional gradient. Copies share storage;
/// use clone() for a deep copy.
template <typename Scalar>
class Tensor {
 public:
  using NodePtr = std::shared_ptr<detail::Node<Scalar>>;

  Tensor() = default;
  explicit Tensor(Shape shape, bool requires_grad = false);
  Tensor(Shape shape, Array<Scalar> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    return Tensor(std::move(shape), requires_grad);
  }
  static Tensor scalar(Scalar v, bool requires_grad = false) {
    Array<Scalar> a(1);
    a[0] = v;
    return Tensor(Shape{1}, std::move(a), requires_grad);
  }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  Index dim(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t rank() const { return node_->shape.size(); }
  Index size() const { return node_->value.size(); }

  Array<Scalar>& data() { return node_->value; }
  const Array<Scalar>& data() const { return node_->value; }
  Scalar* ptr() { return node_->value.data(); }
  const Scalar* ptr() const { return node_->value.data(); }
  Scalar item() const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  bool has_grad() const { return node_->grad.size() == node_->value.size(); }
  Array<Scalar>& grad() { return node_->grad_buffer(); }
  const Array<Scalar>& grad() const { return node_->grad; }
  void zero_grad() { node_->grad.resize(0); }

  const char* op() const { return node_->op; }

  /// Same values, new leaf without history.
  Tensor detach() const;
  Tensor clone() const;
  /// Copy with a new shape of equal element count; gradient flows through.
  Tensor reshape(Shape shape) const;

  const NodePtr& node() const { return node_; }
  static Tensor from_node(NodePtr node) {
    Tensor t;
    t.node_ = std::move(node);
    return t;
  }

 private:
  NodePtr node_;
};

/// While alive on this thread, operations record no history.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

/// Creates the output of a primitive. The result requires a gradient iff
/// recording is on and any input does; only then are inputs and `backward`
/// retained.
template <typename Scalar>
Tensor<Scalar> make_result(const char* op, Shape shape, Array<Scalar> value,
                           std::vector<Tensor<Scalar>> inputs,
                           std::function<void(detail::Node<Scalar>&)> backward);

/// Reverse-topological order of the recorded graph ending at `root`: each
/// node appears once, after every node that consumes it.
template <typename Scalar>
std::vector<detail::Node<Scalar>*> record_order(const Tensor<Scalar>& root);

/// Seeds d(loss)/d(loss) = 1 and sweeps the graph once in reverse order.
/// Gradients accumulate, so zero parameter grads between steps.
template <typename Scalar>
void backward(const Tensor<Scalar>& loss);

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace dronefault::ad
