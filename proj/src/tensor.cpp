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

#include "dronefault/tensor.hpp"

#include <unordered_set>

#include "dronefault/errors.hpp"

namespace dronefault::ad {
namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

Index numel(const Shape& shape) {
  Index n = 1;
  for (Index d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

template <typename Scalar>
Tensor<Scalar>::Tensor(Shape shape, bool requires_grad)
    : node_(std::make_shared<detail::Node<Scalar>>()) {
  for (Index d : shape) {
    if (d < 0) throw ShapeError("negative dimension in shape " + ad::to_string(shape));
  }
  node_->value.setZero(numel(shape));
  node_->shape = std::move(shape);
  node_->requires_grad = requires_grad;
}

template <typename Scalar>
Tensor<Scalar>::Tensor(Shape shape, Array<Scalar> values, bool requires_grad)
    : node_(std::make_shared<detail::Node<Scalar>>()) {
  if (numel(shape) != values.size()) {
    throw ShapeError("shape " + ad::to_string(shape) + " does not match " +
                     std::to_string(values.size()) + " values");
  }
  node_->shape = std::move(shape);
  node_->value = std::move(values);
  node_->requires_grad = requires_grad;
}

template <typename Scalar>
Scalar Tensor<Scalar>::item() const {
  if (size() != 1) throw ContractError("item() on tensor of shape " + ad::to_string(shape()));
  return node_->value[0];
}

template <typename Scalar>
Tensor<Scalar> Tensor<Scalar>::detach() const {
  return Tensor(shape(), data(), false);
}

template <typename Scalar>
Tensor<Scalar> Tensor<Scalar>::clone() const {
  Tensor t(shape(), data(), requires_grad());
  if (has_grad()) t.node_->grad = node_->grad;
  return t;
}

template <typename Scalar>
Tensor<Scalar> Tensor<Scalar>::reshape(Shape new_shape) const {
  if (numel(new_shape) != size()) {
    throw ShapeError("cannot reshape " + ad::to_string(shape()) + " to " +
                     ad::to_string(new_shape));
  }
  return make_result<Scalar>("reshape", std::move(new_shape), data(), {*this},
                             [](detail::Node<Scalar>& self) {
                               self.inputs[0]->grad_buffer() += self.grad;
                             });
}

template <typename Scalar>
Tensor<Scalar> make_result(const char* op, Shape shape, Array<Scalar> value,
                           std::vector<Tensor<Scalar>> inputs,
                           std::function<void(detail::Node<Scalar>&)> backward) {
  Tensor<Scalar> out(std::move(shape), std::move(value), false);
  if (!grad_enabled()) return out;
  bool needs = false;
  for (const auto& in : inputs) needs = needs || in.requires_grad();
  if (!needs) return out;
  auto& node = *out.node();
  node.requires_grad = true;
  node.op = op;
  node.backward = std::move(backward);
  node.inputs.reserve(inputs.size());
  for (auto& in : inputs) node.inputs.push_back(in.node());
  return out;
}

template <typename Scalar>
std::vector<detail::Node<Scalar>*> record_order(const Tensor<Scalar>& root) {
  using NodeT = detail::Node<Scalar>;
  std::vector<NodeT*> post;
  std::unordered_set<NodeT*> seen;
  // Iterative DFS; a frame is (node, next input to visit).
  std::vector<std::pair<NodeT*, std::size_t>> stack;
  if (root.requires_grad()) {
    stack.emplace_back(root.node().get(), 0);
    seen.insert(root.node().get());
  }
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      NodeT* child = node->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      post.push_back(node);
      stack.pop_back();
    }
  }
  return {post.rbegin(), post.rend()};
}

template <typename Scalar>
void backward(const Tensor<Scalar>& loss) {
  if (loss.size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " + ad::to_string(loss.shape()));
  }
  if (!loss.requires_grad()) throw ContractError("backward() on a tensor with no recorded history");
  auto order = record_order(loss);
  loss.node()->grad_buffer().setOnes();
  for (auto* node : order) {
    if (node->backward && node->grad.size() == node->value.size()) node->backward(*node);
  }
}

template class Tensor<float>;
template class Tensor<double>;

#define DRONEFAULT_INSTANTIATE(S)                                                              \
  template Tensor<S> make_result<S>(const char*, Shape, Array<S>, std::vector<Tensor<S>>,     \
                                    std::function<void(detail::Node<S>&)>);                    \
  template std::vector<detail::Node<S>*> record_order<S>(const Tensor<S>&);                    \
  template void backward<S>(const Tensor<S>&);

DRONEFAULT_INSTANTIATE(float)
DRONEFAULT_INSTANTIATE(double)
#undef DRONEFAULT_INSTANTIATE

}  // namespace dronefault::ad
