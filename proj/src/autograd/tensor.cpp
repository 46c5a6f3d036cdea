// Copyright 2026 The ser-forge Authors.
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

#include "ser/autograd/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>

#include "ser/errors.hpp"

namespace ser::ag {

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  std::vector<T> values(ag::numel(shape), value);
  return from(std::move(shape), std::move(values), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::from(Shape shape, std::vector<T> values, bool requires_grad) {
  for (std::size_t d : shape) {
    if (d == 0) throw InvalidShape("tensor dimensions must be positive, got " + to_string(shape));
  }
  if (values.size() != ag::numel(shape)) {
    throw InvalidShape("value count " + std::to_string(values.size()) + " does not match shape " + to_string(shape));
  }
  auto impl = std::make_shared<TensorImpl<T>>();
  impl->shape = std::move(shape);
  impl->values = std::move(values);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) throw InvalidShape("item() on tensor of shape " + to_string(shape()));
  return impl_->values[0];
}

template <typename T>
std::span<T> Tensor<T>::grad() const {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->values.size(), T(0));
  return impl_->grad;
}

template <typename T>
void Tensor<T>::zero_grad() const {
  if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), T(0));
}

template <typename T>
void Tensor<T>::accumulate_grad(std::span<const T> delta) const {
  if (delta.size() != impl_->values.size()) {
    throw InternalError("gradient size mismatch for tensor " + to_string(shape()));
  }
  auto g = grad();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += delta[i];
}

template <typename T>
Tensor<T> Tensor<T>::make_result(Shape shape, std::vector<T> values, std::vector<Tensor> inputs, std::string op,
                                 BackwardFn<T> backward_fn) {
  Tensor out = from(std::move(shape), std::move(values), false);
  if (!grad_enabled()) return out;
  bool needs = false;
  for (const auto& in : inputs) needs = needs || in.requires_grad();
  if (!needs) return out;
  auto node = std::make_shared<Node<T>>();
  node->op = std::move(op);
  node->inputs = std::move(inputs);
  node->backward = std::move(backward_fn);
  out.impl_->requires_grad = true;
  out.impl_->producer = std::move(node);
  return out;
}

template <typename T>
void Tensor<T>::backward() const {
  if (numel() != 1) throw InvalidShape("backward() needs a scalar, got shape " + to_string(shape()));
  if (!requires_grad()) throw InvalidInput("backward() on a tensor that does not require grad");

  // Iterative DFS producing a post-order (inputs before consumers).
  enum class Mark { visiting, done };
  std::unordered_map<const TensorImpl<T>*, Mark> marks;
  std::vector<TensorImpl<T>*> order;
  struct Frame {
    TensorImpl<T>* impl;
    std::size_t next_input;
  };
  std::vector<Frame> stack{{impl_.get(), 0}};
  marks[impl_.get()] = Mark::visiting;
  while (!stack.empty()) {
    Frame& top = stack.back();
    const Node<T>* node = top.impl->producer.get();
    if (node != nullptr && top.next_input < node->inputs.size()) {
      TensorImpl<T>* child = node->inputs[top.next_input++].impl_.get();
      if (!child->requires_grad) continue;
      auto it = marks.find(child);
      if (it == marks.end()) {
        marks.emplace(child, Mark::visiting);
        stack.push_back({child, 0});
      } else if (it->second == Mark::visiting) {
        throw InternalError("cycle detected in computation record at op '" + node->op + "'");
      }
      continue;
    }
    marks[top.impl] = Mark::done;
    order.push_back(top.impl);
    stack.pop_back();
  }

  for (TensorImpl<T>* t : order) {
    if (t->producer) {
      t->grad.assign(t->values.size(), T(0));
    } else if (t->grad.empty()) {
      t->grad.assign(t->values.size(), T(0));
    }
  }
  impl_->grad[0] += T(1);

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorImpl<T>* t = *it;
    if (!t->producer) continue;
    t->producer->backward(t->grad, t->values);
    // Intermediate gradients are released once their node has run.
    if (t != impl_.get()) {
      t->grad.clear();
      t->grad.shrink_to_fit();
    }
  }
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace ser::ag
