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

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ser::ag {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

template <typename T>
class Tensor;

// Pushes the output gradient back into the op's inputs. The output values
// are handed in rather than captured so a node never owns its own output.
template <typename T>
using BackwardFn = std::function<void(std::span<const T> grad_out, std::span<const T> out_values)>;

// One recorded operation: the inputs it read and its backward rule.
template <typename T>
struct Node {
  std::string op;
  std::vector<Tensor<T>> inputs;
  BackwardFn<T> backward;
};

template <typename T>
struct TensorImpl {
  Shape shape;
  std::vector<T> values;
  std::vector<T> grad;  // empty until first accumulation
  bool requires_grad = false;
  std::shared_ptr<Node<T>> producer;
};

// Thread-local switch; while disabled, ops record nothing.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Shared handle to a row-major array that can take part in reverse-mode
// differentiation. Copies alias the same storage.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<T> values, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  std::size_t dim(std::size_t axis) const { return impl_->shape.at(axis); }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t numel() const { return impl_->values.size(); }

  std::span<T> values() { return impl_->values; }
  std::span<const T> values() const { return impl_->values; }
  T item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool flag) { impl_->requires_grad = flag; }
  bool is_leaf() const { return impl_->producer == nullptr; }
  const Node<T>* producer() const { return impl_->producer.get(); }

  // Gradient storage belongs to the shared tensor, not to this handle, so it
  // is writable through const handles (backward rules hold const copies).
  bool has_grad() const { return !impl_->grad.empty(); }
  // Allocates a zero gradient on first use.
  std::span<T> grad() const;
  void zero_grad() const;

  // Adds `delta` into the gradient buffer (allocating it if needed).
  void accumulate_grad(std::span<const T> delta) const;

  // Reverse pass from a scalar. Every requires-grad tensor reachable from
  // this one ends with an allocated gradient (zero if it did not contribute).
  void backward() const;

  // Result of an op: records `node` when gradients are enabled and at least
  // one input requires them.
  static Tensor make_result(Shape shape, std::vector<T> values, std::vector<Tensor> inputs, std::string op,
                            BackwardFn<T> backward_fn);

  const TensorImpl<T>* impl() const { return impl_.get(); }

 private:
  explicit Tensor(std::shared_ptr<TensorImpl<T>> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<TensorImpl<T>> impl_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace ser::ag
