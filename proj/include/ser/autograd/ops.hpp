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
#include <vector>

#include "ser/autograd/tensor.hpp"

namespace ser::ag {

enum class Mode { train, eval };

// Per-channel running statistics owned by the caller (the model).
template <typename T>
struct BatchNormState {
  std::vector<T> running_mean;
  std::vector<T> running_var;
  double momentum = 0.1;
  double eps = 1e-5;

  BatchNormState() = default;
  explicit BatchNormState(std::size_t channels) : running_mean(channels, T(0)), running_var(channels, T(1)) {}
};

// Cross-correlation: out[n,o,i,j] = bias[o] + sum_{c,u,v} in[n,c,i*s+u-p,j*s+v-p] * w[o,c,u,v],
// zero outside the input. `bias` may be an undefined tensor.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias, int stride, int padding);

// Length-preserving 1-D cross-correlation over the last axis of [N,1,C]
// with an odd [1,1,k] kernel, zero padding (k-1)/2 and no bias.
template <typename T>
Tensor<T> conv1d(const Tensor<T>& input, const Tensor<T>& weight);

// Training mode normalizes with biased batch statistics over (N,H,W) and
// folds them into `state` (running variance uses the unbiased estimate).
// Eval mode reads `state` and leaves it untouched.
template <typename T>
Tensor<T> batchnorm2d(const Tensor<T>& input, const Tensor<T>& gamma, const Tensor<T>& beta, BatchNormState<T>& state,
                      Mode mode);

enum class Activation { relu, sigmoid, softmax_lastdim };

template <typename T>
Tensor<T> activation(const Tensor<T>& input, Activation kind);
template <typename T>
Tensor<T> relu(const Tensor<T>& input);
template <typename T>
Tensor<T> sigmoid(const Tensor<T>& input);
template <typename T>
Tensor<T> softmax_lastdim(const Tensor<T>& input);

// Non-overlapping mean pooling on [N,C,H,W]; trailing rows/columns that do
// not fill a window are dropped.
template <typename T>
Tensor<T> avgpool2d(const Tensor<T>& input, int kernel = 2, int stride = 2);

// [N,C,H,W] -> [N,C]
template <typename T>
Tensor<T> global_avgpool(const Tensor<T>& input);

// [N,D] x [O,D]^T + [O] -> [N,O]
template <typename T>
Tensor<T> linear(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias);

// out[n,c,h,w] = x[n,c,h,w] * scale[n,c]
template <typename T>
Tensor<T> scale_channels(const Tensor<T>& input, const Tensor<T>& scale);

template <typename T>
Tensor<T> reshape(const Tensor<T>& input, Shape shape);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor);
template <typename T>
Tensor<T> sum(const Tensor<T>& a);
template <typename T>
Tensor<T> mean(const Tensor<T>& a);

}  // namespace ser::ag
