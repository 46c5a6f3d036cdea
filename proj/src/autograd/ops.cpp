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

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "ser/autograd/ops.hpp"
#include "ser/errors.hpp"

namespace ser::ag {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

void require_rank(const Shape& shape, std::size_t rank, const char* op) {
  if (shape.size() != rank) {
    throw InvalidShape(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " + to_string(shape));
  }
}

void require_same(const Shape& a, const Shape& b, const char* op) {
  if (a != b) throw InvalidShape(std::string(op) + ": shape mismatch " + to_string(a) + " vs " + to_string(b));
}

template <typename T>
T stable_sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

}  // namespace

template <typename T>
Tensor<T> relu(const Tensor<T>& input) {
  std::vector<T> out(input.numel());
  auto x = input.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] > T(0) ? x[i] : T(0);
  return Tensor<T>::make_result(input.shape(), std::move(out), {input}, "relu",
                                [input](std::span<const T> g, std::span<const T> y) {
                                  if (!input.requires_grad()) return;
                                  auto gi = input.grad();
                                  for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += y[i] > T(0) ? g[i] : T(0);
                                });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& input) {
  std::vector<T> out(input.numel());
  auto x = input.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = stable_sigmoid(x[i]);
  return Tensor<T>::make_result(input.shape(), std::move(out), {input}, "sigmoid",
                                [input](std::span<const T> g, std::span<const T> y) {
                                  if (!input.requires_grad()) return;
                                  auto gi = input.grad();
                                  for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += g[i] * y[i] * (T(1) - y[i]);
                                });
}

template <typename T>
Tensor<T> softmax_lastdim(const Tensor<T>& input) {
  if (input.rank() == 0) throw InvalidShape("softmax on a rank-0 tensor");
  const std::size_t width = input.shape().back();
  const std::size_t rows = input.numel() / width;
  std::vector<T> out(input.numel());
  auto x = input.values();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.data() + r * width;
    T* yr = out.data() + r * width;
    const T peak = *std::max_element(xr, xr + width);
    double total = 0.0;
    for (std::size_t k = 0; k < width; ++k) {
      yr[k] = std::exp(xr[k] - peak);
      total += yr[k];
    }
    for (std::size_t k = 0; k < width; ++k) yr[k] = static_cast<T>(yr[k] / total);
  }
  return Tensor<T>::make_result(input.shape(), std::move(out), {input}, "softmax",
                                [input, rows, width](std::span<const T> g, std::span<const T> y) {
                                  if (!input.requires_grad()) return;
                                  auto gi = input.grad();
                                  for (std::size_t r = 0; r < rows; ++r) {
                                    const std::size_t base = r * width;
                                    double dot = 0.0;
                                    for (std::size_t k = 0; k < width; ++k) dot += g[base + k] * y[base + k];
                                    for (std::size_t k = 0; k < width; ++k) {
                                      gi[base + k] += static_cast<T>(y[base + k] * (g[base + k] - dot));
                                    }
                                  }
                                });
}

template <typename T>
Tensor<T> activation(const Tensor<T>& input, Activation kind) {
  switch (kind) {
    case Activation::relu:
      return relu(input);
    case Activation::sigmoid:
      return sigmoid(input);
    case Activation::softmax_lastdim:
      return softmax_lastdim(input);
  }
  throw InvalidConfig("unknown activation");
}

template <typename T>
Tensor<T> avgpool2d(const Tensor<T>& input, int kernel, int stride) {
  require_rank(input.shape(), 4, "avgpool2d");
  if (kernel < 1 || stride < 1) throw InvalidConfig("avgpool2d: kernel and stride must be positive");
  const std::size_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  const auto k = static_cast<std::size_t>(kernel);
  const auto s = static_cast<std::size_t>(stride);
  if (h < k || w < k) {
    throw InvalidShape("avgpool2d: input " + to_string(input.shape()) + " smaller than kernel " + std::to_string(k));
  }
  const std::size_t ho = (h - k) / s + 1, wo = (w - k) / s + 1;
  const T inv = T(1) / static_cast<T>(k * k);
  std::vector<T> out(n * c * ho * wo);
  auto x = input.values();
  for (std::size_t plane = 0; plane < n * c; ++plane) {
    const T* xp = x.data() + plane * h * w;
    T* yp = out.data() + plane * ho * wo;
    for (std::size_t i = 0; i < ho; ++i) {
      for (std::size_t j = 0; j < wo; ++j) {
        T acc = 0;
        for (std::size_t u = 0; u < k; ++u) {
          for (std::size_t v = 0; v < k; ++v) acc += xp[(i * s + u) * w + j * s + v];
        }
        yp[i * wo + j] = acc * inv;
      }
    }
  }
  return Tensor<T>::make_result(
      {n, c, ho, wo}, std::move(out), {input}, "avgpool2d",
      [input, n, c, h, w, ho, wo, k, s, inv](std::span<const T> g, std::span<const T>) {
        if (!input.requires_grad()) return;
        auto gi = input.grad();
        for (std::size_t plane = 0; plane < n * c; ++plane) {
          T* gp = gi.data() + plane * h * w;
          const T* go = g.data() + plane * ho * wo;
          for (std::size_t i = 0; i < ho; ++i) {
            for (std::size_t j = 0; j < wo; ++j) {
              const T share = go[i * wo + j] * inv;
              for (std::size_t u = 0; u < k; ++u) {
                for (std::size_t v = 0; v < k; ++v) gp[(i * s + u) * w + j * s + v] += share;
              }
            }
          }
        }
      });
}

template <typename T>
Tensor<T> global_avgpool(const Tensor<T>& input) {
  require_rank(input.shape(), 4, "global_avgpool");
  const std::size_t n = input.dim(0), c = input.dim(1), hw = input.dim(2) * input.dim(3);
  std::vector<T> out(n * c);
  auto x = input.values();
  for (std::size_t plane = 0; plane < n * c; ++plane) {
    double acc = 0.0;
    const T* xp = x.data() + plane * hw;
    for (std::size_t i = 0; i < hw; ++i) acc += xp[i];
    out[plane] = static_cast<T>(acc / static_cast<double>(hw));
  }
  return Tensor<T>::make_result({n, c}, std::move(out), {input}, "global_avgpool",
                                [input, n, c, hw](std::span<const T> g, std::span<const T>) {
                                  if (!input.requires_grad()) return;
                                  auto gi = input.grad();
                                  const T inv = T(1) / static_cast<T>(hw);
                                  for (std::size_t plane = 0; plane < n * c; ++plane) {
                                    const T share = g[plane] * inv;
                                    T* gp = gi.data() + plane * hw;
                                    for (std::size_t i = 0; i < hw; ++i) gp[i] += share;
                                  }
                                });
}

template <typename T>
Tensor<T> linear(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias) {
  require_rank(input.shape(), 2, "linear input");
  require_rank(weight.shape(), 2, "linear weight");
  const std::size_t n = input.dim(0), d = input.dim(1), o = weight.dim(0);
  if (weight.dim(1) != d) {
    throw InvalidShape("linear: input " + to_string(input.shape()) + " incompatible with weight " +
                       to_string(weight.shape()));
  }
  if (bias.defined() && bias.shape() != Shape{o}) {
    throw InvalidShape("linear: bias shape " + to_string(bias.shape()) + " for " + std::to_string(o) + " outputs");
  }
  std::vector<T> out(n * o);
  MatMap<T> y(out.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(o));
  ConstMatMap<T> x(input.values().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  ConstMatMap<T> wm(weight.values().data(), static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(d));
  y.noalias() = x * wm.transpose();
  if (bias.defined()) {
    auto b = bias.values();
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t k = 0; k < o; ++k) out[r * o + k] += b[k];
    }
  }
  std::vector<Tensor<T>> inputs{input, weight};
  if (bias.defined()) inputs.push_back(bias);
  return Tensor<T>::make_result(
      {n, o}, std::move(out), std::move(inputs), "linear",
      [input, weight, bias, n, d, o](std::span<const T> g, std::span<const T>) {
        ConstMatMap<T> gy(g.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(o));
        if (input.requires_grad()) {
          MatMap<T> gx(input.grad().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
          ConstMatMap<T> wm(weight.values().data(), static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(d));
          gx.noalias() += gy * wm;
        }
        if (weight.requires_grad()) {
          MatMap<T> gw(weight.grad().data(), static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(d));
          ConstMatMap<T> x(input.values().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
          gw.noalias() += gy.transpose() * x;
        }
        if (bias.defined() && bias.requires_grad()) {
          auto gb = bias.grad();
          for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t k = 0; k < o; ++k) gb[k] += g[r * o + k];
          }
        }
      });
}

template <typename T>
Tensor<T> scale_channels(const Tensor<T>& input, const Tensor<T>& scale) {
  require_rank(input.shape(), 4, "scale_channels");
  const std::size_t n = input.dim(0), c = input.dim(1), hw = input.dim(2) * input.dim(3);
  if (scale.shape() != Shape{n, c}) {
    throw InvalidShape("scale_channels: scale " + to_string(scale.shape()) + " does not match input " +
                       to_string(input.shape()));
  }
  std::vector<T> out(input.numel());
  auto x = input.values();
  auto sv = scale.values();
  for (std::size_t plane = 0; plane < n * c; ++plane) {
    for (std::size_t i = 0; i < hw; ++i) out[plane * hw + i] = x[plane * hw + i] * sv[plane];
  }
  return Tensor<T>::make_result(input.shape(), std::move(out), {input, scale}, "scale_channels",
                                [input, scale, n, c, hw](std::span<const T> g, std::span<const T>) {
                                  auto x = input.values();
                                  auto sv = scale.values();
                                  if (input.requires_grad()) {
                                    auto gi = input.grad();
                                    for (std::size_t plane = 0; plane < n * c; ++plane) {
                                      for (std::size_t i = 0; i < hw; ++i) gi[plane * hw + i] += g[plane * hw + i] * sv[plane];
                                    }
                                  }
                                  if (scale.requires_grad()) {
                                    auto gs = scale.grad();
                                    for (std::size_t plane = 0; plane < n * c; ++plane) {
                                      double acc = 0.0;
                                      for (std::size_t i = 0; i < hw; ++i) acc += g[plane * hw + i] * x[plane * hw + i];
                                      gs[plane] += static_cast<T>(acc);
                                    }
                                  }
                                });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& input, Shape shape) {
  if (numel(shape) != input.numel()) {
    throw InvalidShape("reshape: cannot view " + to_string(input.shape()) + " as " + to_string(shape));
  }
  std::vector<T> out(input.values().begin(), input.values().end());
  return Tensor<T>::make_result(std::move(shape), std::move(out), {input}, "reshape",
                                [input](std::span<const T> g, std::span<const T>) {
                                  if (input.requires_grad()) input.accumulate_grad(g);
                                });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same(a.shape(), b.shape(), "add");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
  return Tensor<T>::make_result(a.shape(), std::move(out), {a, b}, "add",
                                [a, b](std::span<const T> g, std::span<const T>) {
                                  if (a.requires_grad()) a.accumulate_grad(g);
                                  if (b.requires_grad()) b.accumulate_grad(g);
                                });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same(a.shape(), b.shape(), "mul");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
  return Tensor<T>::make_result(a.shape(), std::move(out), {a, b}, "mul",
                                [a, b](std::span<const T> g, std::span<const T>) {
                                  if (a.requires_grad()) {
                                    auto ga = a.grad();
                                    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * b.values()[i];
                                  }
                                  if (b.requires_grad()) {
                                    auto gb = b.grad();
                                    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[i] * a.values()[i];
                                  }
                                });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * factor;
  return Tensor<T>::make_result(a.shape(), std::move(out), {a}, "scale",
                                [a, factor](std::span<const T> g, std::span<const T>) {
                                  if (!a.requires_grad()) return;
                                  auto ga = a.grad();
                                  for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * factor;
                                });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  double acc = 0.0;
  for (T v : a.values()) acc += v;
  return Tensor<T>::make_result({1}, {static_cast<T>(acc)}, {a}, "sum",
                                [a](std::span<const T> g, std::span<const T>) {
                                  if (!a.requires_grad()) return;
                                  for (T& v : a.grad()) v += g[0];
                                });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
  return scale(sum(a), T(1) / static_cast<T>(a.numel()));
}

#define SER_INSTANTIATE_OPS(T)                                                      \
  template Tensor<T> relu<T>(const Tensor<T>&);                                     \
  template Tensor<T> sigmoid<T>(const Tensor<T>&);                                  \
  template Tensor<T> softmax_lastdim<T>(const Tensor<T>&);                          \
  template Tensor<T> activation<T>(const Tensor<T>&, Activation);                   \
  template Tensor<T> avgpool2d<T>(const Tensor<T>&, int, int);                      \
  template Tensor<T> global_avgpool<T>(const Tensor<T>&);                           \
  template Tensor<T> linear<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&); \
  template Tensor<T> scale_channels<T>(const Tensor<T>&, const Tensor<T>&);         \
  template Tensor<T> reshape<T>(const Tensor<T>&, Shape);                           \
  template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);                    \
  template Tensor<T> mul<T>(const Tensor<T>&, const Tensor<T>&);                    \
  template Tensor<T> scale<T>(const Tensor<T>&, T);                                 \
  template Tensor<T> sum<T>(const Tensor<T>&);                                      \
  template Tensor<T> mean<T>(const Tensor<T>&);

SER_INSTANTIATE_OPS(float)
SER_INSTANTIATE_OPS(double)

#undef SER_INSTANTIATE_OPS

}  // namespace ser::ag
