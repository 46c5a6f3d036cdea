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

struct ConvGeometry {
  std::size_t channels, height, width;
  std::size_t kernel, out_h, out_w;
  long stride, pad;

  std::size_t col_rows() const { return channels * kernel * kernel; }
  std::size_t col_cols() const { return out_h * out_w; }
};

// col[(c*K + u)*K + v][i*Wo + j] = img[c][i*s + u - p][j*s + v - p]
// Output columns j whose input column j * stride + v - pad lies inside [0, w).
inline void valid_columns(const ConvGeometry& g, std::size_t v, std::size_t& lo, std::size_t& hi) {
  const long w = static_cast<long>(g.width);
  const long off = static_cast<long>(v) - g.pad;
  long first = off >= 0 ? 0 : (-off + g.stride - 1) / g.stride;
  long last = (w - 1 - off) < 0 ? -1 : (w - 1 - off) / g.stride;
  first = std::min<long>(first, static_cast<long>(g.out_w));
  last = std::min<long>(last, static_cast<long>(g.out_w) - 1);
  lo = static_cast<std::size_t>(first);
  hi = last < first ? lo : static_cast<std::size_t>(last + 1);
}

template <typename T>
void im2col(const T* img, const ConvGeometry& g, T* col) {
  const auto h = static_cast<long>(g.height);
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t u = 0; u < g.kernel; ++u) {
      for (std::size_t v = 0; v < g.kernel; ++v) {
        std::size_t lo = 0, hi = 0;
        valid_columns(g, v, lo, hi);
        const long off = static_cast<long>(v) - g.pad;
        T* row = col + ((c * g.kernel + u) * g.kernel + v) * g.col_cols();
        for (std::size_t i = 0; i < g.out_h; ++i) {
          const long y = static_cast<long>(i) * g.stride + static_cast<long>(u) - g.pad;
          T* dst = row + i * g.out_w;
          if (y < 0 || y >= h) {
            std::fill(dst, dst + g.out_w, T(0));
            continue;
          }
          const T* src = img + (c * g.height + static_cast<std::size_t>(y)) * g.width;
          std::fill(dst, dst + lo, T(0));
          if (g.stride == 1) {
            std::copy(src + (static_cast<long>(lo) + off), src + (static_cast<long>(hi) + off), dst + lo);
          } else {
            for (std::size_t j = lo; j < hi; ++j) dst[j] = src[static_cast<long>(j) * g.stride + off];
          }
          std::fill(dst + hi, dst + g.out_w, T(0));
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, const ConvGeometry& g, T* img) {
  const auto h = static_cast<long>(g.height);
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t u = 0; u < g.kernel; ++u) {
      for (std::size_t v = 0; v < g.kernel; ++v) {
        std::size_t lo = 0, hi = 0;
        valid_columns(g, v, lo, hi);
        const long off = static_cast<long>(v) - g.pad;
        const T* row = col + ((c * g.kernel + u) * g.kernel + v) * g.col_cols();
        for (std::size_t i = 0; i < g.out_h; ++i) {
          const long y = static_cast<long>(i) * g.stride + static_cast<long>(u) - g.pad;
          if (y < 0 || y >= h) continue;
          T* dst = img + (c * g.height + static_cast<std::size_t>(y)) * g.width;
          const T* src = row + i * g.out_w;
          for (std::size_t j = lo; j < hi; ++j) dst[static_cast<long>(j) * g.stride + off] += src[j];
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias, int stride, int padding) {
  if (input.rank() != 4 || weight.rank() != 4) {
    throw InvalidShape("conv2d: expected [N,C,H,W] input and [O,C,K,K] weight, got " + to_string(input.shape()) +
                       " and " + to_string(weight.shape()));
  }
  if (stride < 1 || padding < 0) throw InvalidConfig("conv2d: stride must be >= 1 and padding >= 0");
  const std::size_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  const std::size_t o = weight.dim(0), k = weight.dim(2);
  if (weight.dim(1) != c || weight.dim(3) != k) {
    throw InvalidShape("conv2d: weight " + to_string(weight.shape()) + " does not match input " +
                       to_string(input.shape()));
  }
  if (bias.defined() && bias.shape() != Shape{o}) {
    throw InvalidShape("conv2d: bias " + to_string(bias.shape()) + " for " + std::to_string(o) + " filters");
  }
  const auto p = static_cast<std::size_t>(padding);
  if (h + 2 * p < k || w + 2 * p < k) {
    throw InvalidShape("conv2d: kernel " + std::to_string(k) + " does not fit padded input " + to_string(input.shape()));
  }
  const ConvGeometry geo{c, h, w, k, (h + 2 * p - k) / static_cast<std::size_t>(stride) + 1,
                         (w + 2 * p - k) / static_cast<std::size_t>(stride) + 1, stride, padding};
  const auto rows = static_cast<Eigen::Index>(geo.col_rows());
  const auto cols = static_cast<Eigen::Index>(geo.col_cols());
  const auto out_ch = static_cast<Eigen::Index>(o);

  std::vector<T> out(n * o * geo.col_cols());
  std::vector<T> col(geo.col_rows() * geo.col_cols());
  ConstMatMap<T> wm(weight.values().data(), out_ch, rows);
  for (std::size_t s = 0; s < n; ++s) {
    im2col(input.values().data() + s * c * h * w, geo, col.data());
    MatMap<T> y(out.data() + s * o * geo.col_cols(), out_ch, cols);
    y.noalias() = wm * ConstMatMap<T>(col.data(), rows, cols);
    if (bias.defined()) y.colwise() += Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>(bias.values().data(), out_ch);
  }

  std::vector<Tensor<T>> inputs{input, weight};
  if (bias.defined()) inputs.push_back(bias);
  return Tensor<T>::make_result(
      {n, o, geo.out_h, geo.out_w}, std::move(out), std::move(inputs), "conv2d",
      [input, weight, bias, geo, n, o](std::span<const T> g, std::span<const T>) {
        const auto rows = static_cast<Eigen::Index>(geo.col_rows());
        const auto cols = static_cast<Eigen::Index>(geo.col_cols());
        const auto out_ch = static_cast<Eigen::Index>(o);
        const std::size_t in_plane = geo.channels * geo.height * geo.width;
        std::vector<T> col(geo.col_rows() * geo.col_cols());
        std::vector<T> dcol(input.requires_grad() ? col.size() : 0);
        ConstMatMap<T> wm(weight.values().data(), out_ch, rows);
        for (std::size_t s = 0; s < n; ++s) {
          ConstMatMap<T> gy(g.data() + s * o * geo.col_cols(), out_ch, cols);
          if (weight.requires_grad()) {
            im2col(input.values().data() + s * in_plane, geo, col.data());
            MatMap<T> gw(weight.grad().data(), out_ch, rows);
            gw.noalias() += gy * ConstMatMap<T>(col.data(), rows, cols).transpose();
          }
          if (input.requires_grad()) {
            MatMap<T> dc(dcol.data(), rows, cols);
            dc.noalias() = wm.transpose() * gy;
            col2im_add(dcol.data(), geo, input.grad().data() + s * in_plane);
          }
          if (bias.defined() && bias.requires_grad()) {
            auto gb = bias.grad();
            const T* gs = g.data() + s * o * geo.col_cols();
            for (std::size_t f = 0; f < o; ++f) {
              T acc = 0;
              for (std::size_t j = 0; j < geo.col_cols(); ++j) acc += gs[f * geo.col_cols() + j];
              gb[f] += acc;
            }
          }
        }
      });
}

template <typename T>
Tensor<T> conv1d(const Tensor<T>& input, const Tensor<T>& weight) {
  if (input.rank() != 3 || input.dim(1) != 1) {
    throw InvalidShape("conv1d: expected [N,1,C] input, got " + to_string(input.shape()));
  }
  if (weight.shape().size() != 3 || weight.dim(0) != 1 || weight.dim(1) != 1) {
    throw InvalidShape("conv1d: expected [1,1,k] weight, got " + to_string(weight.shape()));
  }
  const std::size_t k = weight.dim(2);
  if (k % 2 == 0) throw InvalidConfig("conv1d: kernel size must be odd, got " + std::to_string(k));
  const std::size_t n = input.dim(0), c = input.dim(2);
  const auto half = static_cast<long>(k / 2);
  const auto len = static_cast<long>(c);

  std::vector<T> out(n * c, T(0));
  auto x = input.values();
  auto wv = weight.values();
  for (std::size_t s = 0; s < n; ++s) {
    for (long i = 0; i < len; ++i) {
      T acc = 0;
      for (long u = 0; u < static_cast<long>(k); ++u) {
        const long j = i + u - half;
        if (j >= 0 && j < len) acc += x[s * c + static_cast<std::size_t>(j)] * wv[static_cast<std::size_t>(u)];
      }
      out[s * c + static_cast<std::size_t>(i)] = acc;
    }
  }
  return Tensor<T>::make_result(
      {n, 1, c}, std::move(out), {input, weight}, "conv1d",
      [input, weight, n, c, k, half, len](std::span<const T> g, std::span<const T>) {
        auto x = input.values();
        auto wv = weight.values();
        std::span<T> gx = input.requires_grad() ? input.grad() : std::span<T>{};
        std::span<T> gw = weight.requires_grad() ? weight.grad() : std::span<T>{};
        for (std::size_t s = 0; s < n; ++s) {
          for (long i = 0; i < len; ++i) {
            const T go = g[s * c + static_cast<std::size_t>(i)];
            for (long u = 0; u < static_cast<long>(k); ++u) {
              const long j = i + u - half;
              if (j < 0 || j >= len) continue;
              const auto ju = s * c + static_cast<std::size_t>(j);
              if (!gx.empty()) gx[ju] += go * wv[static_cast<std::size_t>(u)];
              if (!gw.empty()) gw[static_cast<std::size_t>(u)] += go * x[ju];
            }
          }
        }
      });
}

template Tensor<float> conv2d<float>(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&, int, int);
template Tensor<double> conv2d<double>(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&, int, int);
template Tensor<float> conv1d<float>(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> conv1d<double>(const Tensor<double>&, const Tensor<double>&);

}  // namespace ser::ag
