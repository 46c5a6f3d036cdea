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

#include <cmath>
#include <string>

#include "ser/autograd/ops.hpp"
#include "ser/errors.hpp"

namespace ser::ag {

namespace {

constexpr std::size_t kLanes = 8;

// Fixed-order partial sums in independent lanes so the loops vectorize while
// staying bitwise reproducible.
template <typename T>
double plane_sum(const T* p, std::size_t len) {
  double acc[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) acc[l] += static_cast<double>(p[i + l]);
  }
  for (; i < len; ++i) acc[i % kLanes] += static_cast<double>(p[i]);
  double total = 0.0;
  for (double a : acc) total += a;
  return total;
}

template <typename T>
double plane_sq_dev(const T* p, std::size_t len, double mu) {
  double acc[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) {
      const double d = static_cast<double>(p[i + l]) - mu;
      acc[l] += d * d;
    }
  }
  for (; i < len; ++i) {
    const double d = static_cast<double>(p[i]) - mu;
    acc[i % kLanes] += d * d;
  }
  double total = 0.0;
  for (double a : acc) total += a;
  return total;
}

// Sums of g and g * (x - mu) over one plane.
template <typename T>
void plane_grad_sums(const T* g, const T* x, std::size_t len, double mu, double& sum_g, double& sum_gd) {
  double ag[kLanes] = {}, agd[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) {
      const double gi = static_cast<double>(g[i + l]);
      ag[l] += gi;
      agd[l] += gi * (static_cast<double>(x[i + l]) - mu);
    }
  }
  for (; i < len; ++i) {
    const double gi = static_cast<double>(g[i]);
    ag[i % kLanes] += gi;
    agd[i % kLanes] += gi * (static_cast<double>(x[i]) - mu);
  }
  for (std::size_t l = 0; l < kLanes; ++l) {
    sum_g += ag[l];
    sum_gd += agd[l];
  }
}

}  // namespace

template <typename T>
Tensor<T> batchnorm2d(const Tensor<T>& input, const Tensor<T>& gamma, const Tensor<T>& beta, BatchNormState<T>& state,
                      Mode mode) {
  if (input.rank() != 4) throw InvalidShape("batchnorm2d: expected [N,C,H,W], got " + to_string(input.shape()));
  const std::size_t n = input.dim(0), c = input.dim(1), hw = input.dim(2) * input.dim(3);
  if (gamma.shape() != Shape{c} || beta.shape() != Shape{c} || state.running_mean.size() != c ||
      state.running_var.size() != c) {
    throw InvalidShape("batchnorm2d: parameters do not match " + std::to_string(c) + " channels");
  }
  const std::size_t count = n * hw;
  if (mode == Mode::train && count < 2) {
    throw InvalidShape("batchnorm2d: training mode needs at least two values per channel");
  }

  // Per-channel shift and inverse scale used for normalization.
  std::vector<double> center(c), inv_std(c);
  auto x = input.values();
  if (mode == Mode::train) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      double total = 0.0;
      for (std::size_t s = 0; s < n; ++s) total += plane_sum(x.data() + (s * c + ch) * hw, hw);
      const double mu = total / static_cast<double>(count);
      double sq = 0.0;
      for (std::size_t s = 0; s < n; ++s) sq += plane_sq_dev(x.data() + (s * c + ch) * hw, hw, mu);
      const double var = sq / static_cast<double>(count);
      center[ch] = mu;
      inv_std[ch] = 1.0 / std::sqrt(var + state.eps);
      const double unbiased = sq / static_cast<double>(count - 1);
      state.running_mean[ch] =
          static_cast<T>((1.0 - state.momentum) * state.running_mean[ch] + state.momentum * mu);
      state.running_var[ch] =
          static_cast<T>((1.0 - state.momentum) * state.running_var[ch] + state.momentum * unbiased);
    }
  } else {
    for (std::size_t ch = 0; ch < c; ++ch) {
      center[ch] = state.running_mean[ch];
      inv_std[ch] = 1.0 / std::sqrt(static_cast<double>(state.running_var[ch]) + state.eps);
    }
  }

  std::vector<T> out(input.numel());
  auto gv = gamma.values();
  auto bv = beta.values();
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const std::size_t base = (s * c + ch) * hw;
      const T mu = static_cast<T>(center[ch]);
      const T is = static_cast<T>(inv_std[ch]);
      for (std::size_t i = 0; i < hw; ++i) out[base + i] = gv[ch] * ((x[base + i] - mu) * is) + bv[ch];
    }
  }

  return Tensor<T>::make_result(
      input.shape(), std::move(out), {input, gamma, beta}, mode == Mode::train ? "batchnorm2d[train]" : "batchnorm2d[eval]",
      [input, gamma, beta, center = std::move(center), inv_std = std::move(inv_std), mode, n, c, hw,
       count](std::span<const T> g, std::span<const T>) {
        auto x = input.values();
        auto gv = gamma.values();
        for (std::size_t ch = 0; ch < c; ++ch) {
          double sum_g = 0.0, sum_gd = 0.0;
          for (std::size_t s = 0; s < n; ++s) {
            const std::size_t base = (s * c + ch) * hw;
            plane_grad_sums(g.data() + base, x.data() + base, hw, center[ch], sum_g, sum_gd);
          }
          const double sum_gx = sum_gd * inv_std[ch];
          if (gamma.requires_grad()) gamma.grad()[ch] += static_cast<T>(sum_gx);
          if (beta.requires_grad()) beta.grad()[ch] += static_cast<T>(sum_g);
          if (!input.requires_grad()) continue;
          auto gx = input.grad();
          const double scale = gv[ch] * inv_std[ch];
          if (mode == Mode::eval) {
            for (std::size_t s = 0; s < n; ++s) {
              const std::size_t base = (s * c + ch) * hw;
              for (std::size_t i = 0; i < hw; ++i) gx[base + i] += static_cast<T>(scale * g[base + i]);
            }
            continue;
          }
          const double m = static_cast<double>(count);
          const double mean_g = sum_g / m, mean_gx = sum_gx / m;
          // scale * (g - mean_g - xhat * mean_gx), expanded.
          const T a = static_cast<T>(scale);
          const T b = static_cast<T>(-scale * mean_gx * inv_std[ch]);
          const T d = static_cast<T>(-scale * mean_g);
          const T mu = static_cast<T>(center[ch]);
          for (std::size_t s = 0; s < n; ++s) {
            const std::size_t base = (s * c + ch) * hw;
            for (std::size_t i = 0; i < hw; ++i) gx[base + i] += a * g[base + i] + b * (x[base + i] - mu) + d;
          }
        }
      });
}

template Tensor<float> batchnorm2d<float>(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&,
                                          BatchNormState<float>&, Mode);
template Tensor<double> batchnorm2d<double>(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&,
                                            BatchNormState<double>&, Mode);

}  // namespace ser::ag
