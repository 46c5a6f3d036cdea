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

#include "ser/errors.hpp"
#include "ser/training/loss.hpp"

namespace ser::train {

std::vector<double> class_weights(std::span<const std::size_t> counts) {
  if (counts.empty()) throw InvalidInput("class_weights: no classes");
  std::vector<double> w(counts.size());
  double total = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) throw InvalidInput("class_weights: class " + std::to_string(i) + " has no samples");
    w[i] = 1.0 / static_cast<double>(counts[i]);
    total += w[i];
  }
  const double mean = total / static_cast<double>(w.size());
  for (double& v : w) v /= mean;
  return w;
}

namespace {

template <typename T>
void check_targets(const ag::Tensor<T>& x, std::span<const int> targets, std::span<const double> weights,
                   double gamma) {
  if (x.rank() != 2) throw InvalidShape("focal loss expects [N,C], got " + ag::to_string(x.shape()));
  const std::size_t n = x.shape()[0];
  const std::size_t c = x.shape()[1];
  if (targets.size() != n) throw InvalidShape("focal loss: " + std::to_string(targets.size()) + " targets for " +
                                              std::to_string(n) + " rows");
  if (weights.size() != c) throw InvalidShape("focal loss: class weight count does not match class count");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidConfig("focal loss: gamma must be finite and >= 0");
  for (int y : targets) {
    if (y < 0 || static_cast<std::size_t>(y) >= c) {
      throw InvalidInput("focal loss: target " + std::to_string(y) + " outside 0.." + std::to_string(c - 1));
    }
  }
}

// (1 - p)^(gamma - 1), taking the p -> 1 limit of the product it appears in.
double focal_slope(double q, double gamma) {
  if (gamma == 0.0 || q == 0.0) return 0.0;
  return gamma * std::pow(q, gamma - 1.0);
}

}  // namespace

template <typename T>
ag::Tensor<T> weighted_focal_loss(const ag::Tensor<T>& probs, std::span<const int> targets,
                                  std::span<const double> weights, double gamma) {
  check_targets(probs, targets, weights, gamma);
  const std::size_t n = probs.shape()[0];
  const std::size_t c = probs.shape()[1];
  const std::vector<int> ys(targets.begin(), targets.end());
  const std::vector<double> ws(weights.begin(), weights.end());
  auto p = probs.values();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double py = std::max(static_cast<double>(p[i * c + ys[i]]), kProbabilityFloor);
    total += -ws[ys[i]] * std::pow(1.0 - py, gamma) * std::log(py);
  }
  return ag::Tensor<T>::make_result(
      {1}, {static_cast<T>(total / static_cast<double>(n))}, {probs}, "focal_loss",
      [probs, ys, ws, gamma, n, c](std::span<const T> g, std::span<const T>) {
        if (!probs.requires_grad()) return;
        auto gp = probs.grad();
        const double scale = static_cast<double>(g[0]) / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
          const double raw = probs.values()[i * c + ys[i]];
          if (raw < kProbabilityFloor) continue;
          const double q = 1.0 - raw;
          const double d = -ws[ys[i]] * (std::pow(q, gamma) / raw - focal_slope(q, gamma) * std::log(raw));
          gp[i * c + ys[i]] += static_cast<T>(scale * d);
        }
      });
}

template <typename T>
ag::Tensor<T> weighted_focal_loss_from_logits(const ag::Tensor<T>& logits, std::span<const int> targets,
                                              std::span<const double> weights, double gamma) {
  check_targets(logits, targets, weights, gamma);
  const std::size_t n = logits.shape()[0];
  const std::size_t c = logits.shape()[1];
  const std::vector<int> ys(targets.begin(), targets.end());
  const std::vector<double> ws(weights.begin(), weights.end());
  const double log_floor = std::log(kProbabilityFloor);

  // Row-wise log-softmax in double.
  std::vector<double> logp(n * c);
  auto z = logits.values();
  for (std::size_t i = 0; i < n; ++i) {
    double peak = z[i * c];
    for (std::size_t k = 1; k < c; ++k) peak = std::max(peak, static_cast<double>(z[i * c + k]));
    double acc = 0.0;
    for (std::size_t k = 0; k < c; ++k) acc += std::exp(static_cast<double>(z[i * c + k]) - peak);
    const double lse = peak + std::log(acc);
    for (std::size_t k = 0; k < c; ++k) logp[i * c + k] = static_cast<double>(z[i * c + k]) - lse;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ly = std::max(logp[i * c + ys[i]], log_floor);
    total += -ws[ys[i]] * std::pow(-std::expm1(ly), gamma) * ly;
  }
  return ag::Tensor<T>::make_result(
      {1}, {static_cast<T>(total / static_cast<double>(n))}, {logits}, "focal_loss_logits",
      [logits, ys, ws, gamma, n, c, logp = std::move(logp), log_floor](std::span<const T> g, std::span<const T>) {
        if (!logits.requires_grad()) return;
        auto gz = logits.grad();
        const double scale = static_cast<double>(g[0]) / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
          const double ly = logp[i * c + ys[i]];
          if (ly < log_floor) continue;
          const double py = std::exp(ly);
          const double q = -std::expm1(ly);
          // d/d(ln p_y) of the per-sample loss.
          const double dl = -ws[ys[i]] * (std::pow(q, gamma) - focal_slope(q, gamma) * py * ly);
          for (std::size_t k = 0; k < c; ++k) {
            const double onehot = static_cast<int>(k) == ys[i] ? 1.0 : 0.0;
            gz[i * c + k] += static_cast<T>(scale * dl * (onehot - std::exp(logp[i * c + k])));
          }
        }
      });
}

template ag::Tensor<float> weighted_focal_loss<float>(const ag::Tensor<float>&, std::span<const int>,
                                                      std::span<const double>, double);
template ag::Tensor<double> weighted_focal_loss<double>(const ag::Tensor<double>&, std::span<const int>,
                                                        std::span<const double>, double);
template ag::Tensor<float> weighted_focal_loss_from_logits<float>(const ag::Tensor<float>&, std::span<const int>,
                                                                  std::span<const double>, double);
template ag::Tensor<double> weighted_focal_loss_from_logits<double>(const ag::Tensor<double>&, std::span<const int>,
                                                                    std::span<const double>, double);

}  // namespace ser::train
