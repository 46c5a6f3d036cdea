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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include "ser/autograd/ops.hpp"
#include "ser/autograd/tensor.hpp"
#include "ser/rng.hpp"

namespace ser::testing {

// Hand-rolled generators for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  int integer(int lo, int hi) { return lo + static_cast<int>(rng_.below(static_cast<std::uint64_t>(hi - lo + 1))); }
  double real(double lo, double hi) { return rng_.uniform(lo, hi); }
  double normal() { return rng_.normal(); }

  std::vector<double> reals(std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (double& x : v) x = real(lo, hi);
    return v;
  }

  // Values with magnitude in [margin, 1], random sign; keeps kinks out of
  // finite-difference stencils.
  std::vector<double> away_from_zero(std::size_t n, double margin = 0.05) {
    std::vector<double> v(n);
    for (double& x : v) x = (rng_.uniform() < 0.5 ? -1.0 : 1.0) * real(margin, 1.0);
    return v;
  }

  ag::Tensor<double> tensor(ag::Shape shape, bool requires_grad = true) {
    return ag::Tensor<double>::from(shape, reals(ag::numel(shape), -1.0, 1.0), requires_grad);
  }

 private:
  Rng rng_;
};

inline std::vector<std::complex<double>> naive_dft(const std::vector<double>& x, std::size_t n) {
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0;
    for (std::size_t t = 0; t < x.size() && t < n; ++t) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

// Central-difference check of d loss / d inputs. `loss` must rebuild the graph
// from the given inputs on every call. Error per element is
// |analytic - numeric| / max(1, |numeric|). When `max_per_input` is nonzero,
// that many seeded coordinates per input are checked instead of all of them.
inline GradCheckResult gradcheck(const std::function<ag::Tensor<double>(std::vector<ag::Tensor<double>>&)>& loss,
                                 std::vector<ag::Tensor<double>> inputs, double h = 1e-4,
                                 std::size_t max_per_input = 0, std::uint64_t seed = 1) {
  for (auto& in : inputs) in.zero_grad();
  auto out = loss(inputs);
  out.backward();
  std::vector<std::vector<double>> analytic;
  for (auto& in : inputs) {
    const auto g = in.grad();
    analytic.emplace_back(g.begin(), g.end());
  }

  GradCheckResult result;
  Rng pick(seed);
  ag::NoGradGuard no_grad;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto values = inputs[i].values();
    std::vector<std::size_t> coords;
    if (max_per_input == 0 || max_per_input >= values.size()) {
      for (std::size_t j = 0; j < values.size(); ++j) coords.push_back(j);
    } else {
      for (std::size_t j = 0; j < max_per_input; ++j) coords.push_back(pick.below(values.size()));
    }
    for (std::size_t j : coords) {
      const double saved = values[j];
      values[j] = saved + h;
      const double up = loss(inputs).item();
      values[j] = saved - h;
      const double down = loss(inputs).item();
      values[j] = saved;
      const double numeric = (up - down) / (2 * h);
      const double err = std::abs(analytic[i][j] - numeric) / std::max(1.0, std::abs(numeric));
      result.max_rel_error = std::max(result.max_rel_error, err);
      ++result.checked;
    }
  }
  return result;
}

// Scalar projection of a tensor onto fixed random weights, so every output
// element contributes to the checked gradient.
inline ag::Tensor<double> project(const ag::Tensor<double>& y, std::uint64_t seed) {
  Gen g(seed);
  auto w = ag::Tensor<double>::from(y.shape(), g.reals(y.numel(), -1.0, 1.0), false);
  return ag::sum(ag::mul(y, w));
}

}  // namespace ser::testing
