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

#include "ser/errors.hpp"
#include "ser/training/adam.hpp"

namespace ser::train {

template <typename T>
void adam_step(std::span<model::Parameter<T>> params, AdamState& state, const AdamConfig& config) {
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.tensor.numel(), 0.0);
      state.v.emplace_back(p.tensor.numel(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw InvalidShape("adam: state tracks a different parameter list");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    if (state.m[i].size() != p.tensor.numel()) throw InvalidShape("adam: state shape differs for " + p.name);
    if (!p.tensor.has_grad()) continue;
    for (T g : p.tensor.grad()) {
      if (!std::isfinite(static_cast<double>(g))) throw NumericError("non-finite gradient in parameter " + p.name);
    }
  }

  state.t += 1;
  const double t = static_cast<double>(state.t);
  double lr = config.learning_rate;
  if (config.decay_mode == DecayMode::inverse_time) lr /= 1.0 + config.decay * (t - 1.0);
  const double l2 = config.decay_mode == DecayMode::l2 ? config.decay : 0.0;
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto w = p.tensor.values();
    const bool has = p.tensor.has_grad();
    const std::span<const T> grad = has ? std::span<const T>(p.tensor.grad()) : std::span<const T>();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double g = (has ? static_cast<double>(grad[j]) : 0.0) + l2 * static_cast<double>(w[j]);
      m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * g;
      v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * g * g;
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      w[j] = static_cast<T>(static_cast<double>(w[j]) - lr * mhat / (std::sqrt(vhat) + config.eps));
    }
  }
}

template void adam_step<float>(std::span<model::Parameter<float>>, AdamState&, const AdamConfig&);
template void adam_step<double>(std::span<model::Parameter<double>>, AdamState&, const AdamConfig&);

}  // namespace ser::train
