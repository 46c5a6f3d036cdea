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

#include <cstdint>
#include <span>
#include <vector>

#include "ser/model.hpp"

namespace ser::train {

// l2: decay is added to the gradient as decay * w.
// inverse_time: the step size becomes lr / (1 + decay * t).
enum class DecayMode { l2, inverse_time };

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double decay = 1e-6;
  DecayMode decay_mode = DecayMode::l2;
};

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::int64_t t = 0;
};

// One update of every parameter from its accumulated gradient. Parameters
// without a gradient are treated as having a zero gradient. Throws
// NumericError naming the first parameter with a non-finite gradient, before
// anything is modified.
template <typename T>
void adam_step(std::span<model::Parameter<T>> params, AdamState& state, const AdamConfig& config);

}  // namespace ser::train
