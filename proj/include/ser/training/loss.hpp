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
#include <span>
#include <vector>

#include "ser/autograd/tensor.hpp"

namespace ser::train {

inline constexpr double kProbabilityFloor = 1e-12;

// Reciprocal class counts, normalized to mean 1. Throws InvalidInput on a
// zero count.
std::vector<double> class_weights(std::span<const std::size_t> counts);

// Mean over the batch of -w_y (1 - p_y)^gamma ln p_y, with p_y clamped to
// kProbabilityFloor. `probs` is [N,C] with rows on the simplex.
template <typename T>
ag::Tensor<T> weighted_focal_loss(const ag::Tensor<T>& probs, std::span<const int> targets,
                                  std::span<const double> weights, double gamma);

// Same loss evaluated from logits through a log-softmax; numerically safer
// once predictions saturate.
template <typename T>
ag::Tensor<T> weighted_focal_loss_from_logits(const ag::Tensor<T>& logits, std::span<const int> targets,
                                              std::span<const double> weights, double gamma);

}  // namespace ser::train
