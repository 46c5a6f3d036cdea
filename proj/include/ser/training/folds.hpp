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
#include <string>
#include <vector>

#include "ser/data/augment.hpp"

namespace ser::train {

// Stratified seeded partition of utterance ids into `folds` test sets. Each
// class is shuffled and dealt round-robin, continuing where the previous class
// stopped so fold sizes differ by at most one. Classes with fewer samples than
// folds are spread best-effort and reported through `warnings`.
std::vector<data::FoldSplit> make_folds(std::span<const data::LabeledUtterance> dataset, int folds,
                                        std::uint64_t seed, std::vector<std::string>* warnings = nullptr);

}  // namespace ser::train
