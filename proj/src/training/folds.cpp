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
#include <map>
#include <set>
#include <string>

#include "ser/errors.hpp"
#include "ser/rng.hpp"
#include "ser/training/folds.hpp"

namespace ser::train {

std::vector<data::FoldSplit> make_folds(std::span<const data::LabeledUtterance> dataset, int folds,
                                        std::uint64_t seed, std::vector<std::string>* warnings) {
  if (folds < 2) throw InvalidConfig("need at least 2 folds, got " + std::to_string(folds));
  if (dataset.size() < static_cast<std::size_t>(folds)) {
    throw InvalidInput("dataset of " + std::to_string(dataset.size()) + " utterances cannot fill " +
                       std::to_string(folds) + " folds");
  }
  std::map<int, std::vector<std::string>> by_class;
  std::set<std::string> seen;
  for (const auto& u : dataset) {
    if (!seen.insert(u.utterance_id).second) throw InvalidInput("duplicate utterance id '" + u.utterance_id + "'");
    by_class[u.label].push_back(u.utterance_id);
  }

  const auto k = static_cast<std::size_t>(folds);
  std::vector<std::set<std::string>> test(k);
  std::size_t cursor = 0;
  for (auto& [label, ids] : by_class) {
    if (ids.size() < k && warnings != nullptr) {
      warnings->push_back("class " + std::to_string(label) + " has " + std::to_string(ids.size()) +
                          " utterances for " + std::to_string(folds) + " folds; some test folds will lack it");
    }
    std::sort(ids.begin(), ids.end());
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(label) + 1));
    rng.shuffle(std::span<std::string>(ids));
    for (const auto& id : ids) test[cursor++ % k].insert(id);
  }

  std::vector<data::FoldSplit> out(k);
  for (std::size_t f = 0; f < k; ++f) {
    out[f].test_ids.assign(test[f].begin(), test[f].end());
    for (const auto& u : dataset) {
      if (test[f].count(u.utterance_id) == 0) out[f].train_ids.push_back(u.utterance_id);
    }
  }
  return out;
}

}  // namespace ser::train
