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

#include "ser/data/augment.hpp"
#include "ser/errors.hpp"

namespace ser::data {

AugmentationPlan AugmentationPlan::ascending(int count) {
  if (count < 0 || count > 7) throw InvalidConfig("ascending augmentation takes 0..7 extra versions");
  AugmentationPlan plan{1, {}, true};
  for (int v = 2; v < 2 + count; ++v) plan.train_versions.push_back(v);
  return plan;
}

AugmentationPlan AugmentationPlan::descending(int count) {
  if (count < 0 || count > 7) throw InvalidConfig("descending augmentation takes 0..7 extra versions");
  AugmentationPlan plan{8, {}, true};
  for (int v = 7; v > 7 - count; --v) plan.train_versions.push_back(v);
  return plan;
}

void AugmentationPlan::validate() const {
  auto in_range = [](int v) { return v >= 1 && v <= 8; };
  if (!in_range(test_version)) throw InvalidConfig("test version " + std::to_string(test_version) + " outside 1..8");
  std::set<int> seen;
  for (int v : train_versions) {
    if (!in_range(v)) throw InvalidConfig("training version " + std::to_string(v) + " outside 1..8");
    if (v == test_version) {
      throw InvalidConfig("test version " + std::to_string(v) + " may only enter training as the base copy");
    }
    if (!seen.insert(v).second) throw InvalidConfig("training version " + std::to_string(v) + " listed twice");
  }
  if (!include_base && train_versions.empty()) throw InvalidConfig("augmentation plan has no training versions");
}

std::vector<int> AugmentationPlan::training_versions() const {
  std::vector<int> out;
  if (include_base) out.push_back(test_version);
  out.insert(out.end(), train_versions.begin(), train_versions.end());
  return out;
}

AugmentedDataset assemble_augmented(std::span<const LabeledUtterance> utterances, std::span<const FoldSplit> folds,
                                    std::size_t fold_index, const AugmentationPlan& plan,
                                    const SpectrogramSource* source) {
  plan.validate();
  if (fold_index >= folds.size()) {
    throw InvalidConfig("fold index " + std::to_string(fold_index) + " out of range (" +
                        std::to_string(folds.size()) + " folds)");
  }
  std::map<std::string, int> labels;
  for (const auto& u : utterances) {
    if (!labels.emplace(u.utterance_id, u.label).second) {
      throw InvalidInput("duplicate utterance id '" + u.utterance_id + "'");
    }
  }
  const FoldSplit& fold = folds[fold_index];
  const std::set<std::string> test_ids(fold.test_ids.begin(), fold.test_ids.end());
  for (const auto& id : fold.train_ids) {
    if (test_ids.count(id) != 0) throw LeakageError("utterance '" + id + "' is in both train and test splits");
  }

  auto make_entry = [&](const std::string& id, int version) {
    auto it = labels.find(id);
    if (it == labels.end()) throw InvalidInput("fold references unknown utterance '" + id + "'");
    AugmentedEntry e{id, version, it->second, nullptr};
    if (source != nullptr) {
      e.spectrogram = source->get(id, version);
      if (e.spectrogram->version_id != version) {
        throw InternalError("source returned version " + std::to_string(e.spectrogram->version_id) + " for '" + id +
                            "', expected " + std::to_string(version));
      }
    }
    return e;
  };

  AugmentedDataset out;
  out.test_version = plan.test_version;
  out.train_versions = plan.training_versions();
  out.train.reserve(fold.train_ids.size() * out.train_versions.size());
  for (int v : out.train_versions) {
    for (const auto& id : fold.train_ids) out.train.push_back(make_entry(id, v));
  }
  out.test.reserve(fold.test_ids.size());
  for (const auto& id : fold.test_ids) out.test.push_back(make_entry(id, plan.test_version));
  return out;
}

}  // namespace ser::data
