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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ser/data/source.hpp"
#include "ser/dsp.hpp"

namespace ser::data {

struct LabeledUtterance {
  std::string utterance_id;
  int label = -1;
};

// One cross-validation split over utterance ids.
struct FoldSplit {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

// Which preprocessing versions feed the test set and the training set.
// The training set always holds the test-version copy of each training
// utterance (unless include_base is false) followed by `train_versions`.
struct AugmentationPlan {
  int test_version = 8;
  std::vector<int> train_versions;
  bool include_base = true;

  // Test on version 1, add versions 2, 3, ... (count of them).
  static AugmentationPlan ascending(int count);
  // Test on version 8, add versions 7, 6, ... (count of them).
  static AugmentationPlan descending(int count);
  static AugmentationPlan single(int version) { return {version, {}, true}; }

  // Throws InvalidConfig for versions outside 1..8, repeated versions, or
  // the test version listed as an extra.
  void validate() const;

  // Versions contributing training entries, in order.
  std::vector<int> training_versions() const;
};

struct AugmentedEntry {
  std::string utterance_id;
  int version = 0;
  int label = -1;
  std::shared_ptr<const dsp::LogMelSpectrogram> spectrogram;  // null unless a source was given
};

struct AugmentedDataset {
  int test_version = 0;
  std::vector<int> train_versions;  // as returned by training_versions()
  std::vector<AugmentedEntry> train;
  std::vector<AugmentedEntry> test;
};

// Builds one fold's train/test entries. Throws LeakageError if the fold's
// train and test ids intersect, InvalidInput for ids missing from
// `utterances`.
AugmentedDataset assemble_augmented(std::span<const LabeledUtterance> utterances, std::span<const FoldSplit> folds,
                                    std::size_t fold_index, const AugmentationPlan& plan,
                                    const SpectrogramSource* source = nullptr);

}  // namespace ser::data
