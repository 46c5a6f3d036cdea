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
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ser/data/augment.hpp"
#include "ser/model.hpp"
#include "ser/training/adam.hpp"
#include "ser/training/metrics.hpp"

namespace ser::train {

enum class Precision { single, double_precision };

struct TrainConfig {
  double learning_rate = 1e-4;
  double weight_decay = 1e-6;
  DecayMode decay_mode = DecayMode::l2;
  int batch_size = 32;
  int epochs = 150;
  double gamma = 1.0;
  int folds = 5;
  std::uint64_t seed = 0;
  Precision precision = Precision::single;
  int threads = 1;  // concurrent folds

  // Throws InvalidConfig.
  void validate() const;
  AdamConfig adam() const;
};

struct EpochStats {
  std::size_t fold = 0;
  int epoch = 0;  // 1-based
  double loss = 0.0;
  double running_accuracy = 0.0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

struct FoldOutcome {
  std::size_t fold = 0;
  std::uint64_t seed = 0;
  model::ModelState state;  // final-epoch model
  ConfusionMatrix confusion;
  std::vector<double> loss_curve;
  std::vector<double> running_accuracy;
  double train_accuracy = 0.0;  // final model, eval mode, full training set
  std::vector<int> test_predictions;
};

// Trains a fresh model on `train` and scores it on `test`. Entries must carry
// spectrograms. Throws NumericError on a non-finite loss with epoch and batch
// context.
FoldOutcome train_fold(const model::ModelConfig& model_config, const TrainConfig& config,
                       std::span<const data::AugmentedEntry> train, std::span<const data::AugmentedEntry> test,
                       std::uint64_t seed, std::size_t fold = 0, const EpochCallback& on_epoch = {});

struct CvDataset {
  std::vector<data::LabeledUtterance> utterances;
  const data::SpectrogramSource* source = nullptr;
  data::AugmentationPlan plan = data::AugmentationPlan::single(8);
};

struct CvResult {
  std::vector<data::FoldSplit> splits;
  std::vector<FoldOutcome> folds;
  ConfusionMatrix pooled;
  Metrics metrics;
  std::vector<std::string> warnings;
};

// Seed of fold k under point key p.
std::uint64_t fold_seed(std::uint64_t base_seed, std::size_t fold, std::uint64_t point_key);

// Folds run on up to config.threads workers; each fold is single-threaded and
// seeded from (seed, fold, point_key), so results do not depend on the thread
// count.
CvResult cross_validate(const model::ModelConfig& model_config, const TrainConfig& config, const CvDataset& dataset,
                        std::uint64_t point_key = 0, const EpochCallback& on_epoch = {});

template <typename T>
ag::Tensor<T> make_batch(std::span<const data::AugmentedEntry> entries, std::span<const std::size_t> indices);

// Eval-mode argmax predictions.
template <typename T>
std::vector<int> predict(model::Model<T>& model, std::span<const data::AugmentedEntry> entries,
                         std::size_t batch_size = 32);

ConfusionMatrix confusion_from_predictions(std::span<const data::AugmentedEntry> entries,
                                           std::span<const int> predictions, int num_classes);

// Mean attention score per [class][channel] of the block at `layer`.
template <typename T>
std::vector<std::vector<double>> eca_class_means(model::Model<T>& model, std::span<const data::AugmentedEntry> entries,
                                                 int layer, int num_classes, std::size_t batch_size = 32);

}  // namespace ser::train
