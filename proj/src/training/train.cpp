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
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <set>
#include <string>
#include <thread>

#include "ser/errors.hpp"
#include "ser/memory.hpp"
#include "ser/rng.hpp"
#include "ser/training/folds.hpp"
#include "ser/training/loss.hpp"
#include "ser/training/train.hpp"

namespace ser::train {

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw InvalidConfig("train config: " + what); };
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be positive");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) fail("weight_decay must be non-negative");
  if (batch_size < 1) fail("batch_size must be at least 1");
  if (epochs < 1) fail("epochs must be at least 1");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) fail("gamma must be non-negative");
  if (folds < 2) fail("folds must be at least 2");
  if (threads < 1) fail("threads must be at least 1");
}

AdamConfig TrainConfig::adam() const {
  AdamConfig a;
  a.learning_rate = learning_rate;
  a.decay = weight_decay;
  a.decay_mode = decay_mode;
  return a;
}

std::uint64_t fold_seed(std::uint64_t base_seed, std::size_t fold, std::uint64_t point_key) {
  return derive_seed(base_seed, fold, point_key);
}

template <typename T>
ag::Tensor<T> make_batch(std::span<const data::AugmentedEntry> entries, std::span<const std::size_t> indices) {
  if (indices.empty()) throw InvalidInput("empty batch");
  const auto& first = entries[indices[0]].spectrogram;
  if (!first) throw InvalidInput("entry '" + entries[indices[0]].utterance_id + "' has no spectrogram");
  const std::size_t frames = first->num_frames;
  const std::size_t mels = first->n_mels;
  const std::size_t plane = frames * mels;
  std::vector<T> values(indices.size() * plane);
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const auto& e = entries[indices[b]];
    if (!e.spectrogram) throw InvalidInput("entry '" + e.utterance_id + "' has no spectrogram");
    if (e.spectrogram->num_frames != frames || e.spectrogram->n_mels != mels) {
      throw InvalidShape("spectrogram of '" + e.utterance_id + "' v" + std::to_string(e.version) +
                         " does not match the batch shape");
    }
    std::copy(e.spectrogram->data.begin(), e.spectrogram->data.end(), values.begin() + static_cast<std::ptrdiff_t>(b * plane));
  }
  return ag::Tensor<T>::from({indices.size(), 1, frames, mels}, std::move(values));
}

namespace {

template <typename T>
std::vector<int> argmax_rows(const ag::Tensor<T>& logits) {
  const std::size_t n = logits.shape()[0];
  const std::size_t c = logits.shape()[1];
  std::vector<int> out(n);
  auto v = logits.values();
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = v.data() + i * c;
    out[i] = static_cast<int>(std::max_element(row, row + c) - row);
  }
  return out;
}

template <typename F>
void for_each_batch(std::size_t count, std::size_t batch_size, F&& body) {
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < count; start += batch_size) {
    idx.resize(std::min(batch_size, count - start));
    std::iota(idx.begin(), idx.end(), start);
    body(std::span<const std::size_t>(idx));
  }
}

void check_entries(std::span<const data::AugmentedEntry> entries, const model::ModelConfig& cfg, const char* what) {
  for (const auto& e : entries) {
    if (!e.spectrogram) throw InvalidInput(std::string(what) + " entry '" + e.utterance_id + "' has no spectrogram");
    if (e.spectrogram->num_frames != static_cast<std::size_t>(cfg.input_time) ||
        e.spectrogram->n_mels != static_cast<std::size_t>(cfg.input_mel)) {
      throw InvalidShape(std::string(what) + " entry '" + e.utterance_id + "' is " +
                         std::to_string(e.spectrogram->num_frames) + "x" + std::to_string(e.spectrogram->n_mels) +
                         ", model expects " + std::to_string(cfg.input_time) + "x" + std::to_string(cfg.input_mel));
    }
    if (e.label < 0 || e.label >= cfg.num_classes) {
      throw InvalidInput(std::string(what) + " entry '" + e.utterance_id + "' has label " + std::to_string(e.label));
    }
  }
}

template <typename T>
FoldOutcome train_fold_impl(const model::ModelConfig& model_config, const TrainConfig& config,
                            std::span<const data::AugmentedEntry> train, std::span<const data::AugmentedEntry> test,
                            std::uint64_t seed, std::size_t fold, const EpochCallback& on_epoch) {
  tune_allocator();
  config.validate();
  model_config.validate();
  if (train.empty()) throw InvalidInput("empty training set");
  check_entries(train, model_config, "training");
  check_entries(test, model_config, "test");
  std::set<std::string> train_ids;
  for (const auto& e : train) train_ids.insert(e.utterance_id);
  for (const auto& e : test) {
    if (train_ids.count(e.utterance_id) != 0) {
      throw LeakageError("utterance '" + e.utterance_id + "' appears in both training and test data");
    }
  }

  std::vector<std::size_t> counts(static_cast<std::size_t>(model_config.num_classes), 0);
  for (const auto& e : train) ++counts[static_cast<std::size_t>(e.label)];
  const std::vector<double> weights = class_weights(counts);

  model::Model<T> net(model_config, derive_seed(seed, 1));
  Rng shuffler(derive_seed(seed, 2));
  AdamState adam_state;
  const AdamConfig adam = config.adam();
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  FoldOutcome out;
  out.fold = fold;
  out.seed = seed;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<int> targets;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffler.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size, ++batch_no) {
      const std::span<const std::size_t> idx(order.data() + start, std::min(batch_size, order.size() - start));
      targets.clear();
      for (std::size_t i : idx) targets.push_back(train[i].label);
      auto logits = net.forward(make_batch<T>(train, idx), ag::Mode::train);
      auto loss = weighted_focal_loss_from_logits(logits, targets, weights, config.gamma);
      const double value = static_cast<double>(loss.item());
      if (!std::isfinite(value)) {
        throw NumericError("non-finite loss at fold " + std::to_string(fold) + ", epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batch_no));
      }
      net.zero_grad();
      loss.backward();
      adam_step(std::span<model::Parameter<T>>(net.parameters()), adam_state, adam);
      loss_sum += value * static_cast<double>(idx.size());
      const auto pred = argmax_rows(logits);
      for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == targets[i] ? 1 : 0;
    }
    EpochStats stats{fold, epoch, loss_sum / static_cast<double>(train.size()),
                     static_cast<double>(correct) / static_cast<double>(train.size())};
    out.loss_curve.push_back(stats.loss);
    out.running_accuracy.push_back(stats.running_accuracy);
    if (on_epoch) on_epoch(stats);
  }

  const auto train_pred = predict(net, train, batch_size);
  std::size_t train_correct = 0;
  for (std::size_t i = 0; i < train.size(); ++i) train_correct += train_pred[i] == train[i].label ? 1 : 0;
  out.train_accuracy = static_cast<double>(train_correct) / static_cast<double>(train.size());
  out.test_predictions = predict(net, test, batch_size);
  out.confusion = confusion_from_predictions(test, out.test_predictions, model_config.num_classes);
  out.state = net.export_state();
  return out;
}

}  // namespace

template <typename T>
std::vector<int> predict(model::Model<T>& model, std::span<const data::AugmentedEntry> entries,
                         std::size_t batch_size) {
  ag::NoGradGuard no_grad;
  std::vector<int> out;
  out.reserve(entries.size());
  for_each_batch(entries.size(), std::max<std::size_t>(batch_size, 1), [&](std::span<const std::size_t> idx) {
    const auto pred = argmax_rows(model.forward(make_batch<T>(entries, idx), ag::Mode::eval));
    out.insert(out.end(), pred.begin(), pred.end());
  });
  return out;
}

ConfusionMatrix confusion_from_predictions(std::span<const data::AugmentedEntry> entries,
                                           std::span<const int> predictions, int num_classes) {
  if (entries.size() != predictions.size()) throw InvalidShape("prediction count does not match entry count");
  ConfusionMatrix cm(num_classes);
  for (std::size_t i = 0; i < entries.size(); ++i) cm.add(entries[i].label, predictions[i]);
  return cm;
}

template <typename T>
std::vector<std::vector<double>> eca_class_means(model::Model<T>& model, std::span<const data::AugmentedEntry> entries,
                                                 int layer, int num_classes, std::size_t batch_size) {
  const auto channels = static_cast<std::size_t>(model.config().channels(layer));
  std::vector<std::vector<double>> sums(static_cast<std::size_t>(num_classes), std::vector<double>(channels, 0.0));
  std::vector<std::size_t> counts(sums.size(), 0);
  for_each_batch(entries.size(), std::max<std::size_t>(batch_size, 1), [&](std::span<const std::size_t> idx) {
    const auto scores = model.extract_eca_scores(make_batch<T>(entries, idx), layer);
    auto v = scores.values();
    for (std::size_t b = 0; b < idx.size(); ++b) {
      const int label = entries[idx[b]].label;
      if (label < 0 || label >= num_classes) throw InvalidInput("entry label outside the class range");
      auto& row = sums[static_cast<std::size_t>(label)];
      for (std::size_t c = 0; c < channels; ++c) row[c] += static_cast<double>(v[b * channels + c]);
      ++counts[static_cast<std::size_t>(label)];
    }
  });
  for (std::size_t k = 0; k < sums.size(); ++k) {
    if (counts[k] == 0) {
      sums[k].clear();
      continue;
    }
    for (double& s : sums[k]) s /= static_cast<double>(counts[k]);
  }
  return sums;
}

FoldOutcome train_fold(const model::ModelConfig& model_config, const TrainConfig& config,
                       std::span<const data::AugmentedEntry> train, std::span<const data::AugmentedEntry> test,
                       std::uint64_t seed, std::size_t fold, const EpochCallback& on_epoch) {
  if (config.precision == Precision::double_precision) {
    return train_fold_impl<double>(model_config, config, train, test, seed, fold, on_epoch);
  }
  return train_fold_impl<float>(model_config, config, train, test, seed, fold, on_epoch);
}

CvResult cross_validate(const model::ModelConfig& model_config, const TrainConfig& config, const CvDataset& dataset,
                        std::uint64_t point_key, const EpochCallback& on_epoch) {
  config.validate();
  model_config.validate();
  dataset.plan.validate();
  if (dataset.source == nullptr) throw InvalidInput("cross-validation needs a spectrogram source");

  CvResult result;
  result.splits = make_folds(dataset.utterances, config.folds, config.seed, &result.warnings);
  const std::size_t k = result.splits.size();
  result.folds.resize(k);
  std::vector<std::exception_ptr> errors(k);

  std::mutex callback_mutex;
  EpochCallback guarded;
  if (on_epoch) {
    guarded = [&](const EpochStats& s) {
      std::lock_guard lock(callback_mutex);
      on_epoch(s);
    };
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t f = next++; f < k; f = next++) {
      try {
        const auto assembled =
            data::assemble_augmented(dataset.utterances, result.splits, f, dataset.plan, dataset.source);
        result.folds[f] = train_fold(model_config, config, assembled.train, assembled.test,
                                     fold_seed(config.seed, f, point_key), f, guarded);
      } catch (...) {
        errors[f] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(config.threads), k);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  result.pooled = ConfusionMatrix(model_config.num_classes);
  for (const auto& f : result.folds) result.pooled += f.confusion;
  result.metrics = metrics_from_confusion(result.pooled);
  return result;
}

#define SER_INSTANTIATE_TRAIN(T)                                                                                  \
  template ag::Tensor<T> make_batch<T>(std::span<const data::AugmentedEntry>, std::span<const std::size_t>);       \
  template std::vector<int> predict<T>(model::Model<T>&, std::span<const data::AugmentedEntry>, std::size_t);      \
  template std::vector<std::vector<double>> eca_class_means<T>(model::Model<T>&,                                   \
                                                               std::span<const data::AugmentedEntry>, int, int,    \
                                                               std::size_t);

SER_INSTANTIATE_TRAIN(float)
SER_INSTANTIATE_TRAIN(double)

#undef SER_INSTANTIATE_TRAIN

}  // namespace ser::train
