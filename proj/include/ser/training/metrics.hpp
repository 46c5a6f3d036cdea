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
#include <string>
#include <vector>

namespace ser::train {

class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int num_classes);

  int num_classes() const { return n_; }
  std::int64_t at(int truth, int predicted) const { return counts_.at(index(truth, predicted)); }
  void add(int truth, int predicted, std::int64_t count = 1);
  std::int64_t row_sum(int truth) const;
  std::int64_t total() const;

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

  // Rows are true classes, columns predictions.
  static ConfusionMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows);
  std::vector<std::vector<std::int64_t>> rows() const;

 private:
  std::size_t index(int truth, int predicted) const;
  int n_ = 0;
  std::vector<std::int64_t> counts_;
};

struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Fraction&, const Fraction&) = default;
};

struct ExactMetrics {
  Fraction ua, wa, acc;
};

struct Metrics {
  double ua = 0.0;
  double wa = 0.0;
  double acc = 0.0;
};

// UA is the mean per-class recall, WA the overall accuracy, ACC their mean.
// Throws InvalidInput when a class has no samples.
ExactMetrics exact_metrics_from_confusion(const ConfusionMatrix& cm);
Metrics metrics_from_confusion(const ConfusionMatrix& cm);

std::vector<double> per_class_recall(const ConfusionMatrix& cm);

}  // namespace ser::train
