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

#include <numeric>
#include <string>

#include "ser/errors.hpp"
#include "ser/training/metrics.hpp"

namespace ser::train {

ConfusionMatrix::ConfusionMatrix(int num_classes) : n_(num_classes) {
  if (num_classes < 1) throw InvalidInput("confusion matrix needs at least one class");
  counts_.assign(static_cast<std::size_t>(n_ * n_), 0);
}

std::size_t ConfusionMatrix::index(int truth, int predicted) const {
  if (truth < 0 || truth >= n_ || predicted < 0 || predicted >= n_) {
    throw InvalidInput("confusion cell (" + std::to_string(truth) + "," + std::to_string(predicted) +
                       ") outside a " + std::to_string(n_) + "-class matrix");
  }
  return static_cast<std::size_t>(truth * n_ + predicted);
}

void ConfusionMatrix::add(int truth, int predicted, std::int64_t count) {
  if (count < 0) throw InvalidInput("negative confusion count");
  counts_[index(truth, predicted)] += count;
}

std::int64_t ConfusionMatrix::row_sum(int truth) const {
  std::int64_t s = 0;
  for (int j = 0; j < n_; ++j) s += at(truth, j);
  return s;
}

std::int64_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0}); }

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (n_ == 0) return *this = other;
  if (other.n_ != n_) throw InvalidShape("adding confusion matrices of different sizes");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

ConfusionMatrix ConfusionMatrix::from_rows(const std::vector<std::vector<std::int64_t>>& rows) {
  ConfusionMatrix cm(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) throw InvalidShape("confusion matrix must be square");
    for (std::size_t j = 0; j < rows.size(); ++j) cm.add(static_cast<int>(i), static_cast<int>(j), rows[i][j]);
  }
  return cm;
}

std::vector<std::vector<std::int64_t>> ConfusionMatrix::rows() const {
  std::vector<std::vector<std::int64_t>> out(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) out[static_cast<std::size_t>(i)].push_back(at(i, j));
  }
  return out;
}

namespace {

__extension__ typedef __int128 wide;

struct WideFraction {
  wide num = 0;
  wide den = 1;
};

wide gcd(wide a, wide b) {
  if (a < 0) a = -a;
  while (b != 0) {
    const wide r = a % b;
    a = b;
    b = r;
  }
  return a;
}

WideFraction reduce(WideFraction f) {
  const wide g = gcd(f.num, f.den);
  if (g > 1) {
    f.num /= g;
    f.den /= g;
  }
  return f;
}

WideFraction plus(WideFraction a, WideFraction b) {
  return reduce({a.num * b.den + b.num * a.den, a.den * b.den});
}

Fraction narrow(WideFraction f) {
  f = reduce(f);
  constexpr wide limit = static_cast<wide>(INT64_MAX);
  if (f.num > limit || f.den > limit) throw NumericError("metric fraction exceeds 64-bit range");
  return {static_cast<std::int64_t>(f.num), static_cast<std::int64_t>(f.den)};
}

}  // namespace

ExactMetrics exact_metrics_from_confusion(const ConfusionMatrix& cm) {
  const int n = cm.num_classes();
  if (n == 0) throw InvalidInput("empty confusion matrix");
  WideFraction recall_sum{0, 1};
  std::int64_t trace = 0;
  for (int i = 0; i < n; ++i) {
    const std::int64_t support = cm.row_sum(i);
    if (support == 0) {
      throw InvalidInput("recall undefined: class " + std::to_string(i) + " has no samples in the confusion matrix");
    }
    recall_sum = plus(recall_sum, reduce({cm.at(i, i), support}));
    trace += cm.at(i, i);
  }
  const WideFraction ua = reduce({recall_sum.num, recall_sum.den * n});
  const WideFraction wa = reduce({trace, cm.total()});
  WideFraction acc = plus(ua, wa);
  acc.den *= 2;
  return {narrow(ua), narrow(wa), narrow(acc)};
}

Metrics metrics_from_confusion(const ConfusionMatrix& cm) {
  const ExactMetrics e = exact_metrics_from_confusion(cm);
  return {e.ua.value(), e.wa.value(), e.acc.value()};
}

std::vector<double> per_class_recall(const ConfusionMatrix& cm) {
  std::vector<double> out;
  for (int i = 0; i < cm.num_classes(); ++i) {
    const std::int64_t support = cm.row_sum(i);
    out.push_back(support == 0 ? 0.0 : static_cast<double>(cm.at(i, i)) / static_cast<double>(support));
  }
  return out;
}

}  // namespace ser::train
