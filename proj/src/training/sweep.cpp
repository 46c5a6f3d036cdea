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
#include <string>
#include <tuple>

#include "ser/errors.hpp"
#include "ser/training/sweep.hpp"

namespace ser::train {

std::string SweepPoint::label() const {
  std::string out = model.label();
  if (!plan.train_versions.empty() || !plan.include_base) {
    out += "+aug[" + std::to_string(plan.test_version) + ";";
    for (std::size_t i = 0; i < plan.train_versions.size(); ++i) {
      if (i != 0) out += ",";
      out += std::to_string(plan.train_versions[i]);
    }
    if (!plan.include_base) out += ";nobase";
    out += "]";
  }
  return out;
}

std::string SweepPoint::id() const { return label() + "@v" + std::to_string(plan.test_version); }

std::uint64_t SweepPoint::key() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : id()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void sort_rows(std::vector<SweepRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.version, a.config) < std::tie(b.version, b.config);
  });
}

std::vector<SweepRow> run_sweep(std::span<const SweepPoint> grid, const TrainConfig& config,
                                std::span<const data::LabeledUtterance> utterances,
                                const data::SpectrogramSource& source, const SweepOptions& options) {
  if (grid.empty()) throw InvalidConfig("sweep grid is empty");
  config.validate();
  std::vector<SweepRow> rows;
  for (const auto& point : grid) {
    const std::string label = point.label();
    if (auto it = options.completed.find(point.id()); it != options.completed.end()) {
      rows.push_back(it->second);
      continue;
    }
    SweepRow row;
    row.version = point.plan.test_version;
    row.config = label;
    row.seed = config.seed;
    try {
      point.model.validate();
      row.params = model::Model<float>(point.model, 0).parameter_count();
      CvDataset dataset{{utterances.begin(), utterances.end()}, &source, point.plan};
      row.metrics = cross_validate(point.model, config, dataset, point.key(), options.on_epoch).metrics;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    if (options.on_row) options.on_row(row);
    rows.push_back(std::move(row));
  }
  sort_rows(rows);
  return rows;
}

}  // namespace ser::train
