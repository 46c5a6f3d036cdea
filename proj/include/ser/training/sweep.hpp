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
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ser/training/train.hpp"

namespace ser::train {

struct SweepPoint {
  model::ModelConfig model;
  data::AugmentationPlan plan = data::AugmentationPlan::single(8);

  // Model label, with "+aug[test;extra,...]" appended when extra versions are
  // trained on.
  std::string label() const;
  // label() qualified with the test version; unique per distinct point.
  std::string id() const;
  // Stable hash of id(); duplicated points share it and thus their seeds.
  std::uint64_t key() const;
};

struct SweepRow {
  int version = 0;  // test version
  std::string config;
  std::optional<Metrics> metrics;
  std::size_t params = 0;
  std::uint64_t seed = 0;
  std::string error;  // empty on success
};

struct SweepOptions {
  // Rows already computed, keyed by point id; matching points are skipped.
  std::map<std::string, SweepRow> completed;
  std::function<void(const SweepRow&)> on_row;
  EpochCallback on_epoch;
};

// Rows sorted by (version, config). A failing point yields a row with
// `error` set and the sweep continues.
std::vector<SweepRow> run_sweep(std::span<const SweepPoint> grid, const TrainConfig& config,
                                std::span<const data::LabeledUtterance> utterances,
                                const data::SpectrogramSource& source, const SweepOptions& options = {});

void sort_rows(std::vector<SweepRow>& rows);

}  // namespace ser::train
