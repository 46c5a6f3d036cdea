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
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "ser/data/augment.hpp"
#include "ser/data/synth.hpp"
#include "ser/model.hpp"
#include "ser/training/sweep.hpp"

namespace ser::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

inline constexpr const char* kCacheDirEnv = "SER_FORGE_CACHE_DIR";

struct DataConfig {
  std::string kind = "synthetic";  // "synthetic" or "manifest"
  int synth_per_class = 16;
  std::uint64_t synth_seed = data::kDefaultSynthSeed;
  std::string manifest;   // manifest CSV for kind "manifest"
  std::string cache_dir;  // spectrogram caches for kind "manifest"
};

struct RunConfig {
  std::string preset;  // informational, e.g. "paper-best"
  model::ModelConfig model = model::ModelConfig::with_preset(1, model::EcaPreset::proposed);
  train::TrainConfig train;
  DataConfig data;
  data::AugmentationPlan plan = data::AugmentationPlan::single(8);

  // Throws InvalidConfig.
  void validate() const;
};

RunConfig default_run_config();
// Channel scale 4, attention with k = 7 after blocks 5 and 6, testing on
// version 8 while training on versions 8, 7, ..., 1.
RunConfig paper_best_config();

// Missing keys keep their defaults; unknown keys are rejected.
RunConfig parse_run_config(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
// SHA-256 over "blob <size>\0" followed by the content.
std::string blob_hash(std::span<const std::uint8_t> bytes);

// Mapping used by the executable: validation problems give 1, everything
// else 2.
int exit_code_for(const std::exception& e);

struct PreprocessOptions {
  std::filesystem::path manifest;
  std::vector<int> versions{1, 2, 3, 4, 5, 6, 7, 8};
  std::filesystem::path out;  // empty: $SER_FORGE_CACHE_DIR
  int threads = 1;
  bool force = false;
};

struct SynthOptions {
  std::filesystem::path out;
  int per_class = 16;
  std::uint64_t seed = data::kDefaultSynthSeed;
};

struct TrainOptions {
  std::filesystem::path config;  // empty: defaults
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool quiet = false;
};

struct EvaluateOptions {
  std::filesystem::path run;
  std::optional<int> threads;
};

struct SweepOptions {
  std::filesystem::path grid;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool force = false;
  bool quiet = false;
};

struct ReportOptions {
  std::filesystem::path run;
  std::filesystem::path out;  // empty: the run directory
};

int cmd_synth(const SynthOptions& options, std::ostream& log);
int cmd_preprocess(const PreprocessOptions& options, std::ostream& log);
int cmd_train(const TrainOptions& options, std::ostream& log);
int cmd_evaluate(const EvaluateOptions& options, std::ostream& log);
int cmd_sweep(const SweepOptions& options, std::ostream& log);
int cmd_report(const ReportOptions& options, std::ostream& log);

// Sweep grid file: {"base": <run config>, "scale_n": [...], "eca": [...],
// "versions": [...], "augmentation": [...]}; the grid is their product.
struct SweepGrid {
  RunConfig base;
  std::vector<train::SweepPoint> points;
};
SweepGrid parse_sweep_grid(const nlohmann::json& j);

}  // namespace ser::cli
