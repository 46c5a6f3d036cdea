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

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "ser/data/synth.hpp"
#include "ser/dsp.hpp"

namespace ser::data {

// Lookup of the log-Mel image of one utterance under one dataset version.
// Implementations are safe to query from several threads.
class SpectrogramSource {
 public:
  virtual ~SpectrogramSource() = default;
  virtual std::shared_ptr<const dsp::LogMelSpectrogram> get(const std::string& utterance_id, int version) const = 0;
};

class InMemorySource final : public SpectrogramSource {
 public:
  void add(dsp::LogMelSpectrogram spec);
  std::shared_ptr<const dsp::LogMelSpectrogram> get(const std::string& utterance_id, int version) const override;

 private:
  std::map<std::pair<std::string, int>, std::shared_ptr<const dsp::LogMelSpectrogram>> items_;
};

// Preprocesses raw signals on first request and memoizes the result.
class SignalSource final : public SpectrogramSource {
 public:
  explicit SignalSource(std::vector<SynthUtterance> utterances, dsp::PreprocessOptions options = {});
  std::shared_ptr<const dsp::LogMelSpectrogram> get(const std::string& utterance_id, int version) const override;

 private:
  std::map<std::string, SynthUtterance> utterances_;
  dsp::PreprocessOptions options_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<std::string, int>, std::shared_ptr<const dsp::LogMelSpectrogram>> memo_;
};

// Reads SERC files from a cache tree on first request.
class CacheDirectorySource final : public SpectrogramSource {
 public:
  explicit CacheDirectorySource(std::filesystem::path root) : root_(std::move(root)) {}
  std::shared_ptr<const dsp::LogMelSpectrogram> get(const std::string& utterance_id, int version) const override;
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<std::string, int>, std::shared_ptr<const dsp::LogMelSpectrogram>> memo_;
};

}  // namespace ser::data
