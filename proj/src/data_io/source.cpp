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

#include <string>

#include "ser/data/cache.hpp"
#include "ser/data/source.hpp"
#include "ser/errors.hpp"

namespace ser::data {

void InMemorySource::add(dsp::LogMelSpectrogram spec) {
  auto key = std::make_pair(spec.utterance_id, spec.version_id);
  items_[std::move(key)] = std::make_shared<const dsp::LogMelSpectrogram>(std::move(spec));
}

std::shared_ptr<const dsp::LogMelSpectrogram> InMemorySource::get(const std::string& utterance_id, int version) const {
  auto it = items_.find({utterance_id, version});
  if (it == items_.end()) {
    throw InvalidInput("no spectrogram for '" + utterance_id + "' at version " + std::to_string(version));
  }
  return it->second;
}

SignalSource::SignalSource(std::vector<SynthUtterance> utterances, dsp::PreprocessOptions options)
    : options_(options) {
  for (auto& u : utterances) {
    const std::string id = u.utterance_id;
    if (!utterances_.emplace(id, std::move(u)).second) throw InvalidInput("duplicate utterance id '" + id + "'");
  }
}

std::shared_ptr<const dsp::LogMelSpectrogram> SignalSource::get(const std::string& utterance_id, int version) const {
  const auto key = std::make_pair(utterance_id, version);
  {
    std::lock_guard lock(mutex_);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  auto u = utterances_.find(utterance_id);
  if (u == utterances_.end()) throw InvalidInput("unknown utterance '" + utterance_id + "'");
  dsp::LogMelSpectrogram spec = dsp::preprocess_version(u->second.signal, dsp::dataset_version(version), options_);
  spec.utterance_id = utterance_id;
  spec.label = u->second.label;
  auto shared = std::make_shared<const dsp::LogMelSpectrogram>(std::move(spec));
  std::lock_guard lock(mutex_);
  return memo_.emplace(key, std::move(shared)).first->second;
}

std::shared_ptr<const dsp::LogMelSpectrogram> CacheDirectorySource::get(const std::string& utterance_id,
                                                                        int version) const {
  const auto key = std::make_pair(utterance_id, version);
  {
    std::lock_guard lock(mutex_);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  const auto path = cache_path(root_, utterance_id, version);
  if (!std::filesystem::exists(path)) throw InvalidInput("missing spectrogram cache " + path.string());
  auto spec = std::make_shared<const dsp::LogMelSpectrogram>(read_cache(path));
  if (spec->utterance_id != utterance_id || spec->version_id != version) {
    throw FormatError(path.string() + " holds '" + spec->utterance_id + "' v" + std::to_string(spec->version_id));
  }
  std::lock_guard lock(mutex_);
  return memo_.emplace(key, std::move(spec)).first->second;
}

}  // namespace ser::data
