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

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "ser/dsp.hpp"
#include "ser/errors.hpp"

namespace ser::dsp {

namespace {

constexpr std::array<DatasetVersion, 8> kVersions{{
    {1, 15, 5},
    {2, 20, 10},
    {3, 25, 15},
    {4, 30, 20},
    {5, 35, 25},
    {6, 40, 30},
    {7, 45, 35},
    {8, 50, 40},
}};

int ms_to_samples(int ms, int sample_rate, const char* what) {
  const long long scaled = static_cast<long long>(ms) * sample_rate;
  if (scaled % 1000 != 0) {
    throw InvalidConfig(std::string(what) + " of " + std::to_string(ms) + " ms is not a whole number of samples at " +
                        std::to_string(sample_rate) + " Hz");
  }
  return static_cast<int>(scaled / 1000);
}

}  // namespace

int DatasetVersion::window_samples(int sample_rate) const { return ms_to_samples(window_ms, sample_rate, "window"); }

int DatasetVersion::stride_samples(int sample_rate) const { return ms_to_samples(stride_ms(), sample_rate, "stride"); }

std::span<const DatasetVersion> dataset_versions() { return kVersions; }

const DatasetVersion& dataset_version(int id) {
  if (id < 1 || id > static_cast<int>(kVersions.size())) {
    throw InvalidConfig("dataset version must be in 1..8, got " + std::to_string(id));
  }
  return kVersions[static_cast<std::size_t>(id - 1)];
}

void validate(const AudioSignal& signal) {
  if (signal.sample_rate <= 0) {
    throw InvalidInput("sample rate must be positive, got " + std::to_string(signal.sample_rate));
  }
  for (std::size_t i = 0; i < signal.samples.size(); ++i) {
    if (!std::isfinite(signal.samples[i])) {
      throw InvalidInput("non-finite sample at index " + std::to_string(i));
    }
  }
}

std::vector<double> make_window(WindowKind kind, int length) {
  if (length <= 0) throw InvalidConfig("window length must be positive");
  std::vector<double> w(static_cast<std::size_t>(length), 1.0);
  if (kind == WindowKind::hamming) {
    for (int n = 0; n < length; ++n) {
      w[static_cast<std::size_t>(n)] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / length);
    }
  }
  return w;
}

AudioSignal segment_signal(const AudioSignal& signal, double target_seconds) {
  if (!(target_seconds > 0.0) || !std::isfinite(target_seconds)) {
    throw InvalidInput("target duration must be positive");
  }
  if (signal.samples.empty()) throw InvalidInput("cannot segment an empty signal");
  validate(signal);

  const auto target = static_cast<std::size_t>(std::llround(target_seconds * signal.sample_rate));
  const std::size_t len = signal.samples.size();

  AudioSignal out;
  out.sample_rate = signal.sample_rate;
  if (len == target) {
    out.samples = signal.samples;
  } else if (len < target) {
    const std::size_t lead = (target - len) / 2;
    out.samples.assign(target, 0.0);
    std::copy(signal.samples.begin(), signal.samples.end(), out.samples.begin() + static_cast<std::ptrdiff_t>(lead));
  } else {
    const std::size_t lead = (len - target) / 2;
    const auto first = signal.samples.begin() + static_cast<std::ptrdiff_t>(lead);
    out.samples.assign(first, first + static_cast<std::ptrdiff_t>(target));
  }
  return out;
}

}  // namespace ser::dsp
