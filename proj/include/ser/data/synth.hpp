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
#include <string>
#include <vector>

#include "ser/dsp.hpp"

namespace ser::data {

struct SynthUtterance {
  std::string utterance_id;
  dsp::AudioSignal signal;
  int label = -1;
};

inline constexpr std::uint64_t kDefaultSynthSeed = 20240611;

// Four separable 16 kHz signal families, `n_per_class` each, 3-6 s long:
//   angry      120-180 Hz bright harmonic tone, slow AM, low noise
//   sadness    80-110 Hz dark tone, very slow shallow AM, quiet
//   happiness  250-350 Hz tone, fast deep AM
//   neutral    broadband noise with a faint 180-240 Hz tone
// Utterances are ordered by class, then index.
std::vector<SynthUtterance> synth_dataset(int n_per_class, std::uint64_t seed = kDefaultSynthSeed);

}  // namespace ser::data
