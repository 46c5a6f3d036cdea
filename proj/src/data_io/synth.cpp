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
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "ser/data/labels.hpp"
#include "ser/data/synth.hpp"
#include "ser/errors.hpp"
#include "ser/rng.hpp"

namespace ser::data {

namespace {

// Frozen generator constants; the regression bounds in the tests depend on them.
struct Family {
  double f0_lo, f0_hi;        // Hz
  int harmonics;
  double rolloff;             // harmonic amplitude ~ 1 / h^rolloff
  double am_lo, am_hi;        // modulation rate, Hz
  double am_depth;
  double tone_lo, tone_hi;    // peak tone amplitude
  double noise;               // noise standard deviation
};

constexpr std::array<Family, kNumClasses> kFamilies{{
    {120.0, 180.0, 12, 0.7, 1.5, 3.0, 0.5, 0.50, 0.80, 0.010},  // angry
    {80.0, 110.0, 4, 2.0, 0.5, 1.0, 0.3, 0.20, 0.35, 0.005},    // sadness
    {250.0, 350.0, 8, 1.0, 6.0, 9.0, 0.7, 0.40, 0.70, 0.010},   // happiness
    {180.0, 240.0, 3, 1.0, 3.0, 5.0, 0.2, 0.04, 0.06, 0.150},   // neutral
}};

constexpr int kRate = dsp::kDefaultSampleRate;
constexpr double kMinSeconds = 3.0;
constexpr double kMaxSeconds = 6.0;

dsp::AudioSignal render(const Family& fam, Rng& rng) {
  const double seconds = rng.uniform(kMinSeconds, kMaxSeconds);
  const double f0 = rng.uniform(fam.f0_lo, fam.f0_hi);
  const double am_rate = rng.uniform(fam.am_lo, fam.am_hi);
  const double amplitude = rng.uniform(fam.tone_lo, fam.tone_hi);
  const double am_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);

  std::vector<double> weights(static_cast<std::size_t>(fam.harmonics));
  double total = 0.0;
  for (int h = 1; h <= fam.harmonics; ++h) {
    weights[static_cast<std::size_t>(h - 1)] = 1.0 / std::pow(h, fam.rolloff);
    total += weights[static_cast<std::size_t>(h - 1)];
  }

  dsp::AudioSignal sig;
  sig.sample_rate = kRate;
  sig.samples.resize(static_cast<std::size_t>(std::llround(seconds * kRate)));
  for (std::size_t n = 0; n < sig.samples.size(); ++n) {
    const double t = static_cast<double>(n) / kRate;
    double tone = 0.0;
    for (int h = 1; h <= fam.harmonics; ++h) {
      const double f = f0 * h;
      if (f >= kRate / 2.0) break;
      tone += weights[static_cast<std::size_t>(h - 1)] * std::sin(2.0 * std::numbers::pi * f * t);
    }
    const double envelope =
        1.0 - fam.am_depth / 2.0 + fam.am_depth / 2.0 * std::sin(2.0 * std::numbers::pi * am_rate * t + am_phase);
    const double value = amplitude * envelope * tone / total + fam.noise * rng.normal();
    sig.samples[n] = std::clamp(value, -1.0, 1.0);
  }
  return sig;
}

}  // namespace

std::vector<SynthUtterance> synth_dataset(int n_per_class, std::uint64_t seed) {
  if (n_per_class < 1) throw InvalidInput("n_per_class must be >= 1");
  std::vector<SynthUtterance> out;
  out.reserve(static_cast<std::size_t>(n_per_class * kNumClasses));
  for (int label = 0; label < kNumClasses; ++label) {
    for (int i = 0; i < n_per_class; ++i) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(label), static_cast<std::uint64_t>(i)));
      char id[64];
      std::snprintf(id, sizeof id, "synth_%s_%03d", std::string(class_name(label)).c_str(), i);
      out.push_back({id, render(kFamilies[static_cast<std::size_t>(label)], rng), label});
    }
  }
  return out;
}

}  // namespace ser::data
