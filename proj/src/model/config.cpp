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
#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include "ser/errors.hpp"
#include "ser/model.hpp"

namespace ser::model {

int original_eca_kernel(int channels) {
  if (channels < 1) throw InvalidConfig("channel count must be positive");
  const double t = std::abs(std::log2(static_cast<double>(channels)) / 2.0 + 0.5);
  int k = static_cast<int>(t);
  if (k % 2 == 0) k += 1;
  return std::max(k, 3);
}

std::vector<EcaPlacement> eca_preset(EcaPreset preset, int scale_n) {
  std::vector<EcaPlacement> out;
  switch (preset) {
    case EcaPreset::none:
      break;
    case EcaPreset::proposed:
      out = {{5, 7}, {6, 7}};
      break;
    case EcaPreset::original:
      for (int layer = 1; layer <= kNumBlocks; ++layer) {
        out.push_back({layer, original_eca_kernel(kBaseChannels[static_cast<std::size_t>(layer - 1)] * scale_n)});
      }
      break;
  }
  return out;
}

const EcaPlacement* ModelConfig::eca_at(int layer) const {
  for (const auto& p : eca) {
    if (p.layer == layer) return &p;
  }
  return nullptr;
}

void ModelConfig::validate() const {
  if (scale_n < 1) throw InvalidConfig("scale_n must be >= 1, got " + std::to_string(scale_n));
  if (num_classes < 2) throw InvalidConfig("num_classes must be >= 2");
  std::set<int> seen;
  for (const auto& p : eca) {
    if (p.layer < 1 || p.layer > kNumBlocks) {
      throw InvalidConfig("attention block placed at layer " + std::to_string(p.layer) + "; layers are 1..6");
    }
    if (!seen.insert(p.layer).second) {
      throw InvalidConfig("layer " + std::to_string(p.layer) + " has more than one attention block");
    }
    if (p.kernel < 1 || p.kernel % 2 == 0) {
      throw InvalidConfig("attention kernel at layer " + std::to_string(p.layer) + " must be odd and positive, got " +
                          std::to_string(p.kernel));
    }
  }
  // Five 2x2 pools must each see at least two rows and columns.
  for (int dim : {input_time, input_mel}) {
    int d = dim;
    for (int stage = 0; stage < kNumBlocks - 1; ++stage) {
      if (d < 2) {
        throw InvalidConfig("input extent " + std::to_string(dim) + " does not survive five 2x2 pooling stages");
      }
      d /= 2;
    }
  }
}

std::string ModelConfig::label() const {
  std::ostringstream os;
  os << 'n' << scale_n;
  if (!eca.empty()) {
    auto sorted = eca;
    std::sort(sorted.begin(), sorted.end());
    os << "+eca[";
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      os << (i ? "," : "") << sorted[i].layer << ':' << sorted[i].kernel;
    }
    os << ']';
  }
  return os.str();
}

ModelConfig ModelConfig::with_preset(int scale_n, EcaPreset preset) {
  ModelConfig cfg;
  cfg.scale_n = scale_n;
  cfg.eca = eca_preset(preset, scale_n);
  return cfg;
}

}  // namespace ser::model
