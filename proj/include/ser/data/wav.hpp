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
#include <span>
#include <vector>

#include "ser/dsp.hpp"

namespace ser::data {

// RIFF/WAVE, PCM 16-bit mono only. Samples are scaled by 1/32768.
// Throws UnsupportedCodec, UnsupportedChannelCount, TruncatedData or
// FormatError.
dsp::AudioSignal parse_wav(std::span<const std::uint8_t> bytes);
dsp::AudioSignal read_wav(const std::filesystem::path& path);

// 16-bit PCM mono; samples are clipped to [-1, 1) before quantization.
std::vector<std::uint8_t> encode_wav(const dsp::AudioSignal& signal);
void write_wav(const std::filesystem::path& path, const dsp::AudioSignal& signal);

}  // namespace ser::data
