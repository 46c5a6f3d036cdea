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
#include <string>
#include <vector>

#include "ser/dsp.hpp"

namespace ser::data {

// SERC layout, all integers little-endian:
//   "SERC" | u32 format_version | u8 dataset_version | u32 T | u32 M |
//   u8 label (255 = unlabeled) | u16 id_len | id bytes (UTF-8) |
//   T*M f32 payload, time-major
inline constexpr std::uint32_t kCacheFormatVersion = 1;

std::size_t cache_header_size(const std::string& utterance_id);

std::vector<std::uint8_t> encode_cache(const dsp::LogMelSpectrogram& spec);
// Throws BadMagic, VersionMismatch, TruncatedData or FormatError.
dsp::LogMelSpectrogram decode_cache(std::span<const std::uint8_t> bytes);

// Writes to a temporary sibling and renames it into place.
void write_cache(const dsp::LogMelSpectrogram& spec, const std::filesystem::path& path);
dsp::LogMelSpectrogram read_cache(const std::filesystem::path& path);

// <root>/v<version>/<utterance_id>.serc
std::filesystem::path cache_path(const std::filesystem::path& root, const std::string& utterance_id, int version);

// Shared helpers for the binary containers.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace ser::data
