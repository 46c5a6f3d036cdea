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

#include "json.hpp"
#include "ser/model.hpp"

namespace ser::data {

// Checkpoint container, integers little-endian:
//   "SERM" | u32 format_version | u32 json_len | model config JSON |
//   u32 tensor_count | per tensor: u16 name_len | name | u8 kind
//   (0 parameter, 1 buffer) | u32 rank | u32 dims[rank] | f32 values
inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

nlohmann::json model_config_to_json(const model::ModelConfig& config);
// Throws InvalidConfig on malformed input.
model::ModelConfig model_config_from_json(const nlohmann::json& j);

std::vector<std::uint8_t> encode_checkpoint(const model::ModelState& state);
model::ModelState decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const model::ModelState& state, const std::filesystem::path& path);
model::ModelState load_checkpoint(const std::filesystem::path& path);
// Throws IncompatibleCheckpoint if the stored config differs from `expected`.
model::ModelState load_checkpoint(const std::filesystem::path& path, const model::ModelConfig& expected);

}  // namespace ser::data
