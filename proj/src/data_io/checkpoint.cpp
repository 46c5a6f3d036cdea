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
#include <string>

#include "bytes.hpp"
#include "ser/data/cache.hpp"
#include "ser/data/checkpoint.hpp"
#include "ser/errors.hpp"

namespace ser::data {

namespace {

constexpr std::string_view kMagic = "SERM";
constexpr std::uint8_t kParameterKind = 0;
constexpr std::uint8_t kBufferKind = 1;

void put_array(detail::ByteWriter& w, const model::NamedArray& a, std::uint8_t kind) {
  if (a.name.size() > 0xffff) throw InvalidInput("tensor name too long: " + a.name);
  std::size_t n = 1;
  for (auto d : a.shape) n *= d;
  if (n != a.values.size()) throw InvalidInput("tensor '" + a.name + "' values do not match its shape");
  w.u16(static_cast<std::uint16_t>(a.name.size()));
  w.bytes(a.name);
  w.u8(kind);
  w.u32(static_cast<std::uint32_t>(a.shape.size()));
  for (auto d : a.shape) w.u32(static_cast<std::uint32_t>(d));
  for (float v : a.values) w.f32(v);
}

}  // namespace

nlohmann::json model_config_to_json(const model::ModelConfig& config) {
  nlohmann::json eca = nlohmann::json::array();
  for (const auto& p : config.eca) eca.push_back({p.layer, p.kernel});
  return {{"scale_n", config.scale_n},
          {"eca", eca},
          {"num_classes", config.num_classes},
          {"input_time", config.input_time},
          {"input_mel", config.input_mel}};
}

model::ModelConfig model_config_from_json(const nlohmann::json& j) {
  model::ModelConfig c;
  try {
    c.scale_n = j.value("scale_n", c.scale_n);
    c.num_classes = j.value("num_classes", c.num_classes);
    c.input_time = j.value("input_time", c.input_time);
    c.input_mel = j.value("input_mel", c.input_mel);
    if (j.contains("eca")) {
      for (const auto& p : j.at("eca")) {
        if (!p.is_array() || p.size() != 2) throw InvalidConfig("eca entries must be [layer, kernel] pairs");
        c.eca.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("model config: ") + e.what());
  }
  std::sort(c.eca.begin(), c.eca.end());
  c.validate();
  return c;
}

std::vector<std::uint8_t> encode_checkpoint(const model::ModelState& state) {
  detail::ByteWriter w;
  w.bytes(kMagic);
  w.u32(kCheckpointFormatVersion);
  const std::string header = model_config_to_json(state.config).dump();
  w.u32(static_cast<std::uint32_t>(header.size()));
  w.bytes(header);
  w.u32(static_cast<std::uint32_t>(state.parameters.size() + state.buffers.size()));
  for (const auto& a : state.parameters) put_array(w, a, kParameterKind);
  for (const auto& a : state.buffers) put_array(w, a, kBufferKind);
  return w.take();
}

model::ModelState decode_checkpoint(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "checkpoint");
  if (bytes.size() < kMagic.size() || r.str(kMagic.size()) != kMagic) {
    throw BadMagic("checkpoint: bad magic (expected SERM)");
  }
  const std::uint32_t format = r.u32();
  if (format != kCheckpointFormatVersion) {
    throw VersionMismatch("checkpoint: format version " + std::to_string(format) + ", expected " +
                          std::to_string(kCheckpointFormatVersion));
  }
  model::ModelState state;
  const std::string header = r.str(r.u32());
  try {
    state.config = model_config_from_json(nlohmann::json::parse(header));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("checkpoint: malformed config header: ") + e.what());
  }
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    model::NamedArray a;
    a.name = r.str(r.u16());
    const std::uint8_t kind = r.u8();
    if (kind != kParameterKind && kind != kBufferKind) {
      throw FormatError("checkpoint: tensor '" + a.name + "' has unknown kind " + std::to_string(kind));
    }
    const std::uint32_t rank = r.u32();
    std::size_t n = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      a.shape.push_back(r.u32());
      n *= a.shape.back();
    }
    if (n > r.remaining() / 4) throw TruncatedData("checkpoint: tensor '" + a.name + "' payload truncated");
    a.values.resize(n);
    for (float& v : a.values) v = r.f32();
    (kind == kParameterKind ? state.parameters : state.buffers).push_back(std::move(a));
  }
  if (r.remaining() != 0) throw FormatError("checkpoint: trailing bytes after last tensor");
  return state;
}

void save_checkpoint(const model::ModelState& state, const std::filesystem::path& path) {
  write_file_atomic(path, encode_checkpoint(state));
}

model::ModelState load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file_bytes(path));
}

model::ModelState load_checkpoint(const std::filesystem::path& path, const model::ModelConfig& expected) {
  auto state = load_checkpoint(path);
  if (!(state.config == expected)) {
    throw IncompatibleCheckpoint(path.string() + " was saved for " + state.config.label() + ", expected " +
                                 expected.label());
  }
  return state;
}

}  // namespace ser::data
