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

#include <atomic>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>
#include <thread>

#include "bytes.hpp"
#include "ser/data/cache.hpp"
#include "ser/errors.hpp"

namespace ser::data {

namespace {
constexpr std::string_view kMagic = "SERC";
constexpr std::uint8_t kUnlabeled = 255;
}  // namespace

std::size_t cache_header_size(const std::string& utterance_id) {
  return 4 + 4 + 1 + 4 + 4 + 1 + 2 + utterance_id.size();
}

std::vector<std::uint8_t> encode_cache(const dsp::LogMelSpectrogram& spec) {
  if (spec.version_id < 1 || spec.version_id > 8) {
    throw InvalidInput("spectrogram has no valid dataset version (" + std::to_string(spec.version_id) + ")");
  }
  if (spec.data.size() != spec.num_frames * spec.n_mels) {
    throw InvalidInput("spectrogram data does not match its declared shape");
  }
  if (spec.utterance_id.size() > 0xffff) throw InvalidInput("utterance id too long for the cache header");
  if (spec.label < -1 || spec.label >= kUnlabeled) throw InvalidInput("label out of range for the cache header");

  detail::ByteWriter w;
  w.bytes(kMagic);
  w.u32(kCacheFormatVersion);
  w.u8(static_cast<std::uint8_t>(spec.version_id));
  w.u32(static_cast<std::uint32_t>(spec.num_frames));
  w.u32(static_cast<std::uint32_t>(spec.n_mels));
  w.u8(spec.label < 0 ? kUnlabeled : static_cast<std::uint8_t>(spec.label));
  w.u16(static_cast<std::uint16_t>(spec.utterance_id.size()));
  w.bytes(spec.utterance_id);
  for (float v : spec.data) w.f32(v);
  return w.take();
}

dsp::LogMelSpectrogram decode_cache(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "spectrogram cache");
  if (bytes.size() < kMagic.size() || r.str(kMagic.size()) != kMagic) {
    throw BadMagic("spectrogram cache: bad magic (expected SERC)");
  }
  const std::uint32_t format = r.u32();
  if (format != kCacheFormatVersion) {
    throw VersionMismatch("spectrogram cache: format version " + std::to_string(format) + ", expected " +
                          std::to_string(kCacheFormatVersion));
  }
  dsp::LogMelSpectrogram spec;
  spec.version_id = r.u8();
  if (spec.version_id < 1 || spec.version_id > 8) {
    throw FormatError("spectrogram cache: dataset version " + std::to_string(spec.version_id) + " outside 1..8");
  }
  spec.num_frames = r.u32();
  spec.n_mels = r.u32();
  const std::uint8_t label = r.u8();
  spec.label = label == kUnlabeled ? -1 : label;
  spec.utterance_id = r.str(r.u16());

  const std::size_t count = spec.num_frames * spec.n_mels;
  if (r.remaining() < count * 4) {
    throw TruncatedData("spectrogram cache: payload holds " + std::to_string(r.remaining()) + " bytes, expected " +
                        std::to_string(count * 4));
  }
  if (r.remaining() > count * 4) throw FormatError("spectrogram cache: trailing bytes after payload");
  spec.data.resize(count);
  for (float& v : spec.data) v = r.f32();
  return spec;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  static std::atomic<unsigned> counter{0};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tag = std::hash<std::thread::id>{}(std::this_thread::get_id()) ^ counter.fetch_add(1);
  std::filesystem::path tmp = path;
  tmp += ".tmp-" + std::to_string(tag);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_cache(const dsp::LogMelSpectrogram& spec, const std::filesystem::path& path) {
  write_file_atomic(path, encode_cache(spec));
}

dsp::LogMelSpectrogram read_cache(const std::filesystem::path& path) { return decode_cache(read_file_bytes(path)); }

std::filesystem::path cache_path(const std::filesystem::path& root, const std::string& utterance_id, int version) {
  return root / ("v" + std::to_string(version)) / (utterance_id + ".serc");
}

}  // namespace ser::data
