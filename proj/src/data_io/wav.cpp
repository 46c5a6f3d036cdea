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
#include <fstream>
#include <string>

#include "bytes.hpp"
#include "ser/data/cache.hpp"
#include "ser/data/wav.hpp"
#include "ser/errors.hpp"

namespace ser::data {

namespace {
constexpr std::uint16_t kPcmFormat = 1;
}

dsp::AudioSignal parse_wav(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "wav");
  if (r.str(4) != "RIFF") throw FormatError("wav: missing RIFF header");
  r.u32();  // riff size; not trusted
  if (r.str(4) != "WAVE") throw FormatError("wav: RIFF form type is not WAVE");

  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0;
  std::uint32_t rate = 0;
  while (r.remaining() > 0) {
    const std::string id = r.str(4);
    const std::uint32_t size = r.u32();
    if (id == "fmt ") {
      detail::ByteReader fmt(r.raw(size), "wav fmt chunk");
      const std::uint16_t codec = fmt.u16();
      channels = fmt.u16();
      rate = fmt.u32();
      fmt.u32();  // byte rate
      fmt.u16();  // block align
      bits = fmt.u16();
      if (codec != kPcmFormat) throw UnsupportedCodec("wav: codec " + std::to_string(codec) + " is not PCM");
      if (channels != 1) {
        throw UnsupportedChannelCount("wav: " + std::to_string(channels) + " channels; only mono is supported");
      }
      if (bits != 16) throw UnsupportedCodec("wav: " + std::to_string(bits) + "-bit samples; only 16-bit PCM");
      if (rate == 0) throw FormatError("wav: zero sample rate");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError("wav: data chunk before fmt chunk");
      if (size % 2 != 0) throw TruncatedData("wav: data chunk holds a partial sample");
      auto payload = r.raw(size);
      dsp::AudioSignal signal;
      signal.sample_rate = static_cast<int>(rate);
      signal.samples.resize(size / 2);
      for (std::size_t i = 0; i < signal.samples.size(); ++i) {
        const auto raw = static_cast<std::uint16_t>(payload[2 * i] | (payload[2 * i + 1] << 8));
        signal.samples[i] = static_cast<std::int16_t>(raw) / 32768.0;
      }
      return signal;
    } else {
      r.raw(size);
    }
    if (size % 2 == 1 && r.remaining() > 0) r.u8();  // chunks are word aligned
  }
  throw TruncatedData("wav: no data chunk");
}

dsp::AudioSignal read_wav(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return parse_wav(bytes);
  } catch (const FormatError& e) {
    // Re-throw with the path while preserving the concrete error type.
    const std::string msg = path.string() + ": " + e.what();
    if (dynamic_cast<const UnsupportedCodec*>(&e)) throw UnsupportedCodec(msg);
    if (dynamic_cast<const UnsupportedChannelCount*>(&e)) throw UnsupportedChannelCount(msg);
    if (dynamic_cast<const TruncatedData*>(&e)) throw TruncatedData(msg);
    throw FormatError(msg);
  }
}

std::vector<std::uint8_t> encode_wav(const dsp::AudioSignal& signal) {
  dsp::validate(signal);
  const auto data_bytes = static_cast<std::uint32_t>(signal.samples.size() * 2);
  detail::ByteWriter w;
  w.bytes("RIFF");
  w.u32(36 + data_bytes);
  w.bytes("WAVE");
  w.bytes("fmt ");
  w.u32(16);
  w.u16(kPcmFormat);
  w.u16(1);
  w.u32(static_cast<std::uint32_t>(signal.sample_rate));
  w.u32(static_cast<std::uint32_t>(signal.sample_rate) * 2);
  w.u16(2);
  w.u16(16);
  w.bytes("data");
  w.u32(data_bytes);
  for (double s : signal.samples) {
    const double q = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    w.u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  return w.take();
}

void write_wav(const std::filesystem::path& path, const dsp::AudioSignal& signal) {
  write_file_atomic(path, encode_wav(signal));
}

}  // namespace ser::data
