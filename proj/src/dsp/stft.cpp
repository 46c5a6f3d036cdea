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

#include <bit>
#include <string>

#include "ser/dsp.hpp"
#include "ser/errors.hpp"

namespace ser::dsp {

StftFrameSet stft(const AudioSignal& signal, const DatasetVersion& version, WindowKind window, int fft_size) {
  validate(signal);
  const int win = version.window_samples(signal.sample_rate);
  const int stride = version.stride_samples(signal.sample_rate);
  if (win <= 0 || stride <= 0) throw InvalidConfig("window and stride must be positive");
  if (static_cast<std::size_t>(win) > signal.samples.size()) {
    throw InvalidConfig("window of " + std::to_string(win) + " samples is longer than the signal (" +
                        std::to_string(signal.samples.size()) + " samples)");
  }
  if (fft_size == 0) fft_size = next_power_of_two(win);
  if (fft_size < win || !std::has_single_bit(static_cast<unsigned>(fft_size))) {
    throw InvalidConfig("fft size " + std::to_string(fft_size) + " must be a power of two >= window " +
                        std::to_string(win));
  }

  const std::vector<double> taper = make_window(window, win);
  const auto len = static_cast<long long>(signal.samples.size());
  const long long pad = win / 2;

  StftFrameSet out;
  out.stride_samples = stride;
  out.window_samples = win;
  out.fft_size = fft_size;
  out.num_bins = static_cast<std::size_t>(fft_size / 2 + 1);
  out.num_frames = static_cast<std::size_t>(len / stride + 1);
  out.frames.resize(out.num_frames * out.num_bins);

  std::vector<std::complex<double>> buf(static_cast<std::size_t>(fft_size));
  for (std::size_t t = 0; t < out.num_frames; ++t) {
    std::fill(buf.begin(), buf.end(), std::complex<double>{});
    const long long origin = static_cast<long long>(t) * stride - pad;
    for (int n = 0; n < win; ++n) {
      const long long idx = origin + n;
      if (idx >= 0 && idx < len) {
        buf[static_cast<std::size_t>(n)] = signal.samples[static_cast<std::size_t>(idx)] * taper[static_cast<std::size_t>(n)];
      }
    }
    fft_inplace(buf);
    std::copy_n(buf.begin(), out.num_bins, out.frames.begin() + static_cast<std::ptrdiff_t>(t * out.num_bins));
  }
  return out;
}

}  // namespace ser::dsp
