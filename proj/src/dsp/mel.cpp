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
#include <bit>
#include <cmath>
#include <string>

#include "ser/dsp.hpp"
#include "ser/errors.hpp"

namespace ser::dsp {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank build_mel_filterbank(int fft_size, int n_mels, int sample_rate, double f_min, double f_max) {
  if (fft_size <= 0 || !std::has_single_bit(static_cast<unsigned>(fft_size))) {
    throw InvalidConfig("fft size must be a positive power of two, got " + std::to_string(fft_size));
  }
  if (n_mels < 1) throw InvalidConfig("need at least one mel filter");
  if (sample_rate <= 0) throw InvalidConfig("sample rate must be positive");
  if (!(f_min >= 0.0 && f_min < f_max && f_max <= sample_rate / 2.0)) {
    throw InvalidConfig("mel band edges must satisfy 0 <= f_min < f_max <= sample_rate/2");
  }

  MelFilterbank fb;
  fb.n_mels = static_cast<std::size_t>(n_mels);
  fb.num_bins = static_cast<std::size_t>(fft_size / 2 + 1);
  fb.fft_size = fft_size;
  fb.sample_rate = sample_rate;
  fb.f_min = f_min;
  fb.f_max = f_max;
  fb.weights.assign(fb.n_mels * fb.num_bins, 0.0);

  // n_mels + 2 edges equally spaced in mel; filter m spans edges m..m+2.
  const double mel_lo = hz_to_mel(f_min);
  const double mel_hi = hz_to_mel(f_max);
  std::vector<double> edges(fb.n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(n_mels + 1));
  }
  edges.front() = f_min;
  edges.back() = f_max;
  fb.centers_hz.assign(edges.begin() + 1, edges.end() - 1);

  const double bin_hz = static_cast<double>(sample_rate) / fft_size;
  for (std::size_t m = 0; m < fb.n_mels; ++m) {
    const double left = edges[m];
    const double center = edges[m + 1];
    const double right = edges[m + 2];
    double row_sum = 0.0;
    for (std::size_t b = 0; b < fb.num_bins; ++b) {
      const double f = static_cast<double>(b) * bin_hz;
      const double rising = (f - left) / (center - left);
      const double falling = (right - f) / (right - center);
      const double w = std::max(0.0, std::min(rising, falling));
      fb.weights[m * fb.num_bins + b] = w;
      row_sum += w;
    }
    if (row_sum <= 0.0) {
      throw InvalidConfig("mel filter " + std::to_string(m) + " (center " + std::to_string(center) +
                          " Hz) covers no FFT bin: " + std::to_string(n_mels) + " filters collide at fft size " +
                          std::to_string(fft_size));
    }
  }
  return fb;
}

LogMelSpectrogram log_mel(const StftFrameSet& frames, const MelFilterbank& fb, double eps) {
  if (fb.num_bins != frames.num_bins) {
    throw InvalidInput("filterbank has " + std::to_string(fb.num_bins) + " bins but frames have " +
                       std::to_string(frames.num_bins));
  }
  if (frames.frames.size() != frames.num_frames * frames.num_bins) {
    throw InvalidInput("frame buffer size does not match its declared shape");
  }

  LogMelSpectrogram out;
  out.num_frames = frames.num_frames;
  out.n_mels = fb.n_mels;
  out.data.resize(out.num_frames * out.n_mels);

  std::vector<double> power(frames.num_bins);
  for (std::size_t t = 0; t < frames.num_frames; ++t) {
    for (std::size_t b = 0; b < frames.num_bins; ++b) power[b] = std::norm(frames.at(t, b));
    for (std::size_t m = 0; m < fb.n_mels; ++m) {
      double acc = 0.0;
      for (std::size_t b = 0; b < frames.num_bins; ++b) acc += fb.at(m, b) * power[b];
      out.data[t * out.n_mels + m] = static_cast<float>(std::log(acc + eps));
    }
  }
  return out;
}

int resolve_fft_size(int window_samples, int n_mels, int sample_rate, double f_min, double f_max) {
  int fft = next_power_of_two(window_samples);
  for (; fft <= (1 << 20); fft *= 2) {
    try {
      build_mel_filterbank(fft, n_mels, sample_rate, f_min, f_max);
      return fft;
    } catch (const InvalidConfig&) {
    }
  }
  throw InvalidConfig("no fft size resolves " + std::to_string(n_mels) + " mel filters");
}

LogMelSpectrogram preprocess_version(const AudioSignal& signal, const DatasetVersion& version,
                                     const PreprocessOptions& options) {
  const AudioSignal segment = segment_signal(signal, options.segment_seconds);
  const int win = version.window_samples(segment.sample_rate);
  const int fft = resolve_fft_size(win, options.n_mels, segment.sample_rate, options.f_min, options.f_max);
  const StftFrameSet frames = stft(segment, version, options.window, fft);
  const MelFilterbank fb = build_mel_filterbank(fft, options.n_mels, segment.sample_rate, options.f_min, options.f_max);
  LogMelSpectrogram out = log_mel(frames, fb, options.eps);
  out.version_id = version.id;
  return out;
}

}  // namespace ser::dsp
