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

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ser::dsp {

inline constexpr int kDefaultSampleRate = 16000;
inline constexpr double kSegmentSeconds = 6.0;
inline constexpr int kNumMels = 64;
inline constexpr double kLogFloor = 1e-6;

struct AudioSignal {
  std::vector<double> samples;
  int sample_rate = kDefaultSampleRate;
};

// Throws InvalidInput when the rate is not positive or a sample is not finite.
void validate(const AudioSignal& signal);

// One row of the preprocessing table: analysis window and overlap in ms.
struct DatasetVersion {
  int id = 0;
  int window_ms = 0;
  int overlap_ms = 0;

  int stride_ms() const { return window_ms - overlap_ms; }
  int window_samples(int sample_rate) const;
  int stride_samples(int sample_rate) const;
};

// Versions 1..8 (window 15..50 ms in 5 ms steps, 10 ms stride throughout).
std::span<const DatasetVersion> dataset_versions();
const DatasetVersion& dataset_version(int id);

enum class WindowKind { hamming, rectangular };

// Periodic window of the given length.
std::vector<double> make_window(WindowKind kind, int length);

// Center the signal in a buffer of round(target_seconds * rate) samples.
// Shorter input is zero padded on both ends, longer input is cropped on both
// ends; an odd remainder goes to the end.
AudioSignal segment_signal(const AudioSignal& signal, double target_seconds = kSegmentSeconds);

int next_power_of_two(int n);

// In-place iterative radix-2 FFT (forward, e^{-2*pi*i*k*n/N}).
// The length must be a power of two.
void fft_inplace(std::span<std::complex<double>> data);

struct StftFrameSet {
  std::vector<std::complex<double>> frames;  // num_frames x num_bins, row-major
  std::size_t num_frames = 0;
  std::size_t num_bins = 0;
  int stride_samples = 0;
  int window_samples = 0;
  int fft_size = 0;

  std::complex<double> at(std::size_t t, std::size_t bin) const { return frames[t * num_bins + bin]; }
};

// Center-padded STFT. With fft_size == 0 the next power of two at or above
// the window length is used; otherwise fft_size must be a power of two that
// is not shorter than the window.
StftFrameSet stft(const AudioSignal& signal, const DatasetVersion& version,
                  WindowKind window = WindowKind::hamming, int fft_size = 0);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

struct MelFilterbank {
  std::vector<double> weights;  // n_mels x num_bins, row-major
  std::size_t n_mels = 0;
  std::size_t num_bins = 0;
  int fft_size = 0;
  int sample_rate = 0;
  double f_min = 0.0;
  double f_max = 0.0;
  std::vector<double> centers_hz;  // n_mels

  double at(std::size_t mel, std::size_t bin) const { return weights[mel * num_bins + bin]; }
};

// Triangular HTK-mel filters sampled at the FFT bin frequencies. Throws
// InvalidConfig if any filter ends up with no positive weight, which happens
// when neighbouring centers are closer than the bin spacing.
MelFilterbank build_mel_filterbank(int fft_size, int n_mels = kNumMels, int sample_rate = kDefaultSampleRate,
                                   double f_min = 0.0, double f_max = 8000.0);

struct LogMelSpectrogram {
  std::vector<float> data;  // num_frames x n_mels, time-major
  std::size_t num_frames = 0;
  std::size_t n_mels = 0;
  int version_id = 0;
  std::string utterance_id;
  int label = -1;

  float at(std::size_t t, std::size_t m) const { return data[t * n_mels + m]; }
};

// ln(sum_b fb[m][b] * |X_t(b)|^2 + eps)
LogMelSpectrogram log_mel(const StftFrameSet& frames, const MelFilterbank& fb, double eps = kLogFloor);

// Smallest power-of-two FFT, not shorter than the window, whose bins give
// every mel filter a non-empty support.
int resolve_fft_size(int window_samples, int n_mels = kNumMels, int sample_rate = kDefaultSampleRate,
                     double f_min = 0.0, double f_max = 8000.0);

struct PreprocessOptions {
  WindowKind window = WindowKind::hamming;
  int n_mels = kNumMels;
  double f_min = 0.0;
  double f_max = 8000.0;
  double segment_seconds = kSegmentSeconds;
  double eps = kLogFloor;
};

// segment -> STFT -> log-Mel for one dataset version.
LogMelSpectrogram preprocess_version(const AudioSignal& signal, const DatasetVersion& version,
                                     const PreprocessOptions& options = {});

}  // namespace ser::dsp
