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
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <utility>

#include "ser/dsp.hpp"
#include "ser/errors.hpp"

namespace ser::dsp {

int next_power_of_two(int n) {
  if (n <= 1) return 1;
  return static_cast<int>(std::bit_ceil(static_cast<unsigned>(n)));
}

void fft_inplace(std::span<std::complex<double>> data) {
  const std::size_t n = data.size();
  if (n == 0 || !std::has_single_bit(n)) {
    throw InvalidConfig("fft length must be a power of two, got " + std::to_string(n));
  }

  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::size_t half = len / 2;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        // Direct twiddle evaluation, no recurrence.
        const double a = angle * static_cast<double>(k);
        const std::complex<double> w(std::cos(a), std::sin(a));
        const std::complex<double> u = data[start + k];
        const std::complex<double> v = data[start + k + half] * w;
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
}

}  // namespace ser::dsp
