/**
 * Copyright 2026 The SonicForge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "sonicforge/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace sonicforge {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_inplace(std::vector<cplx>& data, bool inverse) {
  const std::size_t n = data.size();
  if (!is_pow2(n)) throw std::invalid_argument("fft size must be a power of two");
  if (n <= 1) return;

  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const cplx wlen(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      cplx w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cplx u = data[i + k];
        const cplx v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }

  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& x : data) x *= inv_n;
  }
}

std::vector<cplx> fft(const std::vector<cplx>& data) {
  std::vector<cplx> out = data;
  fft_inplace(out, false);
  return out;
}

std::vector<cplx> ifft(const std::vector<cplx>& data) {
  std::vector<cplx> out = data;
  fft_inplace(out, true);
  return out;
}

std::vector<cplx> fft_real(const std::vector<double>& signal, std::size_t fft_size) {
  std::vector<cplx> buf(fft_size, cplx(0.0, 0.0));
  const std::size_t n = std::min(signal.size(), fft_size);
  for (std::size_t i = 0; i < n; ++i) buf[i] = cplx(signal[i], 0.0);
  fft_inplace(buf, false);
  return buf;
}

std::vector<double> ifft_real(const std::vector<cplx>& spectrum) {
  std::vector<cplx> buf = spectrum;
  fft_inplace(buf, true);
  std::vector<double> out(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) out[i] = buf[i].real();
  return out;
}

}  // namespace sonicforge
