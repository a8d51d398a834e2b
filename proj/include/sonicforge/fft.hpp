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
#ifndef SONICFORGE_FFT_HPP
#define SONICFORGE_FFT_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace sonicforge {

using cplx = std::complex<double>;

std::size_t next_pow2(std::size_t n);
bool is_pow2(std::size_t n);

/// In-place radix-2 DIT transform. Size must be a power of two.
/// inverse=true applies the 1/N factor so ifft(fft(x)) == x.
void fft_inplace(std::vector<cplx>& data, bool inverse);

std::vector<cplx> fft(const std::vector<cplx>& data);
std::vector<cplx> ifft(const std::vector<cplx>& data);

/// Transforms a real signal zero-padded to fft_size; returns the full
/// (Hermitian-symmetric) spectrum of length fft_size.
std::vector<cplx> fft_real(const std::vector<double>& signal, std::size_t fft_size);

/// Inverse of fft_real: returns the real part of the inverse transform.
std::vector<double> ifft_real(const std::vector<cplx>& spectrum);

}  // namespace sonicforge

#endif  // SONICFORGE_FFT_HPP
