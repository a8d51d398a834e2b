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
#include "sonicforge/dsp.hpp"

#include <algorithm>
#include <cmath>

namespace sonicforge {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// 4th-order Butterworth bandpass magnitude squared for an octave band
// centered at f0 (edges f0/sqrt(2) .. f0*sqrt(2)).
double butterworth_bp_mag_sq(double f, double f0) {
  if (f <= 0.0) return 0.0;
  const double bw = f0 / kSqrt2;
  const double w = (f * f - f0 * f0) / (bw * f);
  const double w2 = w * w;
  return 1.0 / (1.0 + w2 * w2);
}

// FIR design grid; large enough that truncation to kEqTaps keeps the
// flat-gain case exact (the ideal response is a pure delta).
constexpr std::size_t kEqGrid = 512;
constexpr int kEqTaps = 63;
constexpr int kEqDelay = 31;

}  // namespace

std::array<double, kNumBands> band_centers() {
  return {125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0};
}

std::array<double, kNumBands> band_amplitudes(double f) {
  const auto centers = band_centers();
  std::array<double, kNumBands> raw{};
  for (int b = 0; b < kNumBands; ++b) raw[b] = butterworth_bp_mag_sq(f, centers[b]);
  // Extend the edge bands so the partition covers DC..Nyquist.
  if (f <= centers.front()) raw.front() = 1.0;
  if (f >= centers.back()) raw.back() = 1.0;
  double total = 0.0;
  for (double v : raw) total += v;
  std::array<double, kNumBands> out{};
  if (total <= 0.0) return out;
  const double inv = 1.0 / std::sqrt(total);
  for (int b = 0; b < kNumBands; ++b) out[b] = std::sqrt(raw[b]) * inv;
  return out;
}

double band_amplitude(int band, double f) { return band_amplitudes(f)[band]; }

bool gains_are_flat(const std::array<double, kNumBands>& gains) {
  const auto [mn, mx] = std::minmax_element(gains.begin(), gains.end());
  return *mx - *mn < 1e-12;
}

int band_gain_fir_delay() { return kEqDelay; }

std::vector<double> band_gain_fir(const std::array<double, kNumBands>& gains,
                                  double sample_rate) {
  // Target magnitude on the design grid: per-band gains blended through
  // the power partition, sqrt(sum_b g_b^2 A_b^2(f)).
  std::array<double, kEqGrid / 2 + 1> mag{};
  for (std::size_t k = 0; k <= kEqGrid / 2; ++k) {
    const double f = sample_rate * static_cast<double>(k) / kEqGrid;
    const auto a = band_amplitudes(f);
    double acc = 0.0;
    for (int b = 0; b < kNumBands; ++b) acc += gains[b] * gains[b] * a[b] * a[b];
    mag[k] = std::sqrt(acc);
  }

  // Inverse DFT with linear phase (integer delay), then truncate and window.
  std::vector<double> taps(kEqTaps, 0.0);
  for (int n = 0; n < kEqTaps; ++n) {
    double acc = mag[0];
    for (std::size_t k = 1; k < kEqGrid / 2; ++k)
      acc += 2.0 * mag[k] * std::cos(2.0 * M_PI * static_cast<double>(k) * (n - kEqDelay) /
                                     kEqGrid);
    acc += mag[kEqGrid / 2] * std::cos(M_PI * (n - kEqDelay));
    const double x = (n - kEqDelay) / static_cast<double>(kEqDelay + 1);
    const double window = 0.5 * (1.0 + std::cos(M_PI * x));
    taps[n] = window * acc / kEqGrid;
  }
  return taps;
}

void add_sinc_tap(std::vector<double>& buffer, double t_samples, double amplitude) {
  constexpr int kHalf = 16;  // 32-tap kernel
  const double n0 = std::floor(t_samples);
  const double frac = t_samples - n0;
  const long base = static_cast<long>(n0);
  for (int j = -kHalf + 1; j <= kHalf; ++j) {
    const long idx = base + j;
    if (idx < 0 || idx >= static_cast<long>(buffer.size())) continue;
    const double x = static_cast<double>(j) - frac;
    if (std::abs(x) >= kHalf) continue;
    const double sinc = x == 0.0 ? 1.0 : std::sin(M_PI * x) / (M_PI * x);
    const double window = 0.5 * (1.0 + std::cos(M_PI * x / kHalf));
    buffer[static_cast<std::size_t>(idx)] += amplitude * sinc * window;
  }
}

std::vector<double> hann_periodic(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

double bessel_i0(double x) {
  // Power series; converges quickly for the beta values used here.
  double sum = 1.0;
  double term = 1.0;
  const double half_x = x / 2.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half_x / k) * (half_x / k);
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

std::vector<double> biquad_filter(const std::vector<Biquad>& sections,
                                  const std::vector<double>& input) {
  std::vector<double> out = input;
  for (const auto& s : sections) {
    double z1 = 0.0, z2 = 0.0;
    for (double& v : out) v = s.process(v, z1, z2);
  }
  return out;
}

}  // namespace sonicforge
