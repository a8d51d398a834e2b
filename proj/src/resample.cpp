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
#include <cmath>
#include <numeric>
#include <vector>

#include "sonicforge/audio_io.hpp"
#include "sonicforge/dsp.hpp"
#include "sonicforge/errors.hpp"

namespace sonicforge {

namespace {

constexpr int kTapsPerPhase = 64;
constexpr int kHalfSpan = kTapsPerPhase / 2;
constexpr double kKaiserBeta = 8.0;
constexpr double kRolloff = 0.945;

// Interpolation kernel at fractional offset u (in source samples):
// windowed sinc of an ideal lowpass at the narrower of the two Nyquists.
struct PhaseBank {
  int up;    // L
  int down;  // M
  std::vector<std::vector<double>> taps;  // [phase][kTapsPerPhase]

  PhaseBank(int source_rate, int target_rate) {
    const int g = std::gcd(source_rate, target_rate);
    up = target_rate / g;
    down = source_rate / g;
    const double cutoff = 0.5 * kRolloff * std::min(1.0, static_cast<double>(up) / down);
    const double i0_beta = bessel_i0(kKaiserBeta);

    taps.assign(static_cast<std::size_t>(up), std::vector<double>(kTapsPerPhase, 0.0));
    for (int p = 0; p < up; ++p) {
      const double frac = static_cast<double>(p) * down / up;
      const double frac_part = frac - std::floor(frac);
      double sum = 0.0;
      for (int j = 0; j < kTapsPerPhase; ++j) {
        const double u = static_cast<double>(j - kHalfSpan + 1) - frac_part;
        if (std::abs(u) >= kHalfSpan) continue;
        const double x = 2.0 * cutoff * u;
        const double sinc = x == 0.0 ? 1.0 : std::sin(M_PI * x) / (M_PI * x);
        const double t = u / kHalfSpan;
        const double window = bessel_i0(kKaiserBeta * std::sqrt(1.0 - t * t)) / i0_beta;
        taps[p][static_cast<std::size_t>(j)] = sinc * window;
        sum += sinc * window;
      }
      // Normalize each phase so DC passes at exactly unit gain.
      if (sum != 0.0)
        for (double& v : taps[p]) v /= sum;
    }
  }
};

}  // namespace

AudioBuffer resample(const AudioBuffer& buf, int target_rate) {
  if (buf.sample_rate <= 0 || target_rate <= 0)
    throw ValidationError("resample: sample rates must be positive");
  if (buf.sample_rate == target_rate) return buf;

  const PhaseBank bank(buf.sample_rate, target_rate);
  const std::size_t in_frames = buf.num_frames();
  const std::size_t out_frames = static_cast<std::size_t>(
      std::llround(static_cast<double>(in_frames) * target_rate / buf.sample_rate));

  AudioBuffer out(buf.num_channels(), out_frames, target_rate);
  for (std::size_t c = 0; c < buf.num_channels(); ++c) {
    const auto& x = buf.channels[c];
    auto& y = out.channels[c];
    for (std::size_t m = 0; m < out_frames; ++m) {
      const long long num = static_cast<long long>(m) * bank.down;
      const long long base = num / bank.up;  // floor, num >= 0
      const int phase = static_cast<int>(num % bank.up);
      const auto& h = bank.taps[static_cast<std::size_t>(phase)];
      double acc = 0.0;
      for (int j = 0; j < kTapsPerPhase; ++j) {
        const long long k = base + (j - kHalfSpan + 1);
        if (k < 0 || k >= static_cast<long long>(in_frames)) continue;
        acc += h[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(k)];
      }
      y[m] = static_cast<float>(acc);
    }
  }
  return out;
}

}  // namespace sonicforge
