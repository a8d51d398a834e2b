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
#include "sonicforge/loudness.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "sonicforge/dsp.hpp"
#include "sonicforge/errors.hpp"

namespace sonicforge {

namespace {

constexpr double kAbsoluteGateLufs = -70.0;
constexpr double kRelativeGateLu = 10.0;
constexpr double kBlockSeconds = 0.4;
constexpr double kHopSeconds = 0.1;  // 75% overlap

// K-weighting pre-filter for an arbitrary sample rate, derived from the
// BS.1770 analog prototypes (same parameterization libebur128 uses; at
// 48 kHz this reproduces the coefficients tabulated in the standard).
std::vector<Biquad> k_weighting(int sample_rate) {
  const double fs = sample_rate;

  Biquad shelf;
  {
    const double db = 3.999843853973347;
    const double f0 = 1681.974450955533;
    const double q = 0.7071752369554196;
    const double k = std::tan(M_PI * f0 / fs);
    const double vh = std::pow(10.0, db / 20.0);
    const double vb = std::pow(vh, 0.4996667741545416);
    const double a0 = 1.0 + k / q + k * k;
    shelf.b0 = (vh + vb * k / q + k * k) / a0;
    shelf.b1 = 2.0 * (k * k - vh) / a0;
    shelf.b2 = (vh - vb * k / q + k * k) / a0;
    shelf.a1 = 2.0 * (k * k - 1.0) / a0;
    shelf.a2 = (1.0 - k / q + k * k) / a0;
  }

  Biquad highpass;
  {
    const double f0 = 38.13547087602444;
    const double q = 0.5003270373238773;
    const double k = std::tan(M_PI * f0 / fs);
    const double a0 = 1.0 + k / q + k * k;
    highpass.b0 = 1.0;
    highpass.b1 = -2.0;
    highpass.b2 = 1.0;
    highpass.a1 = 2.0 * (k * k - 1.0) / a0;
    highpass.a2 = (1.0 - k / q + k * k) / a0;
  }

  return {shelf, highpass};
}

double loudness_of_power(double power) { return -0.691 + 10.0 * std::log10(power); }

}  // namespace

double measure_lufs(const AudioBuffer& buf) {
  buf.validate();
  if (buf.sample_rate <= 0) throw ValidationError("measure_lufs: invalid sample rate");
  const std::size_t block = static_cast<std::size_t>(std::llround(kBlockSeconds * buf.sample_rate));
  const std::size_t hop = static_cast<std::size_t>(std::llround(kHopSeconds * buf.sample_rate));
  if (buf.num_frames() < block)
    throw ValidationError("measure_lufs: input shorter than one 400 ms gating block");
  if (buf.is_silent()) return -std::numeric_limits<double>::infinity();

  // K-weight every channel once, then gate on block powers.
  const auto sections = k_weighting(buf.sample_rate);
  std::vector<std::vector<double>> weighted;
  weighted.reserve(buf.num_channels());
  for (const auto& ch : buf.channels) {
    std::vector<double> x(ch.begin(), ch.end());
    weighted.push_back(biquad_filter(sections, x));
  }

  std::vector<double> block_power;
  for (std::size_t start = 0; start + block <= buf.num_frames(); start += hop) {
    double power = 0.0;
    for (const auto& ch : weighted) {
      double acc = 0.0;
      for (std::size_t t = start; t < start + block; ++t) acc += ch[t] * ch[t];
      power += acc / static_cast<double>(block);  // unit channel weights
    }
    block_power.push_back(power);
  }

  double abs_gated_sum = 0.0;
  std::size_t abs_gated_count = 0;
  for (double p : block_power) {
    if (loudness_of_power(p) > kAbsoluteGateLufs) {
      abs_gated_sum += p;
      ++abs_gated_count;
    }
  }
  if (abs_gated_count == 0) return -std::numeric_limits<double>::infinity();

  const double relative_threshold =
      loudness_of_power(abs_gated_sum / static_cast<double>(abs_gated_count)) - kRelativeGateLu;

  double gated_sum = 0.0;
  std::size_t gated_count = 0;
  for (double p : block_power) {
    const double l = loudness_of_power(p);
    if (l > kAbsoluteGateLufs && l > relative_threshold) {
      gated_sum += p;
      ++gated_count;
    }
  }
  if (gated_count == 0) return -std::numeric_limits<double>::infinity();
  return loudness_of_power(gated_sum / static_cast<double>(gated_count));
}

NormalizeResult normalize_to(const AudioBuffer& buf, double target_lufs) {
  const double measured = measure_lufs(buf);
  if (!std::isfinite(measured))
    throw ValidationError("normalize_to: cannot normalize silent input");

  double gain = std::pow(10.0, (target_lufs - measured) / 20.0);
  AudioBuffer out = buf;
  out.scale(gain);

  // Gating can shift once the level changes; correct with one re-measure.
  const double remeasured = measure_lufs(out);
  if (std::isfinite(remeasured)) {
    const double correction = std::pow(10.0, (target_lufs - remeasured) / 20.0);
    gain *= correction;
    out = buf;
    out.scale(gain);
  }
  return {std::move(out), gain};
}

}  // namespace sonicforge
