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

#include "sonicforge/errors.hpp"
#include "sonicforge/rir.hpp"

namespace sonicforge {

namespace {
constexpr double kEdcFloorDb = -120.0;
}

std::array<double, kNumBands> rt60_predict(const Vec3& room_dims,
                                           const std::array<double, kNumBands>& band_absorption,
                                           Rt60Formula formula) {
  if (!(room_dims.x > 0.0 && room_dims.y > 0.0 && room_dims.z > 0.0))
    throw ValidationError("rt60_predict: degenerate room dimensions");
  const double volume = room_dims.x * room_dims.y * room_dims.z;
  const double area = 2.0 * (room_dims.x * room_dims.y + room_dims.x * room_dims.z +
                             room_dims.y * room_dims.z);

  std::array<double, kNumBands> rt{};
  for (int b = 0; b < kNumBands; ++b) {
    const double alpha = band_absorption[static_cast<std::size_t>(b)];
    if (formula == Rt60Formula::sabine) {
      if (!(alpha > 0.0)) throw ValidationError("rt60_predict: sabine requires alpha > 0");
      rt[static_cast<std::size_t>(b)] = 0.161 * volume / (area * alpha);
    } else {
      if (!(alpha > 0.0 && alpha < 1.0))
        throw ValidationError("rt60_predict: eyring requires 0 < alpha < 1");
      rt[static_cast<std::size_t>(b)] = 0.161 * volume / (-area * std::log(1.0 - alpha));
    }
  }
  return rt;
}

std::vector<std::vector<double>> energy_decay_curve(const ImpulseResponse& ir) {
  if (ir.num_frames() == 0) throw ValidationError("energy_decay_curve: empty impulse response");

  std::vector<std::vector<double>> curves;
  curves.reserve(ir.num_channels());
  for (const auto& ch : ir.channels) {
    // Backward integration of squared pressure (Schroeder).
    std::vector<double> tail(ch.size());
    double acc = 0.0;
    for (std::size_t t = ch.size(); t-- > 0;) {
      acc += static_cast<double>(ch[t]) * ch[t];
      tail[t] = acc;
    }
    const double total = tail[0];
    if (total <= 0.0) throw ValidationError("energy_decay_curve: all-zero impulse response");
    std::vector<double> edc(ch.size());
    for (std::size_t t = 0; t < ch.size(); ++t) {
      const double ratio = tail[t] / total;
      edc[t] = ratio > 0.0 ? std::max(10.0 * std::log10(ratio), kEdcFloorDb) : kEdcFloorDb;
    }
    curves.push_back(std::move(edc));
  }
  return curves;
}

double rt60_estimate(const std::vector<double>& edc_db, int sample_rate) {
  if (edc_db.empty() || sample_rate <= 0)
    throw ValidationError("rt60_estimate: empty curve or bad sample rate");

  std::size_t i5 = edc_db.size(), i35 = edc_db.size();
  for (std::size_t t = 0; t < edc_db.size(); ++t) {
    if (i5 == edc_db.size() && edc_db[t] <= -5.0) i5 = t;
    if (edc_db[t] <= -35.0) {
      i35 = t;
      break;
    }
  }
  if (i5 >= edc_db.size()) throw ValidationError("rt60_estimate: decay never reaches -5 dB");
  if (i35 >= edc_db.size()) throw ValidationError("rt60_estimate: decay never reaches -35 dB");
  if (i35 <= i5 + 1) {
    // Degenerate (near-instant) decay; slope from the two boundary points.
    const double dt = std::max(1.0, static_cast<double>(i35) - static_cast<double>(i5)) /
                      sample_rate;
    const double slope = (edc_db[i35] - edc_db[i5]) / dt;
    return -60.0 / slope;
  }

  // Least-squares line over the -5..-35 dB span.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const auto n = static_cast<double>(i35 - i5 + 1);
  for (std::size_t t = i5; t <= i35; ++t) {
    const double x = static_cast<double>(t) / sample_rate;
    const double y = edc_db[t];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) throw ValidationError("rt60_estimate: singular fit");
  const double slope = (n * sxy - sx * sy) / denom;
  if (!(slope < 0.0)) throw ValidationError("rt60_estimate: non-decaying curve");
  return -60.0 / slope;
}

}  // namespace sonicforge
