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
#include <map>
#include <vector>

#include "sonicforge/errors.hpp"
#include "sonicforge/rir.hpp"

namespace sonicforge {

namespace {

bool strictly_inside(const Vec3& p, const Vec3& dims) {
  return p.x > 0.0 && p.x < dims.x && p.y > 0.0 && p.y < dims.y && p.z > 0.0 && p.z < dims.z;
}

}  // namespace

ImpulseResponse image_source_rir(const Vec3& room_dims, const Vec3& source, const Vec3& receiver,
                                 const std::array<double, kNumBands>& band_absorption,
                                 int max_order, int sample_rate, double max_ir_seconds) {
  if (!(room_dims.x > 0.0 && room_dims.y > 0.0 && room_dims.z > 0.0))
    throw ValidationError("image_source: degenerate room dimensions");
  if (max_order < 0) throw ValidationError("image_source: max_order must be >= 0");
  if (sample_rate <= 0 || !(max_ir_seconds > 0.0))
    throw ValidationError("image_source: invalid sampling parameters");
  if (!strictly_inside(source, room_dims))
    throw PlacementError("image_source: source outside the room");
  if (!strictly_inside(receiver, room_dims))
    throw PlacementError("image_source: receiver outside the room");
  for (double a : band_absorption)
    if (!(a >= 0.0 && a <= 1.0))
      throw ValidationError("image_source: absorption out of [0,1]");

  const auto length = static_cast<std::size_t>(std::llround(max_ir_seconds * sample_rate));
  std::vector<double> out(length, 0.0);

  // sqrt(1 - alpha) per band; uniform-alpha rooms take the exact scalar path.
  std::array<double, kNumBands> beta{};
  for (int b = 0; b < kNumBands; ++b)
    beta[static_cast<std::size_t>(b)] = std::sqrt(1.0 - band_absorption[static_cast<std::size_t>(b)]);
  const bool flat = gains_are_flat(beta);

  const double radius = kSpeedOfSound * max_ir_seconds + 2.0;
  const int nx = static_cast<int>(std::ceil(radius / (2.0 * room_dims.x))) + 1;
  const int ny = static_cast<int>(std::ceil(radius / (2.0 * room_dims.y))) + 1;
  const int nz = static_cast<int>(std::ceil(radius / (2.0 * room_dims.z))) + 1;

  // Tap trains indexed by total reflection count, for band-varying walls.
  std::map<int, std::vector<double>> trains;

  for (int mx = -nx; mx <= nx; ++mx) {
    for (int q = 0; q <= 1; ++q) {
      const double img_x = (1 - 2 * q) * source.x + 2.0 * mx * room_dims.x;
      const int refl_x = std::abs(mx - q) + std::abs(mx);
      if (refl_x > max_order) continue;
      for (int my = -ny; my <= ny; ++my) {
        for (int j = 0; j <= 1; ++j) {
          const double img_y = (1 - 2 * j) * source.y + 2.0 * my * room_dims.y;
          const int refl_xy = refl_x + std::abs(my - j) + std::abs(my);
          if (refl_xy > max_order) continue;
          for (int mz = -nz; mz <= nz; ++mz) {
            for (int k = 0; k <= 1; ++k) {
              const int n_refl = refl_xy + std::abs(mz - k) + std::abs(mz);
              if (n_refl > max_order) continue;
              const double img_z = (1 - 2 * k) * source.z + 2.0 * mz * room_dims.z;
              const Vec3 img{img_x, img_y, img_z};
              const double dist = distance(img, receiver);
              if (dist < 1e-6) continue;
              const double t_samples = dist / kSpeedOfSound * sample_rate;
              if (t_samples >= static_cast<double>(length) + 16.0) continue;

              if (flat) {
                const double amp = std::pow(beta[0], n_refl) / dist;
                add_sinc_tap(out, t_samples, amp);
              } else {
                auto [it, inserted] = trains.try_emplace(n_refl);
                if (inserted) it->second.assign(length, 0.0);
                add_sinc_tap(it->second, t_samples, 1.0 / dist);
              }
            }
          }
        }
      }
    }
  }

  if (!flat) {
    for (const auto& [n_refl, train] : trains) {
      std::array<double, kNumBands> gains{};
      for (int b = 0; b < kNumBands; ++b)
        gains[static_cast<std::size_t>(b)] = std::pow(beta[static_cast<std::size_t>(b)], n_refl);
      const auto fir = band_gain_fir(gains, sample_rate);
      const int delay = band_gain_fir_delay();
      for (std::size_t t = 0; t < train.size(); ++t) {
        if (train[t] == 0.0) continue;
        for (std::size_t f = 0; f < fir.size(); ++f) {
          const long idx = static_cast<long>(t + f) - delay;
          if (idx >= 0 && idx < static_cast<long>(length))
            out[static_cast<std::size_t>(idx)] += train[t] * fir[f];
        }
      }
    }
  }

  ImpulseResponse ir;
  ir.sample_rate = sample_rate;
  ir.source_position = source;
  ir.receiver_center = receiver;
  ir.channels.emplace_back(length);
  for (std::size_t t = 0; t < length; ++t) ir.channels[0][t] = static_cast<float>(out[t]);
  return ir;
}

}  // namespace sonicforge
