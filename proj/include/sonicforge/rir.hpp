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
#ifndef SONICFORGE_RIR_HPP
#define SONICFORGE_RIR_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "sonicforge/audio_buffer.hpp"
#include "sonicforge/dsp.hpp"
#include "sonicforge/scene.hpp"
#include "sonicforge/vec3.hpp"

namespace sonicforge {

inline constexpr double kSpeedOfSound = 343.0;  // m/s

enum class ReceiverKind { mono, ambisonics_fo, array };

/// Receiver description. Arrays trace one independent mono receiver per
/// element; first-order ambisonics produces 4 channels in ACN order
/// (W, Y, Z, X) with SN3D normalization.
struct ReceiverConfig {
  ReceiverKind kind = ReceiverKind::mono;
  Vec3 center;
  std::vector<Vec3> element_offsets;  // array kind only, relative to center
  double capture_radius = 0.25;       // meters

  int num_channels() const;
  void validate() const;
};

struct RIRRequest {
  Vec3 source;
  ReceiverConfig receiver;
  int n_rays = 20000;
  double max_ir_seconds = 2.0;
  int max_bounces = 100;
  int sample_rate = 16000;
  std::uint64_t seed = 0;
  bool air_absorption = false;  // per-band dB/m attenuation on arrivals
  int n_threads = 1;            // never affects the output, only wall time

  void validate() const;
};

/// Time-binned band energy received per channel. Values are fractions of
/// the emitted energy (1.0 per band), so per-channel band totals never
/// exceed 1. For ambisonics receivers `bins` holds the omni (W) channel
/// and `intensity` the energy-weighted arrival direction per bin (world
/// axes, signed).
struct EnergyHistogram {
  std::vector<std::array<std::vector<double>, kNumBands>> bins;  // [channel][band][bin]
  std::array<std::array<std::vector<double>, kNumBands>, 3> intensity{};
  double bin_width = 0.001;  // seconds

  double channel_band_total(std::size_t channel, int band) const;
};

/// Sampled multi-channel pressure response.
struct ImpulseResponse {
  std::vector<std::vector<float>> channels;
  int sample_rate = 0;
  Vec3 source_position;
  Vec3 receiver_center;

  std::size_t num_channels() const { return channels.size(); }
  std::size_t num_frames() const { return channels.empty() ? 0 : channels.front().size(); }

  AudioBuffer to_audio() const {
    AudioBuffer buf;
    buf.channels = channels;
    buf.sample_rate = sample_rate;
    return buf;
  }
};

struct TraceResult {
  ImpulseResponse ir;
  EnergyHistogram histogram;
};

/// Stochastic geometric-acoustics simulation: a deterministic direct-path
/// tap (1/d law, per-band occlusion) plus a reverberant tail synthesized
/// from the traced energy histogram. Bit-identical for a fixed request
/// regardless of n_threads.
TraceResult trace_rir_detailed(const Scene& scene, const RIRRequest& req);
ImpulseResponse trace_rir(const Scene& scene, const RIRRequest& req);

/// Deterministic shoebox oracle: mirror-image sources up to max_order
/// reflections, taps placed with 32-tap windowed-sinc interpolation.
/// band_absorption applies to every wall.
ImpulseResponse image_source_rir(const Vec3& room_dims, const Vec3& source, const Vec3& receiver,
                                 const std::array<double, kNumBands>& band_absorption,
                                 int max_order, int sample_rate, double max_ir_seconds);

enum class Rt60Formula { sabine, eyring };

/// Analytic reverberation-time predictions for an axis-aligned room.
std::array<double, kNumBands> rt60_predict(const Vec3& room_dims,
                                           const std::array<double, kNumBands>& band_absorption,
                                           Rt60Formula formula);

/// Schroeder backward-integrated energy decay per channel, in dB
/// (0 dB at t = 0, floor-clamped at -120 dB, non-increasing).
std::vector<std::vector<double>> energy_decay_curve(const ImpulseResponse& ir);

/// RT60 from an EDC: least-squares slope over the -5..-35 dB span,
/// extrapolated to 60 dB of decay.
double rt60_estimate(const std::vector<double>& edc_db, int sample_rate);

}  // namespace sonicforge

#endif  // SONICFORGE_RIR_HPP
