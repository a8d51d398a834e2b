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
#ifndef SONICFORGE_SYNTHESIS_HPP
#define SONICFORGE_SYNTHESIS_HPP

#include <vector>

#include "sonicforge/audio_buffer.hpp"
#include "sonicforge/rir.hpp"
#include "sonicforge/trajectory.hpp"

namespace sonicforge {

/// Linear convolution of mono dry audio with a multi-channel impulse
/// response via uniform-partitioned FFT overlap-add (8192-point blocks).
/// Output: one channel per IR channel, length len(dry) + len(ir) - 1.
AudioBuffer convolve(const AudioBuffer& dry, const ImpulseResponse& ir);

/// Crossfade weight of the paper's moving-source interpolation:
/// 0 at r_j, 1 at r_j1, linear in distance from r_j, clamped to [0, 1].
double interp_weight(const Vec3& r_j, const Vec3& r_j1, const Vec3& r_t);

/// Inputs of a moving-source render: RIRs sampled along a trajectory.
struct MovingRender {
  std::vector<PositionSample> positions;  // with arc-length coordinates
  std::vector<ImpulseResponse> rirs;      // one per position
  Trajectory trajectory;                  // duration must be set

  void validate(const AudioBuffer& dry) const;
};

/// Moving-source render: per-sample convex mix of the convolutions at the
/// two positions bracketing the source's arc position. At most two full
/// renders are alive at a time.
AudioBuffer render_moving(const AudioBuffer& dry, const MovingRender& mr);

/// Static source: trace an RIR at req.source/req.receiver, then convolve.
AudioBuffer render_static(const AudioBuffer& dry, const Scene& scene, const RIRRequest& req);

}  // namespace sonicforge

#endif  // SONICFORGE_SYNTHESIS_HPP
