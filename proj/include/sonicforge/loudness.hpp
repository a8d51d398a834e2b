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
#ifndef SONICFORGE_LOUDNESS_HPP
#define SONICFORGE_LOUDNESS_HPP

#include "sonicforge/audio_buffer.hpp"

namespace sonicforge {

/// Default integrated-loudness targets per stem class, in LUFS.
struct LoudnessTargets {
  double speech = -17.0;
  double environmental = -21.0;
  double music = -24.0;
};

/// Integrated loudness per ITU-R BS.1770-4: K-weighting (shelving +
/// high-pass pre-filter), 400 ms blocks at 75% overlap, -70 LUFS absolute
/// gate followed by a -10 LU relative gate. Channels are summed with unit
/// weights. Returns -infinity for digital silence.
double measure_lufs(const AudioBuffer& buf);

struct NormalizeResult {
  AudioBuffer audio;
  double gain = 1.0;  // linear factor that was applied
};

/// Pure-gain normalization to the target loudness (no limiting). The gain
/// is measured, applied, re-measured once and corrected, landing within
/// +-0.1 LU of the target for gateable signals.
NormalizeResult normalize_to(const AudioBuffer& buf, double target_lufs);

}  // namespace sonicforge

#endif  // SONICFORGE_LOUDNESS_HPP
