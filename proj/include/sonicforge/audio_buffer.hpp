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
#ifndef SONICFORGE_AUDIO_BUFFER_HPP
#define SONICFORGE_AUDIO_BUFFER_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "sonicforge/errors.hpp"

namespace sonicforge {

/// Multi-channel sampled signal; the universal currency between modules.
/// Samples are nominally in [-1, 1] but are not clipped until PCM export.
struct AudioBuffer {
  std::vector<std::vector<float>> channels;
  int sample_rate = 0;

  AudioBuffer() = default;
  AudioBuffer(std::size_t n_channels, std::size_t n_frames, int rate)
      : channels(n_channels, std::vector<float>(n_frames, 0.0f)), sample_rate(rate) {}

  std::size_t num_channels() const { return channels.size(); }
  std::size_t num_frames() const { return channels.empty() ? 0 : channels.front().size(); }
  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(num_frames()) / sample_rate : 0.0;
  }

  bool is_finite() const {
    for (const auto& ch : channels)
      for (float s : ch)
        if (!std::isfinite(s)) return false;
    return true;
  }

  bool is_silent() const {
    for (const auto& ch : channels)
      for (float s : ch)
        if (s != 0.0f) return false;
    return true;
  }

  /// Throws unless every channel has the same length and all samples are finite.
  void validate() const {
    for (const auto& ch : channels)
      if (ch.size() != num_frames()) throw ValidationError("audio buffer has ragged channels");
    if (!is_finite()) throw ValidationError("audio buffer contains non-finite samples");
  }

  void scale(double gain) {
    for (auto& ch : channels)
      for (float& s : ch) s = static_cast<float>(s * gain);
  }

  /// Truncates or zero-pads every channel to exactly n frames.
  void resize_frames(std::size_t n) {
    for (auto& ch : channels) ch.resize(n, 0.0f);
  }
};

}  // namespace sonicforge

#endif  // SONICFORGE_AUDIO_BUFFER_HPP
