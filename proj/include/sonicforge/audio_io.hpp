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
#ifndef SONICFORGE_AUDIO_IO_HPP
#define SONICFORGE_AUDIO_IO_HPP

#include <string>

#include "sonicforge/audio_buffer.hpp"

namespace sonicforge {

enum class WavFormat { pcm16, f32 };

/// Reads a RIFF/WAVE file. Supported codecs: PCM16 (scaled by 1/32768)
/// and IEEE float32. Channel count and sample rate are preserved.
AudioBuffer read_wav(const std::string& path);

/// Writes a WAV file with a minimal 44-byte header. f32 samples round-trip
/// bit-exactly; pcm16 rounds half away from zero and clips at full scale.
void write_wav(const std::string& path, const AudioBuffer& buf, WavFormat format = WavFormat::f32);

/// Polyphase windowed-sinc resampler (Kaiser beta = 8, 64 taps per phase).
/// Identical rates return the input unchanged. Output length is
/// round(frames * target_rate / source_rate).
AudioBuffer resample(const AudioBuffer& buf, int target_rate);

}  // namespace sonicforge

#endif  // SONICFORGE_AUDIO_IO_HPP
