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
#include "sonicforge/audio_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

#include "sonicforge/errors.hpp"

namespace sonicforge {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;

struct ByteReader {
  const std::vector<char>& data;
  std::size_t pos = 0;

  void require(std::size_t n, const char* what) const {
    if (pos + n > data.size())
      throw FormatError(std::string("wav: truncated ") + what + " at byte " +
                        std::to_string(pos));
  }
  std::uint32_t u32(const char* what) {
    require(4, what);
    std::uint32_t v;
    std::memcpy(&v, data.data() + pos, 4);
    pos += 4;
    return v;
  }
  std::uint16_t u16(const char* what) {
    require(2, what);
    std::uint16_t v;
    std::memcpy(&v, data.data() + pos, 2);
    pos += 2;
    return v;
  }
  std::string tag(const char* what) {
    require(4, what);
    std::string s(data.data() + pos, 4);
    pos += 4;
    return s;
  }
};

void put_u32(std::vector<char>& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.insert(out.end(), b, b + 4);
}

void put_u16(std::vector<char>& out, std::uint16_t v) {
  char b[2];
  std::memcpy(b, &v, 2);
  out.insert(out.end(), b, b + 2);
}

void put_tag(std::vector<char>& out, const char* t) { out.insert(out.end(), t, t + 4); }

std::int16_t to_pcm16(float s) {
  double v = static_cast<double>(s) * 32768.0;
  // Round half away from zero, then clip at full scale.
  v = v >= 0.0 ? std::floor(v + 0.5) : std::ceil(v - 0.5);
  if (v > 32767.0) v = 32767.0;
  if (v < -32768.0) v = -32768.0;
  return static_cast<std::int16_t>(v);
}

}  // namespace

AudioBuffer read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("wav: cannot open " + path);
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  ByteReader r{raw};
  if (r.tag("RIFF tag") != "RIFF") throw FormatError("wav: missing RIFF tag at byte 0");
  r.u32("RIFF size");
  if (r.tag("WAVE tag") != "WAVE") throw FormatError("wav: missing WAVE tag at byte 8");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t data_pos = 0, data_len = 0;

  while (r.pos + 8 <= raw.size()) {
    const std::string id = r.tag("chunk id");
    const std::uint32_t len = r.u32("chunk size");
    if (id == "fmt ") {
      if (len < 16) throw FormatError("wav: fmt chunk too small at byte " + std::to_string(r.pos));
      const std::size_t fmt_end = r.pos + len;
      format = r.u16("format tag");
      channels = r.u16("channel count");
      rate = r.u32("sample rate");
      r.u32("byte rate");
      r.u16("block align");
      bits = r.u16("bit depth");
      r.pos = fmt_end;
      have_fmt = true;
    } else if (id == "data") {
      r.require(len, "data chunk");
      data_pos = r.pos;
      data_len = len;
      r.pos += len;
    } else {
      r.require(len, "chunk body");
      r.pos += len;
    }
    if (r.pos % 2 == 1) ++r.pos;  // chunks are word-aligned
  }

  if (!have_fmt) throw FormatError("wav: no fmt chunk in " + path);
  if (data_len == 0) throw FormatError("wav: no data chunk in " + path);
  if (channels == 0 || rate == 0) throw FormatError("wav: degenerate fmt chunk in " + path);

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !f32)
    throw UnsupportedError("wav: unsupported codec (format " + std::to_string(format) + ", " +
                           std::to_string(bits) + " bit) in " + path);

  const std::size_t bytes_per_sample = pcm16 ? 2 : 4;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t frames = data_len / frame_bytes;

  AudioBuffer buf(channels, frames, static_cast<int>(rate));
  const char* d = raw.data() + data_pos;
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t c = 0; c < channels; ++c) {
      if (pcm16) {
        std::int16_t v;
        std::memcpy(&v, d, 2);
        d += 2;
        buf.channels[c][t] = static_cast<float>(v) / 32768.0f;
      } else {
        float v;
        std::memcpy(&v, d, 4);
        d += 4;
        buf.channels[c][t] = v;
      }
    }
  }
  return buf;
}

void write_wav(const std::string& path, const AudioBuffer& buf, WavFormat format) {
  buf.validate();
  const std::size_t channels = buf.num_channels();
  const std::size_t frames = buf.num_frames();
  if (channels == 0) throw ValidationError("wav: cannot write zero-channel buffer");

  const std::uint16_t bits = format == WavFormat::pcm16 ? 16 : 32;
  const std::uint16_t block_align = static_cast<std::uint16_t>(channels * bits / 8);
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(frames * block_align);

  std::vector<char> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, format == WavFormat::pcm16 ? kFormatPcm : kFormatFloat);
  put_u16(out, static_cast<std::uint16_t>(channels));
  put_u32(out, static_cast<std::uint32_t>(buf.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(buf.sample_rate) * block_align);
  put_u16(out, block_align);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_bytes);

  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t c = 0; c < channels; ++c) {
      if (format == WavFormat::pcm16) {
        const std::int16_t v = to_pcm16(buf.channels[c][t]);
        char b[2];
        std::memcpy(b, &v, 2);
        out.insert(out.end(), b, b + 2);
      } else {
        char b[4];
        std::memcpy(b, &buf.channels[c][t], 4);
        out.insert(out.end(), b, b + 4);
      }
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("wav: cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("wav: write failed: " + path);
}

}  // namespace sonicforge
