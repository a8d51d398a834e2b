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
#include "sonicforge/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "sonicforge/errors.hpp"
#include "sonicforge/fft.hpp"

namespace sonicforge {

namespace {

constexpr std::size_t kFftSize = 8192;
constexpr std::size_t kBlockSize = kFftSize / 2;  // 4096 + 4096 - 1 < 8192

// Frequency-domain blocks of the dry signal, shared by every partitioned
// convolution of one render.
struct DrySpectra {
  std::vector<std::vector<cplx>> blocks;
  std::size_t dry_length = 0;

  explicit DrySpectra(const std::vector<float>& dry) {
    dry_length = dry.size();
    const std::size_t n_blocks = (dry.size() + kBlockSize - 1) / kBlockSize;
    blocks.reserve(n_blocks);
    for (std::size_t blk = 0; blk < n_blocks; ++blk) {
      std::vector<cplx> buf(kFftSize, cplx(0.0, 0.0));
      const std::size_t begin = blk * kBlockSize;
      const std::size_t end = std::min(dry.size(), begin + kBlockSize);
      for (std::size_t i = begin; i < end; ++i) buf[i - begin] = cplx(dry[i], 0.0);
      fft_inplace(buf, false);
      blocks.push_back(std::move(buf));
    }
  }
};

std::vector<std::vector<cplx>> partition_ir(const std::vector<float>& ir) {
  const std::size_t n_parts = std::max<std::size_t>(1, (ir.size() + kBlockSize - 1) / kBlockSize);
  std::vector<std::vector<cplx>> parts;
  parts.reserve(n_parts);
  for (std::size_t p = 0; p < n_parts; ++p) {
    std::vector<cplx> buf(kFftSize, cplx(0.0, 0.0));
    const std::size_t begin = p * kBlockSize;
    const std::size_t end = std::min(ir.size(), begin + kBlockSize);
    for (std::size_t i = begin; i < end; ++i) buf[i - begin] = cplx(ir[i], 0.0);
    fft_inplace(buf, false);
    parts.push_back(std::move(buf));
  }
  return parts;
}

// One channel of linear convolution, output length dry + ir - 1.
std::vector<double> convolve_channel(const DrySpectra& dry, const std::vector<float>& ir) {
  const std::size_t out_len = dry.dry_length + ir.size() - 1;
  std::vector<double> out(out_len, 0.0);
  if (dry.dry_length == 0 || ir.empty()) return out;

  const auto parts = partition_ir(ir);
  const std::size_t total_blocks = dry.blocks.size() + parts.size() - 1;
  std::vector<cplx> acc(kFftSize);
  for (std::size_t m = 0; m < total_blocks; ++m) {
    std::fill(acc.begin(), acc.end(), cplx(0.0, 0.0));
    bool any = false;
    for (std::size_t p = 0; p < parts.size(); ++p) {
      if (p > m) break;
      const std::size_t k = m - p;
      if (k >= dry.blocks.size()) continue;
      const auto& x = dry.blocks[k];
      const auto& h = parts[p];
      for (std::size_t i = 0; i < kFftSize; ++i) acc[i] += x[i] * h[i];
      any = true;
    }
    if (!any) continue;
    fft_inplace(acc, true);
    const std::size_t base = m * kBlockSize;
    const std::size_t count = std::min(kFftSize, out_len > base ? out_len - base : 0);
    for (std::size_t i = 0; i < count; ++i) out[base + i] += acc[i].real();
  }
  return out;
}

std::vector<std::vector<double>> convolve_all_channels(const DrySpectra& dry,
                                                       const ImpulseResponse& ir) {
  std::vector<std::vector<double>> out;
  out.reserve(ir.num_channels());
  for (const auto& ch : ir.channels) out.push_back(convolve_channel(dry, ch));
  return out;
}

}  // namespace

AudioBuffer convolve(const AudioBuffer& dry, const ImpulseResponse& ir) {
  if (dry.num_channels() != 1) throw ValidationError("convolve: dry input must be mono");
  if (dry.sample_rate != ir.sample_rate)
    throw ValidationError("convolve: sample rate mismatch (" + std::to_string(dry.sample_rate) +
                          " vs " + std::to_string(ir.sample_rate) + ")");
  if (ir.num_channels() == 0 || ir.num_frames() == 0)
    throw ValidationError("convolve: empty impulse response");

  const DrySpectra spectra(dry.channels[0]);
  AudioBuffer out(ir.num_channels(), dry.num_frames() + ir.num_frames() - 1, dry.sample_rate);
  for (std::size_t c = 0; c < ir.num_channels(); ++c) {
    const auto y = convolve_channel(spectra, ir.channels[c]);
    for (std::size_t t = 0; t < y.size(); ++t) out.channels[c][t] = static_cast<float>(y[t]);
  }
  return out;
}

double interp_weight(const Vec3& r_j, const Vec3& r_j1, const Vec3& r_t) {
  const double span = distance(r_j, r_j1);
  if (span < 1e-12) throw DomainError("interp_weight: adjacent positions coincide");
  return std::clamp(distance(r_j, r_t) / span, 0.0, 1.0);
}

void MovingRender::validate(const AudioBuffer& dry) const {
  if (positions.size() < 2 || rirs.size() < 2)
    throw ValidationError("render_moving: needs at least 2 RIR positions");
  if (positions.size() != rirs.size())
    throw ValidationError("render_moving: positions/rirs size mismatch");
  if (dry.num_channels() != 1) throw ValidationError("render_moving: dry input must be mono");
  const auto channels = rirs.front().num_channels();
  const auto frames = rirs.front().num_frames();
  for (const auto& r : rirs) {
    if (r.sample_rate != dry.sample_rate)
      throw ValidationError("render_moving: RIR sample rate mismatch");
    if (r.num_channels() != channels || r.num_frames() != frames)
      throw ValidationError("render_moving: RIRs must share shape");
  }
  if (!(trajectory.duration > 0.0))
    throw ValidationError("render_moving: trajectory duration is unset");
  const double dry_dur = dry.duration_seconds();
  if (std::abs(dry_dur - trajectory.duration) > 1.0 / dry.sample_rate + 1e-9)
    throw ValidationError("render_moving: trajectory duration must equal dry duration");
  for (std::size_t i = 1; i < positions.size(); ++i)
    if (positions[i].arc_length <= positions[i - 1].arc_length - 1e-12)
      throw ValidationError("render_moving: positions must be increasing in arc length");
}

AudioBuffer render_moving(const AudioBuffer& dry, const MovingRender& mr) {
  mr.validate(dry);

  const DrySpectra spectra(dry.channels[0]);
  const std::size_t n_channels = mr.rirs.front().num_channels();
  const std::size_t out_len = dry.num_frames() + mr.rirs.front().num_frames() - 1;
  AudioBuffer out(n_channels, out_len, dry.sample_rate);

  // Lazy per-position renders; only the bracketing pair stays alive.
  std::map<std::size_t, std::vector<std::vector<double>>> live;
  const auto render_at = [&](std::size_t j) -> const std::vector<std::vector<double>>& {
    auto it = live.find(j);
    if (it == live.end()) it = live.emplace(j, convolve_all_channels(spectra, mr.rirs[j])).first;
    return it->second;
  };

  const double speed = mr.trajectory.total_length / mr.trajectory.duration;
  std::size_t bracket = 0;  // current segment [bracket, bracket+1]
  const std::size_t last = mr.positions.size() - 2;

  for (std::size_t t = 0; t < out_len; ++t) {
    const double arc = std::clamp(speed * (static_cast<double>(t) / dry.sample_rate), 0.0,
                                  mr.trajectory.total_length);
    while (bracket < last && arc > mr.positions[bracket + 1].arc_length) {
      live.erase(bracket);
      ++bracket;
    }
    const double s0 = mr.positions[bracket].arc_length;
    const double s1 = mr.positions[bracket + 1].arc_length;
    const double alpha = s1 > s0 ? std::clamp((arc - s0) / (s1 - s0), 0.0, 1.0) : 0.0;

    const auto& y0 = render_at(bracket);
    const auto& y1 = render_at(bracket + 1);
    for (std::size_t c = 0; c < n_channels; ++c)
      out.channels[c][t] = static_cast<float>((1.0 - alpha) * y0[c][t] + alpha * y1[c][t]);
  }
  return out;
}

AudioBuffer render_static(const AudioBuffer& dry, const Scene& scene, const RIRRequest& req) {
  if (dry.num_channels() != 1) throw ValidationError("render_static: dry input must be mono");
  const ImpulseResponse ir = trace_rir(scene, req);
  return convolve(dry, ir);
}

}  // namespace sonicforge
