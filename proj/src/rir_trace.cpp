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
#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "sonicforge/errors.hpp"
#include "sonicforge/fft.hpp"
#include "sonicforge/rir.hpp"
#include "sonicforge/rng.hpp"

namespace sonicforge {

namespace {

// Fraction of a ray's energy absorbed by the receiver sphere per crossing.
// Deposits are re-scaled by the inverse at synthesis time, so the stored
// histogram stays bounded by the emitted energy while the synthesized
// pressure keeps the 1/d calibration of the deterministic direct tap.
constexpr double kDetectorAbsorption = 0.05;
constexpr double kEnergyFloorRel = 1e-6;  // -60 dB relative to emission
constexpr double kRayOffset = 1e-6;       // m, post-bounce self-intersection guard
constexpr double kMinDirectDistance = 1e-3;

// Atmospheric attenuation per octave band, dB/m (approx. 20 C, 50% RH).
constexpr std::array<double, kNumBands> kAirDbPerMeter = {0.0004, 0.0011, 0.0022,
                                                          0.0042, 0.0092, 0.0262};

struct Onb {
  Vec3 t1, t2;
};

Onb make_onb(const Vec3& n) {
  const double sign = std::copysign(1.0, n.z);
  const double a = -1.0 / (sign + n.z);
  const double b = n.x * n.y * a;
  return {Vec3{1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x},
          Vec3{b, sign + n.y * n.y * a, -n.y}};
}

Vec3 uniform_sphere_dir(Rng& rng) {
  const double y = 1.0 - 2.0 * rng.uniform();
  const double phi = 2.0 * M_PI * rng.uniform();
  const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
  return {r * std::cos(phi), y, r * std::sin(phi)};
}

Vec3 cosine_hemisphere_dir(Rng& rng, const Vec3& n) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  const double r = std::sqrt(u1);
  const double theta = 2.0 * M_PI * u2;
  const double z = std::sqrt(std::max(0.0, 1.0 - u1));
  const Onb onb = make_onb(n);
  return (onb.t1 * (r * std::cos(theta)) + onb.t2 * (r * std::sin(theta)) + n * z).normalized();
}

Vec3 reflect(const Vec3& d, const Vec3& n) { return d - n * (2.0 * d.dot(n)); }

// World direction-of-arrival -> first-order ambisonic gains, ACN order
// (W, Y, Z, X), SN3D. Ambisonic frame: front = -z, left = -x, up = +y.
std::array<double, 4> foa_gains(const Vec3& doa) {
  return {1.0, -doa.x, doa.y, -doa.z};
}

struct BandAccum {
  std::array<std::vector<double>, kNumBands> energy;
  std::array<std::array<std::vector<double>, kNumBands>, 3> intensity;

  BandAccum(std::size_t n_bins, bool want_intensity) {
    for (auto& band : energy) band.assign(n_bins, 0.0);
    if (want_intensity)
      for (auto& axis : intensity)
        for (auto& band : axis) band.assign(n_bins, 0.0);
  }
};

struct TraceParams {
  double capture_radius;
  double max_ir_seconds;
  int max_bounces;
  int n_rays;
  double bin_width;
  bool air_absorption;
};

// Traces every ray of one receiver channel. Rays are split into chunks
// whose layout depends only on n_rays; each chunk accumulates privately
// and chunks are reduced in index order, so the result is bit-identical
// for any thread count.
void trace_channel(const Scene& scene, const Vec3& source, const Vec3& receiver,
                   const TraceParams& p, std::uint64_t seed, bool want_intensity, int n_threads,
                   std::array<std::vector<double>, kNumBands>& energy_out,
                   std::array<std::array<std::vector<double>, kNumBands>, 3>* intensity_out) {
  const std::size_t n_bins =
      static_cast<std::size_t>(std::ceil(p.max_ir_seconds / p.bin_width));
  const double radius_sq = p.capture_radius * p.capture_radius;
  const double max_dist = kSpeedOfSound * p.max_ir_seconds;
  const double e0 = 1.0 / static_cast<double>(p.n_rays);
  const double floor_energy = e0 * kEnergyFloorRel;

  const int chunk_size = std::max(1, (p.n_rays + 63) / 64);
  const int n_chunks = (p.n_rays + chunk_size - 1) / chunk_size;
  std::vector<BandAccum> chunks;
  chunks.reserve(static_cast<std::size_t>(n_chunks));
  for (int i = 0; i < n_chunks; ++i) chunks.emplace_back(n_bins, want_intensity);

  auto run_chunk = [&](int chunk) {
    BandAccum& acc = chunks[static_cast<std::size_t>(chunk)];
    const int ray_begin = chunk * chunk_size;
    const int ray_end = std::min(p.n_rays, ray_begin + chunk_size);
    for (int ray = ray_begin; ray < ray_end; ++ray) {
      Rng rng(derive_seed(seed, 0x7261u, static_cast<std::uint64_t>(ray)));
      Vec3 pos = source;
      Vec3 dir = uniform_sphere_dir(rng);
      std::array<double, kNumBands> energy;
      energy.fill(e0);
      double travel = 0.0;
      int bounce = 0;

      while (true) {
        const double remaining = max_dist - travel;
        if (remaining <= 0.0) break;
        const auto hit = scene.ray_intersect(pos, dir, remaining);
        const double seg_len = hit ? hit->distance : remaining;

        if (bounce > 0) {  // the direct path is counted deterministically
          const Vec3 to_recv = receiver - pos;
          const double t_closest = to_recv.dot(dir);
          if (t_closest > 1e-9 && t_closest < seg_len &&
              (to_recv - dir * t_closest).norm_sq() < radius_sq) {
            const double dist_at_recv = travel + t_closest;
            const auto bin = static_cast<std::size_t>(dist_at_recv / kSpeedOfSound /
                                                      p.bin_width);
            if (bin < n_bins) {
              const Vec3 doa = -dir;
              for (int b = 0; b < kNumBands; ++b) {
                const auto bi = static_cast<std::size_t>(b);
                double dep = kDetectorAbsorption * energy[bi];
                if (p.air_absorption)
                  dep *= std::pow(10.0, -kAirDbPerMeter[bi] * dist_at_recv / 10.0);
                acc.energy[bi][bin] += dep;
                energy[bi] -= kDetectorAbsorption * energy[bi];
                if (want_intensity) {
                  acc.intensity[0][bi][bin] += dep * doa.x;
                  acc.intensity[1][bi][bin] += dep * doa.y;
                  acc.intensity[2][bi][bin] += dep * doa.z;
                }
              }
            }
          }
        }

        if (!hit) break;  // escaped through a gap or ran out of time
        travel += hit->distance;

        const auto& coeffs = scene.surface_coeffs(hit->surface_id);
        double max_energy = 0.0;
        double mean_scatter = 0.0;
        for (int b = 0; b < kNumBands; ++b) {
          const auto bi = static_cast<std::size_t>(b);
          energy[bi] *= 1.0 - coeffs.absorption[bi];
          max_energy = std::max(max_energy, energy[bi]);
          mean_scatter += coeffs.scattering[bi];
        }
        mean_scatter /= kNumBands;
        if (max_energy < floor_energy) break;
        if (++bounce >= p.max_bounces) break;

        const Vec3 hit_point = pos + dir * hit->distance;
        dir = rng.uniform() < mean_scatter ? cosine_hemisphere_dir(rng, hit->normal)
                                           : reflect(dir, hit->normal).normalized();
        pos = hit_point + hit->normal * kRayOffset;
      }
    }
  };

  const int workers = std::max(1, std::min(n_threads, n_chunks));
  if (workers == 1) {
    for (int chunk = 0; chunk < n_chunks; ++chunk) run_chunk(chunk);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        int chunk;
        while ((chunk = next.fetch_add(1)) < n_chunks) run_chunk(chunk);
      });
    for (auto& t : pool) t.join();
  }

  for (auto& band : energy_out) band.assign(n_bins, 0.0);
  if (intensity_out)
    for (auto& axis : *intensity_out)
      for (auto& band : axis) band.assign(n_bins, 0.0);
  for (const auto& acc : chunks) {
    for (int b = 0; b < kNumBands; ++b) {
      const auto bi = static_cast<std::size_t>(b);
      for (std::size_t k = 0; k < n_bins; ++k) energy_out[bi][k] += acc.energy[bi][k];
      if (intensity_out)
        for (int axis = 0; axis < 3; ++axis)
          for (std::size_t k = 0; k < n_bins; ++k)
            (*intensity_out)[static_cast<std::size_t>(axis)][bi][k] +=
                acc.intensity[static_cast<std::size_t>(axis)][bi][k];
    }
  }
}

// Band-limited unit white-noise carriers, one per band, sharing the
// power-complementary octave partition. Purely a function of (seed, band).
std::array<std::vector<double>, kNumBands> make_carriers(std::uint64_t seed, std::size_t length,
                                                         int sample_rate) {
  const std::size_t n = next_pow2(std::max<std::size_t>(length, 2));
  std::array<std::vector<double>, kNumBands> carriers;
  for (int b = 0; b < kNumBands; ++b) {
    Rng rng(derive_seed(seed, 0xCA55u, static_cast<std::uint64_t>(b)));
    std::vector<cplx> spec(n);
    for (auto& v : spec) v = cplx(rng.normal(), 0.0);
    fft_inplace(spec, false);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t mirrored = std::min(k, n - k);
      const double f = static_cast<double>(mirrored) * sample_rate / static_cast<double>(n);
      spec[k] *= band_amplitude(b, f);
    }
    fft_inplace(spec, true);
    auto& carrier = carriers[static_cast<std::size_t>(b)];
    carrier.resize(length);
    for (std::size_t t = 0; t < length; ++t) carrier[t] = spec[t].real();
  }
  return carriers;
}

// Number of IR samples that land in each histogram bin.
std::vector<int> bin_sample_counts(std::size_t n_bins, std::size_t length, int sample_rate,
                                   double bin_width) {
  std::vector<int> counts(n_bins, 0);
  for (std::size_t t = 0; t < length; ++t) {
    const auto bin = static_cast<std::size_t>(
        static_cast<double>(t) / sample_rate / bin_width);
    if (bin < n_bins) ++counts[bin];
  }
  return counts;
}

// Places amplitude at a fractional delay, optionally shaped by a per-band
// pressure gain FIR (flat gains bypass the FIR entirely).
void add_direct_tap(std::vector<double>& out, double t_samples, double amplitude,
                    const std::array<double, kNumBands>& gains, int sample_rate) {
  if (gains_are_flat(gains)) {
    add_sinc_tap(out, t_samples, amplitude * gains[0]);
    return;
  }
  const auto fir = band_gain_fir(gains, sample_rate);
  std::vector<double> tap(40, 0.0);
  const double n0 = std::floor(t_samples);
  add_sinc_tap(tap, 20.0 + (t_samples - n0), amplitude);
  const long base = static_cast<long>(n0) - 20 - band_gain_fir_delay();
  for (std::size_t i = 0; i < tap.size(); ++i) {
    if (tap[i] == 0.0) continue;
    for (std::size_t j = 0; j < fir.size(); ++j) {
      const long idx = base + static_cast<long>(i + j);
      if (idx >= 0 && idx < static_cast<long>(out.size()))
        out[static_cast<std::size_t>(idx)] += tap[i] * fir[j];
    }
  }
}

}  // namespace

int ReceiverConfig::num_channels() const {
  switch (kind) {
    case ReceiverKind::mono:
      return 1;
    case ReceiverKind::ambisonics_fo:
      return 4;
    case ReceiverKind::array:
      return static_cast<int>(element_offsets.size());
  }
  return 1;
}

void ReceiverConfig::validate() const {
  if (!(capture_radius > 0.0)) throw ValidationError("receiver: capture_radius must be > 0");
  if (!center.finite()) throw ValidationError("receiver: non-finite center");
  if (kind == ReceiverKind::array) {
    if (element_offsets.empty())
      throw ValidationError("receiver: array needs at least one element");
    for (const auto& o : element_offsets)
      if (!o.finite()) throw ValidationError("receiver: non-finite element offset");
  }
}

void RIRRequest::validate() const {
  receiver.validate();
  if (n_rays < 1) throw ValidationError("rir: n_rays must be >= 1");
  if (sample_rate <= 0) throw ValidationError("rir: sample_rate must be > 0");
  if (!(max_ir_seconds > 0.0)) throw ValidationError("rir: max_ir_seconds must be > 0");
  if (max_bounces < 1) throw ValidationError("rir: max_bounces must be >= 1");
  if (!source.finite()) throw ValidationError("rir: non-finite source position");
}

double EnergyHistogram::channel_band_total(std::size_t channel, int band) const {
  double sum = 0.0;
  for (double v : bins[channel][static_cast<std::size_t>(band)]) sum += v;
  return sum;
}

TraceResult trace_rir_detailed(const Scene& scene, const RIRRequest& req) {
  req.validate();
  if (!scene.inside_bounds(req.source))
    throw PlacementError("rir: source outside scene bounds");
  if (!scene.inside_bounds(req.receiver.center))
    throw PlacementError("rir: receiver outside scene bounds");

  // Per-channel receiver points: one per array element, otherwise the center.
  std::vector<Vec3> points;
  std::vector<std::uint64_t> seeds;
  const bool foa = req.receiver.kind == ReceiverKind::ambisonics_fo;
  if (req.receiver.kind == ReceiverKind::array) {
    for (std::size_t e = 0; e < req.receiver.element_offsets.size(); ++e) {
      points.push_back(req.receiver.center + req.receiver.element_offsets[e]);
      seeds.push_back(req.seed ^ static_cast<std::uint64_t>(e));
    }
  } else {
    points.push_back(req.receiver.center);
    seeds.push_back(req.seed);
  }
  for (const auto& pt : points) {
    if (!scene.inside_bounds(pt))
      throw PlacementError("rir: receiver element outside scene bounds");
    if (distance(req.source, pt) < kMinDirectDistance)
      throw PlacementError("rir: source and receiver coincide (direct path < 1 mm)");
  }

  const auto length = static_cast<std::size_t>(std::llround(req.max_ir_seconds * req.sample_rate));
  const std::size_t n_bins =
      static_cast<std::size_t>(std::ceil(req.max_ir_seconds / 0.001));

  TraceParams params{req.receiver.capture_radius, req.max_ir_seconds, req.max_bounces,
                     req.n_rays, 0.001, req.air_absorption};

  EnergyHistogram hist;
  hist.bin_width = params.bin_width;
  hist.bins.resize(points.size());

  const int out_channels = req.receiver.num_channels();
  ImpulseResponse ir;
  ir.sample_rate = req.sample_rate;
  ir.source_position = req.source;
  ir.receiver_center = req.receiver.center;
  ir.channels.assign(static_cast<std::size_t>(out_channels), std::vector<float>(length, 0.0f));

  const double cal =
      4.0 / (req.receiver.capture_radius * req.receiver.capture_radius * kDetectorAbsorption);
  const auto counts = bin_sample_counts(n_bins, length, req.sample_rate, params.bin_width);

  for (std::size_t trace = 0; trace < points.size(); ++trace) {
    trace_channel(scene, req.source, points[trace], params, seeds[trace], foa, req.n_threads,
                  hist.bins[trace], foa ? &hist.intensity : nullptr);

    const auto carriers = make_carriers(seeds[trace], length, req.sample_rate);
    const auto& bins = hist.bins[trace];

    std::vector<std::vector<double>> tail(
        static_cast<std::size_t>(foa ? 4 : 1), std::vector<double>(length, 0.0));
    for (std::size_t t = 0; t < length; ++t) {
      const auto bin = static_cast<std::size_t>(
          static_cast<double>(t) / req.sample_rate / params.bin_width);
      if (bin >= n_bins || counts[bin] == 0) continue;
      for (int b = 0; b < kNumBands; ++b) {
        const auto bi = static_cast<std::size_t>(b);
        const double e = bins[bi][bin];
        if (e <= 0.0) continue;
        const double amp = std::sqrt(e * cal / counts[bin]);
        const double sample = carriers[bi][t] * amp;
        tail[0][t] += sample;
        if (foa) {
          Vec3 mean_doa{hist.intensity[0][bi][bin] / e, hist.intensity[1][bi][bin] / e,
                        hist.intensity[2][bi][bin] / e};
          const auto g = foa_gains(mean_doa);
          for (int ch = 1; ch < 4; ++ch)
            tail[static_cast<std::size_t>(ch)][t] += sample * g[static_cast<std::size_t>(ch)];
        }
      }
    }

    // Deterministic direct tap: delay d/c, amplitude 1/d, per-band
    // occlusion applied as sqrt(energy) pressure gains.
    const Vec3 to_source = req.source - points[trace];
    const double d = to_source.norm();
    const auto occ = scene.occlusion_factor(req.source, points[trace]);
    std::array<double, kNumBands> gains{};
    for (int b = 0; b < kNumBands; ++b) {
      const auto bi = static_cast<std::size_t>(b);
      gains[bi] = std::sqrt(occ[bi]);
      if (req.air_absorption) gains[bi] *= std::pow(10.0, -kAirDbPerMeter[bi] * d / 20.0);
    }
    const double delay_samples = d / kSpeedOfSound * req.sample_rate;

    if (foa) {
      const auto g = foa_gains(to_source.normalized());
      for (int ch = 0; ch < 4; ++ch) {
        auto scaled = gains;
        for (auto& v : scaled) v *= g[static_cast<std::size_t>(ch)];
        // A negative ambisonic gain flips the tap sign; route it through
        // the amplitude instead so the FIR sees non-negative band gains.
        const double sign = g[static_cast<std::size_t>(ch)] < 0.0 ? -1.0 : 1.0;
        for (auto& v : scaled) v *= sign;
        add_direct_tap(tail[static_cast<std::size_t>(ch)], delay_samples, sign / d, scaled,
                       req.sample_rate);
      }
    } else {
      add_direct_tap(tail[0], delay_samples, 1.0 / d, gains, req.sample_rate);
    }

    if (foa) {
      for (int ch = 0; ch < 4; ++ch)
        for (std::size_t t = 0; t < length; ++t)
          ir.channels[static_cast<std::size_t>(ch)][t] =
              static_cast<float>(tail[static_cast<std::size_t>(ch)][t]);
    } else {
      for (std::size_t t = 0; t < length; ++t)
        ir.channels[trace][t] = static_cast<float>(tail[0][t]);
    }
  }

  return TraceResult{std::move(ir), std::move(hist)};
}

ImpulseResponse trace_rir(const Scene& scene, const RIRRequest& req) {
  return trace_rir_detailed(scene, req).ir;
}

}  // namespace sonicforge
