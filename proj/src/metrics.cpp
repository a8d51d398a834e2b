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
#include "sonicforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sonicforge/dsp.hpp"
#include "sonicforge/errors.hpp"

namespace sonicforge {

namespace {

double clamp_db(double value) { return std::clamp(value, -kDbClamp, kDbClamp); }

std::vector<double> mono_samples(const AudioBuffer& buf, const char* who) {
  if (buf.num_channels() != 1)
    throw ValidationError(std::string(who) + ": expected a mono buffer");
  return std::vector<double>(buf.channels[0].begin(), buf.channels[0].end());
}

void require_equal_length(const AudioBuffer& a, const AudioBuffer& b, const char* who) {
  if (a.num_frames() != b.num_frames())
    throw ValidationError(std::string(who) + ": buffers differ in length");
}

double energy(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

}  // namespace

Spectrogram stft(const AudioBuffer& buf, int window, int hop) {
  if (buf.num_channels() != 1) throw ValidationError("stft: expected a mono buffer");
  if (window <= 0 || hop <= 0 || hop > window)
    throw ConfigError("stft: need 0 < hop <= window");
  if (!is_pow2(static_cast<std::size_t>(window)))
    throw ConfigError("stft: window size must be a power of two");

  // Overlap-add of the squared window must cover every sample (NOLA);
  // otherwise istft cannot invert and the combination is rejected.
  const auto win = hann_periodic(static_cast<std::size_t>(window));
  {
    std::vector<double> cover(static_cast<std::size_t>(2 * window), 0.0);
    for (int start = -window; start <= 2 * window; start += hop)
      for (int i = 0; i < window; ++i) {
        const int n = start + i;
        if (n >= 0 && n < 2 * window)
          cover[static_cast<std::size_t>(n)] += win[static_cast<std::size_t>(i)] *
                                                win[static_cast<std::size_t>(i)];
      }
    const double min_cover = *std::min_element(cover.begin() + window / 2,
                                               cover.end() - window / 2);
    if (min_cover < 1e-9)
      throw ConfigError("stft: window/hop combination violates COLA (uncovered samples)");
  }

  const std::size_t n = buf.num_frames();
  const std::size_t half = static_cast<std::size_t>(window) / 2;
  const std::size_t n_frames = n / static_cast<std::size_t>(hop) + 1;

  Spectrogram spec;
  spec.window = window;
  spec.hop = hop;
  spec.sample_rate = buf.sample_rate;
  spec.num_samples = n;
  spec.bins.assign(half + 1, std::vector<cplx>(n_frames));

  std::vector<cplx> frame(static_cast<std::size_t>(window));
  const auto& x = buf.channels[0];
  for (std::size_t f = 0; f < n_frames; ++f) {
    const long start = static_cast<long>(f) * hop - static_cast<long>(half);  // centered
    for (int i = 0; i < window; ++i) {
      const long t = start + i;
      const double v = (t >= 0 && t < static_cast<long>(n)) ? x[static_cast<std::size_t>(t)] : 0.0;
      frame[static_cast<std::size_t>(i)] = cplx(v * win[static_cast<std::size_t>(i)], 0.0);
    }
    fft_inplace(frame, false);
    for (std::size_t k = 0; k <= half; ++k) spec.bins[k][f] = frame[k];
  }
  return spec;
}

AudioBuffer istft(const Spectrogram& spec) {
  if (spec.bins.empty() || spec.window <= 0 || spec.hop <= 0)
    throw ValidationError("istft: empty spectrogram");
  const int window = spec.window;
  const int hop = spec.hop;
  const std::size_t half = static_cast<std::size_t>(window) / 2;
  if (spec.num_freqs() != half + 1)
    throw ValidationError("istft: bin count does not match window size");

  const auto win = hann_periodic(static_cast<std::size_t>(window));
  const std::size_t n_frames = spec.num_frames();
  const std::size_t padded = static_cast<std::size_t>(n_frames - 1) * hop + window;
  std::vector<double> acc(padded, 0.0);
  std::vector<double> norm(padded, 0.0);

  std::vector<cplx> frame(static_cast<std::size_t>(window));
  for (std::size_t f = 0; f < n_frames; ++f) {
    for (std::size_t k = 0; k <= half; ++k) frame[k] = spec.bins[k][f];
    for (std::size_t k = half + 1; k < static_cast<std::size_t>(window); ++k)
      frame[k] = std::conj(spec.bins[static_cast<std::size_t>(window) - k][f]);
    fft_inplace(frame, true);
    const std::size_t start = f * static_cast<std::size_t>(hop);
    for (int i = 0; i < window; ++i) {
      const double w = win[static_cast<std::size_t>(i)];
      acc[start + static_cast<std::size_t>(i)] += w * frame[static_cast<std::size_t>(i)].real();
      norm[start + static_cast<std::size_t>(i)] += w * w;
    }
  }

  const std::size_t n = spec.num_samples;
  AudioBuffer out(1, n, spec.sample_rate);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t p = t + half;  // undo the centering pad
    out.channels[0][t] =
        static_cast<float>(p < padded && norm[p] > 1e-12 ? acc[p] / norm[p] : 0.0);
  }
  return out;
}

double snr_loss(const AudioBuffer& ref, const AudioBuffer& est) {
  require_equal_length(ref, est, "snr_loss");
  const auto x = mono_samples(ref, "snr_loss");
  const auto xb = mono_samples(est, "snr_loss");
  const double signal = energy(x);
  if (signal <= 0.0) throw DomainError("snr_loss: reference is all-zero");
  double err = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) err += (x[i] - xb[i]) * (x[i] - xb[i]);
  if (err <= 0.0) return -kDbClamp;
  return clamp_db(-10.0 * std::log10(signal / err));
}

double si_snr(const AudioBuffer& ref, const AudioBuffer& est, bool zero_mean) {
  require_equal_length(ref, est, "si_snr");
  auto x = mono_samples(ref, "si_snr");
  auto xb = mono_samples(est, "si_snr");
  if (zero_mean) {
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    const double mb = std::accumulate(xb.begin(), xb.end(), 0.0) / static_cast<double>(xb.size());
    for (double& v : x) v -= mx;
    for (double& v : xb) v -= mb;
  }
  const double ref_energy = energy(x);
  const double est_energy = energy(xb);
  if (ref_energy <= 0.0 || est_energy <= 0.0)
    throw DomainError("si_snr: zero-energy input after centering");

  double inner = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) inner += x[i] * xb[i];
  const double scale = inner / ref_energy;
  double target_energy = 0.0, error_energy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = scale * x[i];
    target_energy += s * s;
    const double e = xb[i] - s;
    error_energy += e * e;
  }
  if (error_energy <= 0.0) return kDbClamp;
  if (target_energy <= 0.0) return -kDbClamp;
  return clamp_db(10.0 * std::log10(target_energy / error_energy));
}

PermutationResult pit_select(const std::vector<AudioBuffer>& refs,
                             const std::vector<AudioBuffer>& ests, const PairwiseLoss& pairwise) {
  const std::size_t m = refs.size();
  if (m == 0 || ests.size() != m)
    throw ValidationError("pit_select: need equal non-empty ref/est sets");
  if (m > 6) throw ValidationError("pit_select: more than 6 sources (exhaustive search guard)");

  std::vector<std::vector<double>> loss(m, std::vector<double>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) loss[i][j] = pairwise(refs[i], ests[j]);

  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_total = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) total += loss[i][static_cast<std::size_t>(perm[i])];
    if (total < best_total) {
      best_total = total;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  PermutationResult result;
  result.assignment = best;
  result.total = best_total;
  result.pair_losses.resize(m);
  for (std::size_t i = 0; i < m; ++i)
    result.pair_losses[i] = loss[i][static_cast<std::size_t>(best[i])];
  return result;
}

double crm_mse(const Spectrogram& est_mask, const Spectrogram& ideal_mask) {
  if (!est_mask.same_shape(ideal_mask)) throw ValidationError("crm_mse: shape mismatch");
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t f = 0; f < est_mask.num_freqs(); ++f)
    for (std::size_t t = 0; t < est_mask.num_frames(); ++t) {
      acc += std::norm(est_mask.bins[f][t] - ideal_mask.bins[f][t]);
      ++count;
    }
  return count ? acc / static_cast<double>(count) : 0.0;
}

double complex_magnitude_loss(const Spectrogram& est, const Spectrogram& ref, double alpha) {
  if (!est.same_shape(ref)) throw ValidationError("complex_magnitude_loss: shape mismatch");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ValidationError("complex_magnitude_loss: alpha must be in [0,1]");
  double complex_acc = 0.0, magnitude_acc = 0.0;
  std::size_t count = 0;
  for (std::size_t f = 0; f < est.num_freqs(); ++f)
    for (std::size_t t = 0; t < est.num_frames(); ++t) {
      const cplx d = est.bins[f][t] - ref.bins[f][t];
      complex_acc += d.real() * d.real() + d.imag() * d.imag();
      const double dm = std::abs(est.bins[f][t]) - std::abs(ref.bins[f][t]);
      magnitude_acc += dm * dm;
      ++count;
    }
  if (count == 0) return 0.0;
  return alpha * complex_acc / static_cast<double>(count) +
         (1.0 - alpha) * magnitude_acc / static_cast<double>(count);
}

double stagewise_loss(const std::vector<Spectrogram>& stages, const Spectrogram& ref,
                      const std::vector<double>& stage_weights) {
  if (stages.empty() || stages.size() != stage_weights.size())
    throw ValidationError("stagewise_loss: stage/weight count mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (!stages[i].same_shape(ref)) throw ValidationError("stagewise_loss: shape mismatch");
    // weight * (complex + magnitude), i.e. both terms at full strength
    const double lc = complex_magnitude_loss(stages[i], ref, 1.0);
    const double lm = complex_magnitude_loss(stages[i], ref, 0.0);
    total += stage_weights[i] * (lc + lm);
  }
  return total;
}

}  // namespace sonicforge
