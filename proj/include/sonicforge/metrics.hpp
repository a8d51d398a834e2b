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
#ifndef SONICFORGE_METRICS_HPP
#define SONICFORGE_METRICS_HPP

#include <functional>
#include <vector>

#include "sonicforge/audio_buffer.hpp"
#include "sonicforge/fft.hpp"

namespace sonicforge {

/// Degenerate dB ratios are clamped to +-kDbClamp to keep batch statistics finite.
inline constexpr double kDbClamp = 60.0;

/// Complex time-frequency representation, bins indexed [freq][frame].
struct Spectrogram {
  std::vector<std::vector<cplx>> bins;  // [window/2 + 1][n_frames]
  int window = 512;
  int hop = 256;
  int sample_rate = 0;
  std::size_t num_samples = 0;  // original signal length, for exact istft

  std::size_t num_freqs() const { return bins.size(); }
  std::size_t num_frames() const { return bins.empty() ? 0 : bins.front().size(); }
  bool same_shape(const Spectrogram& o) const {
    return num_freqs() == o.num_freqs() && num_frames() == o.num_frames();
  }
};

/// Centered Hann-window STFT of a mono buffer (edges zero-padded).
Spectrogram stft(const AudioBuffer& buf, int window = 512, int hop = 256);

/// Weighted overlap-add inverse; reconstructs interior samples of
/// istft(stft(x)) within 1e-6 of x.
AudioBuffer istft(const Spectrogram& spec);

/// Negative SNR in dB: -10 log10(|ref|^2 / |ref - est|^2), clamped.
double snr_loss(const AudioBuffer& ref, const AudioBuffer& est);

/// Scale-invariant SNR in dB (projection-based), clamped. zero_mean
/// controls the centering step applied before projection.
double si_snr(const AudioBuffer& ref, const AudioBuffer& est, bool zero_mean = true);

struct PermutationResult {
  std::vector<int> assignment;      // est index matched to each ref
  std::vector<double> pair_losses;  // loss per matched pair
  double total = 0.0;
};

using PairwiseLoss = std::function<double(const AudioBuffer&, const AudioBuffer&)>;

/// Exact minimum-total-loss assignment over all M! permutations (M <= 6).
PermutationResult pit_select(const std::vector<AudioBuffer>& refs,
                             const std::vector<AudioBuffer>& ests, const PairwiseLoss& pairwise);

/// Mean squared error between complex masks: mean |est - ideal|^2.
double crm_mse(const Spectrogram& est_mask, const Spectrogram& ideal_mask);

/// alpha * complex MSE + (1 - alpha) * magnitude MSE, mean-reduced.
double complex_magnitude_loss(const Spectrogram& est, const Spectrogram& ref, double alpha = 0.5);

/// Sum over stages of weight_i * (complex MSE + magnitude MSE).
double stagewise_loss(const std::vector<Spectrogram>& stages, const Spectrogram& ref,
                      const std::vector<double>& stage_weights);

}  // namespace sonicforge

#endif  // SONICFORGE_METRICS_HPP
