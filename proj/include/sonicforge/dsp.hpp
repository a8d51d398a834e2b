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
#ifndef SONICFORGE_DSP_HPP
#define SONICFORGE_DSP_HPP

#include <array>
#include <cstddef>
#include <vector>

namespace sonicforge {

/// Number of octave bands used for material coefficients and band energy.
inline constexpr int kNumBands = 6;

/// Octave band centers in Hz: 125 .. 4000.
std::array<double, kNumBands> band_centers();

/// Amplitude response of band `b` at frequency `f`, normalized so that
/// sum_b band_amplitude(b, f)^2 == 1 for every f (power-complementary
/// partition with 4th-order Butterworth-shaped crossovers). The lowest
/// band extends to DC and the highest to Nyquist.
double band_amplitude(int band, double f);

/// Evaluates the partition for all bands at once.
std::array<double, kNumBands> band_amplitudes(double f);

/// Linear-phase FIR whose magnitude blends per-band pressure gains
/// through the octave partition. When all gains are equal the result is
/// exactly gain * delta delayed by band_gain_fir_delay() samples.
std::vector<double> band_gain_fir(const std::array<double, kNumBands>& gains, double sample_rate);
int band_gain_fir_delay();

/// True when the per-band gains are equal to within 1e-12 (lets callers
/// skip the FIR and apply a plain scalar).
bool gains_are_flat(const std::array<double, kNumBands>& gains);

/// Accumulates `amplitude` at fractional sample position `t_samples` into
/// `buffer` using a 32-tap Hann-windowed sinc kernel. Taps that fall
/// outside the buffer are dropped. At integer positions the kernel
/// degenerates to a single exact tap.
void add_sinc_tap(std::vector<double>& buffer, double t_samples, double amplitude);

/// Periodic Hann window of length n.
std::vector<double> hann_periodic(std::size_t n);

/// Zeroth-order modified Bessel function of the first kind (series).
double bessel_i0(double x);

/// One second-order IIR section, direct form II transposed.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;  // denominator, a0 normalized to 1

  double process(double x, double& z1, double& z2) const {
    const double y = b0 * x + z1;
    z1 = b1 * x - a1 * y + z2;
    z2 = b2 * x - a2 * y;
    return y;
  }
};

/// Applies a cascade of biquads to a signal (zero initial state).
std::vector<double> biquad_filter(const std::vector<Biquad>& sections,
                                  const std::vector<double>& input);

}  // namespace sonicforge

#endif  // SONICFORGE_DSP_HPP
