// SPDX-License-Identifier: Apache-2.0
//
// onebit-loc: one-bit passive localization simulator
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// Node-side signal model: NB-IoT style pilot waveform, two-path channel with
// band-limited Gaussian noise, and the one-bit ADC.

#include "onebit/common.hpp"

#include <cstdint>
#include <vector>

namespace onebit {

struct PulseShape {
    double bandwidth = 180e3; // Hz, occupied bandwidth B
    double rolloff = 1.0;     // raised-cosine excess bandwidth factor

    // Symbol period whose raised-cosine spectrum occupies exactly [-B, B].
    double symbol_period() const { return (1.0 + rolloff) / (2.0 * bandwidth); }

    // Raised-cosine impulse response with g(0) = 1, truncated at +-8 symbols.
    double eval(double t) const;

    static constexpr double kSupportSymbols = 8.0;
};

struct SamplingConfig {
    int oversampling = 1;       // theta >= 1
    double bandwidth = 180e3;   // Hz
    int num_samples = 100;      // L

    double sample_period() const { return 1.0 / (2.0 * oversampling * bandwidth); }
    double duration() const { return num_samples * sample_period(); }
    void validate() const;
};

struct Waveform {
    std::vector<cplx> symbols; // unit-modulus pilots a_k
    int alphabet_size = 2;     // M in the rotation exp(j k pi / M)
    PulseShape pulse;
    double duration = 0.0;     // observation window T

    double symbol_period() const { return pulse.symbol_period(); }
    int num_symbols() const { return static_cast<int>(symbols.size()); }
    void validate() const;

    // Random pi/2-BPSK pilots filling the observation window of `cfg`.
    static Waveform pi2_bpsk(const SamplingConfig &cfg, std::uint64_t seed,
                             double rolloff = 1.0);
};

struct ChannelParams {
    cplx direct_gain{0.0, 0.0};
    cplx indirect_gain{0.0, 0.0};
    double direct_delay = 0.0;
    double indirect_delay = 0.0;
    double noise_power = 1.0; // sigma^2
};

// Complex vector whose entries are all in {(+-1 +- j)/sqrt(2)}.
class OneBitVector {
public:
    OneBitVector() = default;
    explicit OneBitVector(CVector entries);

    const CVector &entries() const { return entries_; }
    Eigen::Index size() const { return entries_.size(); }
    cplx operator[](Eigen::Index i) const { return entries_[i]; }

private:
    CVector entries_;
};

// Symmetric factorization of the noise covariance with an eigenvalue floor.
struct CovarianceFactor {
    RMatrix sqrt;        // Sigma^{1/2}
    RMatrix inv_sqrt;    // Sigma^{-1/2}
    RVector eigenvalues; // after flooring, ascending
    double floor = 0.0;

    static constexpr double kRelativeFloor = 1e-10;
    static CovarianceFactor from(const RMatrix &sigma);
};

cplx baseband_signal(const Waveform &w, double t);

// Entry l is s(l*Ts - delay), l = 0..L-1.
CVector sampled_signal_vector(const Waveform &w, double delay, const SamplingConfig &cfg);

// [Sigma]_{ij} = sinc(|i-j| / theta).
RMatrix noise_covariance(int num_samples, int oversampling);

CVector simulate_received(const Waveform &w, const ChannelParams &ch,
                          const SamplingConfig &cfg, std::uint64_t rng_seed);

// Same as above with a precomputed covariance factor.
CVector simulate_received(const Waveform &w, const ChannelParams &ch,
                          const SamplingConfig &cfg, const CovarianceFactor &factor,
                          std::uint64_t rng_seed);

// Circular-symmetric complex Gaussian noise with covariance power * Sigma.
CVector draw_noise(const CovarianceFactor &factor, double power, std::uint64_t rng_seed);

OneBitVector one_bit_quantize(const CVector &y, const CVector &gamma);

// Real and imaginary parts i.i.d. uniform on [-a_max, a_max].
CVector draw_temporal_thresholds(int num_samples, double a_max, std::uint64_t rng_seed);

// Band-limited interpolation of Nyquist-rate samples onto a theta-times finer grid.
CVector sinc_interpolate(const CVector &nyquist, int oversampling);

} // namespace onebit
