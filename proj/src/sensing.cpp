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

#include "onebit/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace onebit {

double PulseShape::eval(double t) const
{
    const double tc = symbol_period();
    const double u = t / tc;
    if (std::abs(u) > kSupportSymbols)
        return 0.0;
    if (rolloff <= 0.0)
        return sinc(u);
    const double edge = 2.0 * rolloff * u;
    const double denom = 1.0 - edge * edge;
    if (std::abs(denom) < 1e-10)
        return (kPi / 4.0) * sinc(1.0 / (2.0 * rolloff));
    return sinc(u) * std::cos(kPi * rolloff * u) / denom;
}

void SamplingConfig::validate() const
{
    if (oversampling < 1)
        throw Error("oversampling factor must be >= 1");
    if (num_samples < 1)
        throw Error("number of samples must be >= 1");
    if (!(bandwidth > 0.0))
        throw Error("bandwidth must be positive");
}

void Waveform::validate() const
{
    if (alphabet_size != 2 && alphabet_size != 4)
        throw Error("alphabet size must be 2 or 4");
    if (!(pulse.bandwidth > 0.0))
        throw Error("pulse bandwidth must be positive");
    for (const auto &a : symbols)
        if (std::abs(std::abs(a) - 1.0) > 1e-12)
            throw Error("pilot symbols must have unit modulus");
    if (num_symbols() * symbol_period() > duration * (1.0 + 1e-12))
        throw Error("pilot sequence longer than the observation window");
}

Waveform Waveform::pi2_bpsk(const SamplingConfig &cfg, std::uint64_t seed, double rolloff)
{
    cfg.validate();
    Waveform w;
    w.alphabet_size = 2;
    w.pulse.bandwidth = cfg.bandwidth;
    w.pulse.rolloff = rolloff;
    w.duration = cfg.duration();
    const int count = std::max(1, static_cast<int>(std::floor(w.duration / w.symbol_period() + 1e-9)));
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);
    w.symbols.resize(count);
    for (auto &a : w.symbols)
        a = coin(rng) ? cplx(1.0, 0.0) : cplx(-1.0, 0.0);
    return w;
}

OneBitVector::OneBitVector(CVector entries) : entries_(std::move(entries))
{
    const double h = 1.0 / std::sqrt(2.0);
    for (Eigen::Index i = 0; i < entries_.size(); ++i) {
        const cplx e = entries_[i];
        if (std::abs(std::abs(e.real()) - h) > 1e-12 || std::abs(std::abs(e.imag()) - h) > 1e-12)
            throw Error("one-bit entries must lie in {(+-1 +- j)/sqrt(2)}");
    }
}

CovarianceFactor CovarianceFactor::from(const RMatrix &sigma)
{
    Eigen::SelfAdjointEigenSolver<RMatrix> eig(sigma);
    if (eig.info() != Eigen::Success)
        throw Error("noise covariance eigendecomposition failed");
    CovarianceFactor f;
    RVector ev = eig.eigenvalues();
    const double top = std::max(ev.maxCoeff(), 0.0);
    f.floor = kRelativeFloor * (top > 0.0 ? top : 1.0);
    ev = ev.cwiseMax(f.floor);
    const RMatrix &q = eig.eigenvectors();
    f.sqrt = q * ev.cwiseSqrt().asDiagonal() * q.transpose();
    f.inv_sqrt = q * ev.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose();
    f.eigenvalues = ev;
    return f;
}

cplx baseband_signal(const Waveform &w, double t)
{
    const double tc = w.symbol_period();
    const double reach = PulseShape::kSupportSymbols * tc;
    const int n = w.num_symbols();
    const int k_lo = std::max(0, static_cast<int>(std::ceil((t - reach) / tc)));
    const int k_hi = std::min(n - 1, static_cast<int>(std::floor((t + reach) / tc)));
    cplx acc(0.0, 0.0);
    for (int k = k_lo; k <= k_hi; ++k) {
        const double g = w.pulse.eval(t - k * tc);
        if (g == 0.0)
            continue;
        const double phase = k * kPi / w.alphabet_size;
        acc += w.symbols[k] * std::polar(1.0, phase) * g;
    }
    return acc;
}

CVector sampled_signal_vector(const Waveform &w, double delay, const SamplingConfig &cfg)
{
    const double ts = cfg.sample_period();
    CVector out(cfg.num_samples);
    for (int l = 0; l < cfg.num_samples; ++l)
        out[l] = baseband_signal(w, l * ts - delay);
    return out;
}

RMatrix noise_covariance(int num_samples, int oversampling)
{
    if (num_samples < 1 || oversampling < 1)
        throw Error("noise_covariance requires L >= 1 and theta >= 1");
    RMatrix sigma(num_samples, num_samples);
    for (int i = 0; i < num_samples; ++i)
        for (int j = 0; j < num_samples; ++j)
            sigma(i, j) = sinc(std::abs(i - j) / static_cast<double>(oversampling));
    return sigma;
}

CVector draw_noise(const CovarianceFactor &factor, double power, std::uint64_t rng_seed)
{
    const Eigen::Index n = factor.sqrt.rows();
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    RVector re(n), im(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        re[i] = gauss(rng);
        im[i] = gauss(rng);
    }
    const double scale = std::sqrt(power / 2.0);
    CVector out(n);
    out.real() = scale * (factor.sqrt * re);
    out.imag() = scale * (factor.sqrt * im);
    return out;
}

CVector simulate_received(const Waveform &w, const ChannelParams &ch,
                          const SamplingConfig &cfg, const CovarianceFactor &factor,
                          std::uint64_t rng_seed)
{
    if (ch.direct_delay < 0.0 || ch.indirect_delay < 0.0 ||
        ch.direct_delay >= cfg.duration() || ch.indirect_delay >= cfg.duration())
        throw Error("channel delays must lie in [0, T)");
    CVector y = ch.direct_gain * sampled_signal_vector(w, ch.direct_delay, cfg) +
                ch.indirect_gain * sampled_signal_vector(w, ch.indirect_delay, cfg);
    if (ch.noise_power > 0.0)
        y += draw_noise(factor, ch.noise_power, rng_seed);
    return y;
}

CVector simulate_received(const Waveform &w, const ChannelParams &ch,
                          const SamplingConfig &cfg, std::uint64_t rng_seed)
{
    const auto factor = CovarianceFactor::from(noise_covariance(cfg.num_samples, cfg.oversampling));
    return simulate_received(w, ch, cfg, factor, rng_seed);
}

OneBitVector one_bit_quantize(const CVector &y, const CVector &gamma)
{
    if (y.size() != gamma.size())
        throw Error("one_bit_quantize: y and gamma lengths differ");
    const double h = 1.0 / std::sqrt(2.0);
    CVector z(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const cplx d = y[i] - gamma[i];
        z[i] = cplx(h * sign_pos(d.real()), h * sign_pos(d.imag()));
    }
    return OneBitVector(std::move(z));
}

CVector draw_temporal_thresholds(int num_samples, double a_max, std::uint64_t rng_seed)
{
    if (!(a_max > 0.0))
        throw Error("threshold amplitude must be positive");
    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> uni(-a_max, a_max);
    CVector g(num_samples);
    for (int i = 0; i < num_samples; ++i) {
        const double re = uni(rng);
        g[i] = cplx(re, uni(rng));
    }
    return g;
}

CVector sinc_interpolate(const CVector &nyquist, int oversampling)
{
    if (oversampling < 1)
        throw Error("oversampling factor must be >= 1");
    const Eigen::Index p_count = nyquist.size();
    CVector out(p_count * oversampling);
    for (Eigen::Index l = 0; l < out.size(); ++l) {
        if (l % oversampling == 0) {
            out[l] = nyquist[l / oversampling];
            continue;
        }
        const double pos = static_cast<double>(l) / oversampling;
        cplx acc(0.0, 0.0);
        for (Eigen::Index p = 0; p < p_count; ++p)
            acc += nyquist[p] * sinc(pos - static_cast<double>(p));
        out[l] = acc;
    }
    return out;
}

} // namespace onebit
