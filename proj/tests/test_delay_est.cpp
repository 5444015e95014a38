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

#include "onebit/delay_est.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace onebit;

namespace {

SamplingConfig cfg_of(int theta, int samples)
{
    SamplingConfig c;
    c.oversampling = theta;
    c.num_samples = samples;
    return c;
}

// Naive DFT sum, kept separate from dft_matrix.
CVector dft_oracle(const CVector &x)
{
    const int l = static_cast<int>(x.size());
    CVector out = CVector::Zero(l);
    for (int n = 0; n < l; ++n)
        for (int k = 0; k < l; ++k)
            out[n] += x[k] * std::exp(cplx(0.0, -2.0 * M_PI * n * k / l));
    return out / std::sqrt(static_cast<double>(l));
}

} // namespace

TEST(DelayGrid, UniformSpacing)
{
    const DelayGrid g = DelayGrid::uniform(1.0, 10);
    ASSERT_EQ(g.size(), 10);
    EXPECT_DOUBLE_EQ(g.spacing, 0.1);
    for (int k = 1; k < 10; ++k)
        EXPECT_GT(g.points[k], g.points[k - 1]);
    EXPECT_DOUBLE_EQ(g.points[0], 0.0);
    EXPECT_THROW(DelayGrid::uniform(1.0, 0), Error);
}

TEST(Dft, UnitaryAndMatchesSum)
{
    const CMatrix f = dft_matrix(12);
    EXPECT_TRUE((f * f.adjoint()).isApprox(CMatrix::Identity(12, 12), 1e-13));
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    CVector x(12);
    for (auto &v : x)
        v = cplx(n01(rng), n01(rng));
    EXPECT_LT((f * x - dft_oracle(x)).norm(), 1e-12);
}

TEST(PhaseRamp, IntegerShiftIsCircularShift)
{
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n01;
    for (int l : {15, 16}) {
        CVector x(l);
        for (auto &v : x)
            v = cplx(n01(rng), n01(rng));
        const CMatrix f = dft_matrix(l);
        const double ts = 1e-6;
        const CVector shifted = f.adjoint() * (f * x).cwiseProduct(phase_ramp(3 * ts, l, ts));
        for (int i = 0; i < l; ++i)
            EXPECT_NEAR(std::abs(shifted[(i + 3) % l] - x[i]), 0.0, 1e-12);
    }
}

TEST(Dictionary, ShapeAndZeroDelayColumn)
{
    const SamplingConfig cfg = cfg_of(1, 32);
    const Waveform w = Waveform::pi2_bpsk(cfg, 1);
    const Dictionary d = build_dictionary(w, cfg, 64);
    EXPECT_EQ(d.rows(), 32);
    EXPECT_EQ(d.cols(), 64);
    EXPECT_EQ(d.grid.size(), 64);
    const CVector s0 = sampled_signal_vector(w, 0.0, cfg);
    EXPECT_LT((d.columns.col(0) - dft_oracle(s0)).norm(), 1e-12);
    EXPECT_THROW(build_dictionary(w, cfg, 31), Error);
}

TEST(Dictionary, OnGridColumnIsDelayedWaveform)
{
    const SamplingConfig cfg = cfg_of(2, 40);
    const Waveform w = Waveform::pi2_bpsk(cfg, 3);
    const Dictionary d = build_dictionary(w, cfg, 80);
    for (int shift : {1, 4, 9}) {
        const int k = 2 * shift; // grid spacing is half a sample
        const CVector direct = sampled_signal_vector(w, shift * cfg.sample_period(), cfg);
        // Entries before the shift hold the acausal pulse tail, which the
        // truncated atom sets to zero.
        for (int l = shift; l < 40; ++l)
            EXPECT_NEAR(std::abs(d.time(l, k) - direct[l]), 0.0, 1e-12) << "shift " << shift << " l " << l;
        for (int l = 0; l < shift; ++l)
            EXPECT_NEAR(std::abs(d.time(l, k)), 0.0, 1e-12);
    }
}

TEST(Dictionary, SerialMatchesParallel)
{
    const SamplingConfig cfg = cfg_of(2, 30);
    const Waveform w = Waveform::pi2_bpsk(cfg, 4);
    const Dictionary a = build_dictionary(w, cfg, 60, Exec::serial);
    const Dictionary b = build_dictionary(w, cfg, 60, Exec::parallel);
    EXPECT_EQ(a.columns, b.columns);
}

TEST(Whitener, IdentityCovariance)
{
    const CMatrix w = whitener(RMatrix::Identity(8, 8));
    EXPECT_LT((w - dft_matrix(8).adjoint()).norm(), 1e-13);
}

TEST(Whitener, WhitensOnRetainedEigenspace)
{
    for (int theta : {1, 2, 3}) {
        const RMatrix sigma = noise_covariance(24, theta);
        const auto factor = CovarianceFactor::from(sigma);
        const CMatrix f = dft_matrix(24);
        const CMatrix w = whitener(factor, f);
        const CMatrix m = w * f * sigma.cast<cplx>() * f.adjoint() * w.adjoint();
        Eigen::SelfAdjointEigenSolver<RMatrix> es(sigma);
        for (int i = 0; i < 24; ++i) {
            if (es.eigenvalues()[i] <= factor.floor)
                continue;
            const CVector v = es.eigenvectors().col(i).cast<cplx>();
            // Directions just above the floor carry roundoff of order eps * lambda_max / lambda.
            const double roundoff = 1e-15 * es.eigenvalues().maxCoeff() / es.eigenvalues()[i];
            EXPECT_NEAR(std::abs(v.dot(m * v)), 1.0, 1e-8 + roundoff) << "theta " << theta;
        }
    }
}

TEST(Whitener, SmallOversampledFactorAgainstEigenOracle)
{
    const RMatrix sigma = noise_covariance(5, 2);
    const auto factor = CovarianceFactor::from(sigma);
    EXPECT_TRUE(factor.inv_sqrt.allFinite());
    EXPECT_TRUE(factor.inv_sqrt.isApprox(factor.inv_sqrt.transpose(), 1e-14));
    // Well conditioned at this size, so the factor is the exact inverse root.
    EXPECT_TRUE((factor.inv_sqrt * factor.inv_sqrt * sigma).isApprox(RMatrix::Identity(5, 5), 1e-10));
    EXPECT_TRUE((factor.sqrt * factor.sqrt).isApprox(sigma, 1e-12));
}

namespace {

struct Scene {
    SamplingConfig cfg;
    Waveform w;
    Dictionary d;
    CovarianceFactor factor;
    CVector y;
    CVector gamma;
    OneBitVector z;
};

Scene scene(int theta, int samples, int grid, int k_direct, int k_indirect, double noise, double a_max,
            std::uint64_t seed)
{
    Scene s;
    s.cfg = cfg_of(theta, samples);
    s.w = Waveform::pi2_bpsk(s.cfg, seed);
    s.d = build_dictionary(s.w, s.cfg, grid);
    s.factor = CovarianceFactor::from(noise_covariance(samples, theta));
    ChannelParams ch;
    ch.direct_gain = std::polar(1.0, 0.3 + seed);
    ch.indirect_gain = std::polar(1.0, 1.7 * seed);
    ch.direct_delay = s.d.grid.points[k_direct];
    ch.indirect_delay = s.d.grid.points[k_indirect];
    ch.noise_power = noise;
    s.y = simulate_received(s.w, ch, s.cfg, s.factor, seed + 100);
    s.gamma = draw_temporal_thresholds(samples, a_max, seed + 200);
    s.z = one_bit_quantize(s.y, s.gamma);
    return s;
}

double worst_sign_violation(const Scene &s, const SparseSolution &sol)
{
    const CVector model = s.d.time * sol.alpha + s.factor.sqrt.cast<cplx>() * sol.slack - s.gamma;
    double worst = 0.0;
    for (int l = 0; l < model.size(); ++l) {
        worst = std::max(worst, -sign_pos(s.z[l].real()) * model[l].real());
        worst = std::max(worst, -sign_pos(s.z[l].imag()) * model[l].imag());
    }
    return worst;
}

} // namespace

TEST(EstimateSparse, SatisfiesSignConstraints)
{
    const Scene s = scene(1, 40, 80, 4, 14, 0.5, 1.0, 1);
    const SparseSolution sol = estimate_sparse(s.z, s.gamma, s.d, s.factor);
    EXPECT_EQ(sol.report.status, conic::SolveStatus::optimal);
    EXPECT_LE(worst_sign_violation(s, sol), 1e-6);
}

TEST(EstimateSparse, NoiselessOnGridRecoversSupport)
{
    // Thresholds are small against unit path gains; a dictionary at sample
    // spacing keeps neighbouring atoms distinguishable.
    for (std::uint64_t seed : {1, 2, 3, 4}) {
        const Scene s = scene(1, 60, 60, 3, 11, 0.0, 0.05, seed);
        SparseOptions o;
        o.rho = 100.0;
        const SparseSolution sol = estimate_sparse(s.z, s.gamma, s.d, s.factor, o);
        const DelayEstimate e = extract_delays(sol, s.d.grid);
        EXPECT_EQ(e.support[0], 3) << "seed " << seed;
        EXPECT_EQ(e.support[1], 11) << "seed " << seed;
    }
}

TEST(EstimateSparse, SlackShrinksAsRhoGrows)
{
    const Scene s = scene(1, 40, 80, 2, 20, 1.0, 1.0, 5);
    double prev = std::numeric_limits<double>::infinity();
    for (double rho : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
        SparseOptions o;
        o.rho = rho;
        const SparseSolution sol = estimate_sparse(s.z, s.gamma, s.d, s.factor, o);
        const double norm = sol.slack.norm();
        EXPECT_LE(norm, prev * (1.0 + 1e-6) + 1e-9) << "rho " << rho;
        prev = norm;
    }
}

TEST(EstimateSparse, QuantizationIgnoresCommonScale)
{
    // z depends only on the signs, so the program built from (c y, c gamma)
    // with thresholds c gamma is the program built from (y, gamma) rescaled.
    const Scene s = scene(1, 30, 60, 2, 9, 0.3, 1.0, 7);
    const double c = 3.5;
    const OneBitVector zc = one_bit_quantize(c * s.y, c * s.gamma);
    EXPECT_EQ(zc.entries(), s.z.entries());
    const auto p1 = build_sparse_program(s.z, s.gamma, s.d, s.factor, 1.0);
    const auto p2 = build_sparse_program(zc, c * s.gamma, s.d, s.factor, 1.0);
    ASSERT_EQ(p1.inequalities.size(), p2.inequalities.size());
    for (std::size_t r = 0; r < p1.inequalities.size(); ++r) {
        EXPECT_EQ(p1.inequalities[r].value, p2.inequalities[r].value);
        EXPECT_NEAR(p2.inequalities[r].rhs, c * p1.inequalities[r].rhs, 1e-12);
    }
}

TEST(EstimateSparse, RejectsBadInput)
{
    const Scene s = scene(1, 20, 40, 1, 5, 0.0, 1.0, 2);
    SparseOptions o;
    o.rho = 0.0;
    EXPECT_THROW(estimate_sparse(s.z, s.gamma, s.d, s.factor, o), Error);
    EXPECT_THROW(estimate_sparse(s.z, CVector::Zero(5), s.d, s.factor), Error);
}

TEST(EstimateFullPrecision, NoiselessOnGridExact)
{
    const Scene s = scene(1, 40, 80, 6, 22, 0.0, 1.0, 3);
    SparseOptions o;
    o.rho = 100.0;
    const SparseSolution sol = estimate_full_precision(s.y, s.d, s.factor, o);
    const DelayEstimate e = extract_delays(sol, s.d.grid);
    EXPECT_EQ(e.support[0], 6);
    EXPECT_EQ(e.support[1], 22);
}

TEST(ExtractDelays, Formula)
{
    SparseSolution sol;
    sol.alpha = CVector::Zero(10);
    sol.alpha[3] = cplx(0.0, 2.0);
    sol.alpha[7] = cplx(1.0, 0.0);
    sol.alpha[5] = cplx(0.1, 0.0);
    const DelayEstimate e = extract_delays(sol, DelayGrid::uniform(1.0, 10));
    EXPECT_NEAR(e.indirect, 0.7, 1e-15);
    EXPECT_NEAR(e.direct, 0.3, 1e-15);
    EXPECT_NEAR(e.range_m, 0.7 * kSpeedOfLight, 1e-6);
}

TEST(ExtractDelays, DegenerateSupport)
{
    SparseSolution sol;
    sol.alpha = CVector::Zero(10);
    EXPECT_THROW(extract_delays(sol, DelayGrid::uniform(1.0, 10)), NoDetectionError);
    sol.alpha[4] = 1.0;
    EXPECT_THROW(extract_delays(sol, DelayGrid::uniform(1.0, 10)), NoDetectionError);
    sol.alpha[6] = 0.5e-3;
    EXPECT_THROW(extract_delays(sol, DelayGrid::uniform(1.0, 10)), NoDetectionError);
    sol.alpha[6] = 2e-3;
    EXPECT_NO_THROW(extract_delays(sol, DelayGrid::uniform(1.0, 10)));
}

TEST(ExtractDelays, MinimumSeparationSkipsNeighbours)
{
    SparseSolution sol;
    sol.alpha = CVector::Zero(10);
    sol.alpha[3] = 2.0;
    sol.alpha[4] = 1.5;
    sol.alpha[8] = 1.0;
    const DelayGrid grid = DelayGrid::uniform(1.0, 10);
    EXPECT_EQ(extract_delays(sol, grid).support[1], 4);
    const DelayEstimate e = extract_delays(sol, grid, 2);
    EXPECT_EQ(e.support[0], 3);
    EXPECT_EQ(e.support[1], 8);
    EXPECT_NEAR(e.indirect, 0.8, 1e-15);
    EXPECT_THROW(extract_delays(sol, grid, 0), Error);
    // Every other point is within reach of the first peak.
    EXPECT_THROW(extract_delays(sol, grid, 10), NoDetectionError);
}
