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

#include <algorithm>
#include <cmath>

namespace onebit {

DelayGrid DelayGrid::uniform(double window, int n)
{
    if (n < 1 || !(window > 0.0))
        throw Error("delay grid needs N >= 1 and a positive window");
    DelayGrid g;
    g.spacing = window / n;
    g.points.resize(n);
    for (int k = 0; k < n; ++k)
        g.points[k] = k * g.spacing;
    return g;
}

CMatrix dft_matrix(int num_samples)
{
    const int l = num_samples;
    CMatrix f(l, l);
    const double norm = 1.0 / std::sqrt(static_cast<double>(l));
    for (int n = 0; n < l; ++n)
        for (int k = 0; k < l; ++k)
            f(n, k) = std::polar(norm, -2.0 * kPi * static_cast<double>((static_cast<long>(n) * k) % l) / l);
    return f;
}

CVector phase_ramp(double delay, int num_samples, double sample_period)
{
    const int l = num_samples;
    const double shift = delay / sample_period;
    CVector a(l);
    for (int k = 0; k < l; ++k) {
        if (2 * k == l) {
            // Nyquist bin: average of the two aliases keeps real signals real.
            a[k] = std::cos(kPi * shift);
            continue;
        }
        const double f = 2 * k < l ? k : k - l;
        a[k] = std::polar(1.0, -2.0 * kPi * f * shift / l);
    }
    return a;
}

Dictionary build_dictionary(const Waveform &w, const SamplingConfig &cfg, int grid_size, Exec exec)
{
    cfg.validate();
    const int l = cfg.num_samples;
    if (grid_size < l)
        throw Error("dictionary grid must have N >= L points");
    Dictionary d;
    d.grid = DelayGrid::uniform(cfg.duration(), grid_size);
    d.dft = dft_matrix(l);
    d.columns.resize(l, grid_size);
    d.time.resize(l, grid_size);
    const double ts = cfg.sample_period();
    const CVector s0 = sampled_signal_vector(w, 0.0, cfg);

#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
    for (int k = 0; k < grid_size; ++k) {
        const double u = d.grid.points[k];
        // The last ceil(u / Ts) samples would wrap around under the DFT shift.
        const int keep = l - static_cast<int>(std::ceil(u / ts - 1e-9));
        CVector s = CVector::Zero(l);
        s.head(std::max(0, keep)) = s0.head(std::max(0, keep));
        d.columns.col(k) = (d.dft * s).cwiseProduct(phase_ramp(u, l, ts));
        d.time.col(k) = d.dft.adjoint() * d.columns.col(k);
    }
    return d;
}

CMatrix whitener(const CovarianceFactor &factor, const CMatrix &dft)
{
    return factor.inv_sqrt.cast<cplx>() * dft.adjoint();
}

CMatrix whitener(const RMatrix &sigma)
{
    return whitener(CovarianceFactor::from(sigma), dft_matrix(static_cast<int>(sigma.rows())));
}

namespace {

struct Layout {
    int n;
    int l;
    int ar_pos() const { return 0; }
    int ar_neg() const { return n; }
    int ai_pos() const { return 2 * n; }
    int ai_neg() const { return 3 * n; }
    int xr() const { return 4 * n; }
    int xi() const { return 4 * n + l; }
};

conic::QuadLinProgram base_program(const Layout &lay, double rho)
{
    if (!(rho > 0.0))
        throw Error("regularization rho must be positive");
    conic::QuadLinProgram p;
    p.add_l1_split(4 * lay.n);
    p.add_free(2 * lay.l);
    p.add_quadratic_block(lay.xr(), 2 * lay.l, rho);
    return p;
}

// Row for Re{B alpha + Sigma^{1/2} x}_l (imag_part false) or the Im part.
conic::SparseRow model_row(const Layout &lay, const Dictionary &d, const RMatrix &sqrt_sigma, int l,
                           bool imag_part, double sign)
{
    conic::SparseRow r;
    r.index.reserve(4 * lay.n + lay.l);
    r.value.reserve(4 * lay.n + lay.l);
    for (int k = 0; k < lay.n; ++k) {
        const cplx b = d.time(l, k);
        // Re{b a} = br ar - bi ai, Im{b a} = bi ar + br ai.
        const double c_ar = imag_part ? b.imag() : b.real();
        const double c_ai = imag_part ? b.real() : -b.imag();
        r.index.insert(r.index.end(), {lay.ar_pos() + k, lay.ar_neg() + k, lay.ai_pos() + k, lay.ai_neg() + k});
        r.value.insert(r.value.end(), {sign * c_ar, -sign * c_ar, sign * c_ai, -sign * c_ai});
    }
    const int x0 = imag_part ? lay.xi() : lay.xr();
    for (int j = 0; j < lay.l; ++j) {
        if (sqrt_sigma(l, j) == 0.0)
            continue;
        r.index.push_back(x0 + j);
        r.value.push_back(sign * sqrt_sigma(l, j));
    }
    return r;
}

SparseSolution unpack(const Layout &lay, conic::SolveReport rep)
{
    SparseSolution s;
    s.alpha.resize(lay.n);
    s.slack.resize(lay.l);
    const RVector &v = rep.solution;
    for (int k = 0; k < lay.n; ++k)
        s.alpha[k] = cplx(v[lay.ar_pos() + k] - v[lay.ar_neg() + k], v[lay.ai_pos() + k] - v[lay.ai_neg() + k]);
    for (int j = 0; j < lay.l; ++j)
        s.slack[j] = cplx(v[lay.xr() + j], v[lay.xi() + j]);
    s.objective_value = rep.objective;
    s.report = std::move(rep);
    return s;
}

void check_solved(const conic::SolveReport &rep)
{
    if (rep.status == conic::SolveStatus::infeasible)
        throw Error("delay program reported infeasible (solver tolerance failure): " + rep.message);
    if (rep.status != conic::SolveStatus::optimal)
        throw Error("delay program did not converge: " + rep.message);
}

} // namespace

conic::QuadLinProgram build_sparse_program(const OneBitVector &z, const CVector &gamma,
                                           const Dictionary &d, const CovarianceFactor &factor,
                                           double rho)
{
    const Layout lay{static_cast<int>(d.cols()), static_cast<int>(d.rows())};
    if (z.size() != lay.l || gamma.size() != lay.l)
        throw Error("one-bit samples and thresholds must match the dictionary length");
    conic::QuadLinProgram p = base_program(lay, rho);
    for (int l = 0; l < lay.l; ++l) {
        for (bool imag_part : {false, true}) {
            const double zs = imag_part ? z[l].imag() : z[l].real();
            const double g = imag_part ? gamma[l].imag() : gamma[l].real();
            const double sign = zs > 0.0 ? 1.0 : -1.0;
            conic::SparseRow r = model_row(lay, d, factor.sqrt, l, imag_part, sign);
            r.rhs = sign * g;
            p.inequalities.push_back(std::move(r));
        }
    }
    return p;
}

SparseSolution estimate_sparse(const OneBitVector &z, const CVector &gamma, const Dictionary &d,
                               const CovarianceFactor &factor, const SparseOptions &opt)
{
    const Layout lay{static_cast<int>(d.cols()), static_cast<int>(d.rows())};
    const conic::QuadLinProgram p = build_sparse_program(z, gamma, d, factor, opt.rho);
    conic::SolveReport rep = conic::solve_quadlin(p, opt.solver, opt.backend);
    check_solved(rep);
    return unpack(lay, std::move(rep));
}

SparseSolution estimate_full_precision(const CVector &y, const Dictionary &d,
                                       const CovarianceFactor &factor, const SparseOptions &opt)
{
    const Layout lay{static_cast<int>(d.cols()), static_cast<int>(d.rows())};
    if (y.size() != lay.l)
        throw Error("received samples must match the dictionary length");
    conic::QuadLinProgram p = base_program(lay, opt.rho);
    for (int l = 0; l < lay.l; ++l) {
        for (bool imag_part : {false, true}) {
            conic::SparseRow r = model_row(lay, d, factor.sqrt, l, imag_part, 1.0);
            r.rhs = imag_part ? y[l].imag() : y[l].real();
            p.equalities.push_back(std::move(r));
        }
    }
    conic::SolveReport rep = conic::solve_quadlin(p, opt.solver, opt.backend);
    check_solved(rep);
    return unpack(lay, std::move(rep));
}

DelayEstimate extract_delays(const SparseSolution &sol, const DelayGrid &grid, int min_separation)
{
    if (min_separation < 1)
        throw Error("minimum pick separation must be >= 1");
    const int n = static_cast<int>(sol.alpha.size());
    if (n < 2 || grid.size() != n)
        throw Error("extract_delays needs N >= 2 coefficients on a matching grid");
    const RVector mag = sol.alpha.cwiseAbs();
    Eigen::Index k1 = 0;
    const double m1 = mag.maxCoeff(&k1);
    if (!(m1 > 0.0))
        throw NoDetectionError("sparse coefficients are identically zero");
    RVector rest = mag;
    for (Eigen::Index k = std::max<Eigen::Index>(0, k1 - min_separation + 1);
         k < std::min<Eigen::Index>(n, k1 + min_separation); ++k)
        rest[k] = -1.0;
    if (rest.maxCoeff() < 0.0)
        throw NoDetectionError("no grid point far enough from the first peak");
    Eigen::Index k2 = 0;
    const double m2 = rest.maxCoeff(&k2);
    if (m2 < kSecondPeakRatio * m1)
        throw NoDetectionError("second path component below detection ratio");
    DelayEstimate e;
    const int lo = static_cast<int>(std::min(k1, k2));
    const int hi = static_cast<int>(std::max(k1, k2));
    e.support[0] = lo;
    e.support[1] = hi;
    e.direct = grid.points[lo];
    e.indirect = grid.points[hi];
    e.range_m = kSpeedOfLight * e.indirect;
    return e;
}

} // namespace onebit
