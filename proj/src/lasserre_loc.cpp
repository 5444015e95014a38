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

#include "onebit/lasserre_loc.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace onebit {

FractionalCoefficients fractional_coeffs(const Geometry &g)
{
    const int m_count = g.num_nodes();
    const int dim = g.dim();
    if (m_count < dim + 2)
        throw Error("fractional_coeffs needs M >= dim + 2 nodes");
    FractionalCoefficients fc;
    fc.v.resize(m_count - 1, dim);
    fc.b.resize(m_count - 1);
    for (int m = 1; m < m_count; ++m) {
        const Point d = g.nodes[m] - g.nodes[0];
        fc.v.row(m - 1) = d.head(dim).transpose();
        fc.b[m - 1] = 0.5 * d.head(dim).squaredNorm();
    }
    Eigen::ColPivHouseholderQR<RMatrix> qr(fc.v);
    qr.setThreshold(1e-10);
    if (qr.rank() < dim) {
        const int col = static_cast<int>(qr.colsPermutation().indices()[qr.rank()]);
        static const char *names[] = {"x", "y", "z"};
        throw RankDeficientError(std::string("V is rank deficient in column '") + names[col] + "'", col);
    }
    const RMatrix q = qr.householderQ() * RMatrix::Identity(m_count - 1, dim);
    fc.projector = RMatrix::Identity(m_count - 1, m_count - 1) - q * q.transpose();

    const RMatrix &p = fc.projector;
    fc.psi.resize(m_count, m_count);
    fc.psi(0, 0) = p.sum();
    for (int n = 1; n < m_count; ++n) {
        const double s = -p.col(n - 1).sum();
        fc.psi(0, n) = s;
        fc.psi(n, 0) = s;
        for (int m = 1; m < m_count; ++m)
            fc.psi(m, n) = p(m - 1, n - 1);
    }
    const RVector pb = p * fc.b;
    fc.kappa.resize(m_count);
    fc.kappa[0] = -pb.sum();
    fc.kappa.tail(m_count - 1) = pb;
    fc.chi = fc.b.dot(pb);
    return fc;
}

namespace {

RVector range_differences(const RVector &r, const FractionalCoefficients &fc)
{
    if (r.size() != fc.num_nodes())
        throw Error("range vector length differs from node count");
    return r.tail(r.size() - 1).array() - r[0];
}

} // namespace

double eval_J(const RVector &r, const FractionalCoefficients &fc)
{
    const RVector d = range_differences(r, fc);
    return d.dot(fc.projector * d);
}

double eval_F(const RVector &r, const FractionalCoefficients &fc)
{
    const RVector d = range_differences(r, fc);
    const RVector h = fc.b.array() - 0.5 * d.array().square();
    const RVector ph = fc.projector * h;
    const double j = d.dot(fc.projector * d);
    const double dph = d.dot(ph);
    return j * h.dot(ph) - dph * dph;
}

Polynomial expand_vJ_minus_F(const FractionalCoefficients &fc)
{
    const int m_count = fc.num_nodes();
    const int q = m_count + 1;
    const int k = m_count - 1;
    const RMatrix &p = fc.projector;

    std::vector<Polynomial> d, h;
    d.reserve(k);
    h.reserve(k);
    for (int i = 0; i < k; ++i) {
        d.push_back(Polynomial::variable(q, i + 1) - Polynomial::variable(q, 0));
        h.push_back(Polynomial::constant(q, fc.b[i]) - 0.5 * (d[i] * d[i]));
    }
    Polynomial j(q), hh(q), dh(q);
    for (int i = 0; i < k; ++i) {
        Polynomial pd(q), ph(q);
        for (int l = 0; l < k; ++l) {
            pd += p(i, l) * d[l];
            ph += p(i, l) * h[l];
        }
        j += d[i] * pd;
        hh += h[i] * ph;
        dh += d[i] * ph;
    }
    const Polynomial f = j * hh - dh * dh;
    return Polynomial::variable(q, m_count) * j - f;
}

long long moment_count(int num_nodes, int order)
{
    return binomial(num_nodes + 1 + 2 * order, 2 * order);
}

int MomentProgram::index(const Exponent &e) const
{
    auto it = index_of.find(e);
    if (it == index_of.end())
        throw Error("monomial outside the moment vector");
    return it->second;
}

int MomentProgram::v_index() const
{
    Exponent e(num_vars, 0);
    e[num_vars - 1] = 1;
    return index(e);
}

int MomentProgram::range_index(int m) const
{
    Exponent e(num_vars, 0);
    e.at(m) = 1;
    return index(e);
}

namespace {

// Localizing block K(g_deg g_deg^T poly).
conic::PsdBlock localizing_block(const MomentProgram &mp, int degree, const Polynomial &poly,
                                 std::string label)
{
    const auto basis = monomial_basis(mp.num_vars, degree);
    conic::PsdBlock blk;
    blk.dim = static_cast<int>(basis.size());
    blk.label = std::move(label);
    Exponent e(mp.num_vars);
    for (int i = 0; i < blk.dim; ++i)
        for (int j = i; j < blk.dim; ++j)
            for (const auto &[g, c] : poly.terms()) {
                for (int t = 0; t < mp.num_vars; ++t)
                    e[t] = basis[i][t] + basis[j][t] + g[t];
                blk.entries.push_back({i, j, mp.index(e), c});
            }
    return blk;
}

} // namespace

MomentProgram build_moment_program(const FractionalCoefficients &fc, const std::vector<int> &w,
                                   const RVector &lambda, double v_max, int order, double j_min,
                                   double r_upper)
{
    if (order < 3)
        throw Error("relaxation order must be at least 3");
    if (!(v_max > 0.0))
        throw Error("v_max must be positive");
    const int m_count = fc.num_nodes();
    if (static_cast<int>(w.size()) != m_count || lambda.size() != m_count)
        throw Error("one-bit data length differs from node count");
    if (fc.psi.rows() != m_count || fc.psi.cols() != m_count)
        throw Error("fractional coefficients are inconsistent");

    MomentProgram mp;
    mp.order = order;
    mp.num_vars = m_count + 1;
    mp.v_max = v_max;
    mp.basis = monomial_basis(mp.num_vars, order);
    mp.moments = monomial_basis(mp.num_vars, 2 * order);
    for (int k = 0; k < static_cast<int>(mp.moments.size()); ++k)
        mp.index_of.emplace(mp.moments[k], k);

    const int q = mp.num_vars;
    auto &sdp = mp.sdp;
    sdp.num_vars = static_cast<int>(mp.moments.size());
    sdp.fixed.emplace_back(mp.index(Exponent(q, 0)), 1.0);
    sdp.cost.emplace_back(mp.v_index(), 1.0);

    mp.moment_block = static_cast<int>(sdp.blocks.size());
    sdp.blocks.push_back(localizing_block(mp, order, Polynomial::constant(q, 1.0), "moment"));

    for (int m = 0; m < m_count; ++m) {
        const Polynomial g = static_cast<double>(w[m]) *
                             (Polynomial::variable(q, m) - Polynomial::constant(q, lambda[m]));
        mp.localizer_blocks.push_back(static_cast<int>(sdp.blocks.size()));
        sdp.blocks.push_back(localizing_block(mp, order - 1, g, "sign_" + std::to_string(m)));
    }
    for (int m = 0; m < m_count; ++m) {
        mp.localizer_blocks.push_back(static_cast<int>(sdp.blocks.size()));
        sdp.blocks.push_back(localizing_block(mp, order - 1, Polynomial::variable(q, m),
                                              "nonneg_" + std::to_string(m)));
    }
    mp.localizer_blocks.push_back(static_cast<int>(sdp.blocks.size()));
    sdp.blocks.push_back(localizing_block(
        mp, order - 1, Polynomial::constant(q, 1.0) - Polynomial::variable(q, m_count), "vmax"));

    mp.localizer_blocks.push_back(static_cast<int>(sdp.blocks.size()));
    sdp.blocks.push_back(localizing_block(mp, order - 1, Polynomial::variable(q, m_count), "vnonneg"));
    for (int m = 0; m < m_count; ++m) {
        mp.localizer_blocks.push_back(static_cast<int>(sdp.blocks.size()));
        sdp.blocks.push_back(localizing_block(
            mp, order - 1, Polynomial::constant(q, r_upper) - Polynomial::variable(q, m),
            "rmax_" + std::to_string(m)));
    }
    Polynomial j = Polynomial::constant(q, -j_min);
    for (int m = 0; m < m_count; ++m)
        for (int n = 0; n < m_count; ++n)
            j += fc.psi(m, n) * (Polynomial::variable(q, m) * Polynomial::variable(q, n));
    mp.localizer_blocks.push_back(static_cast<int>(sdp.blocks.size()));
    sdp.blocks.push_back(localizing_block(mp, order - 1, j, "jmin"));

    // With v = v_max u the epigraph polynomial is v_max u J - F.
    const Polynomial raw = expand_vJ_minus_F(fc);
    Polynomial epi(q);
    for (const auto &[e, c] : raw.terms())
        epi.add_term(e, e[m_count] > 0 ? c * v_max : c);
    double top = 0.0;
    for (const auto &kv : epi.terms())
        top = std::max(top, std::abs(kv.second));
    if (top > 0.0)
        epi *= 1.0 / top;
    mp.epigraph_block = static_cast<int>(sdp.blocks.size());
    sdp.blocks.push_back(localizing_block(mp, order - 3, epi, "epigraph"));
    return mp;
}

double default_v_max(const FractionalCoefficients &fc, const std::vector<int> &w,
                     const RVector &lambda, double r_max)
{
    const int m_count = fc.num_nodes();
    RVector mid(m_count);
    for (int m = 0; m < m_count; ++m)
        mid[m] = w[m] > 0 ? 0.5 * (lambda[m] + r_max) : 0.5 * lambda[m];
    const double j = eval_J(mid, fc);
    const double floor = 1e-12 * std::pow(r_max, 4);
    if (!(j > 0.0))
        return std::pow(r_max, 4);
    return 10.0 * std::max(eval_F(mid, fc) / j, floor);
}

namespace {

Geometry scaled(const Geometry &g, double s)
{
    Geometry out = g;
    for (auto &n : out.nodes)
        n /= s;
    out.base /= s;
    return out;
}

int order_one_rank(const MomentProgram &mp, const RVector &mu)
{
    const int n = mp.num_vars + 1;
    RMatrix t(n, n);
    Exponent e(mp.num_vars);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < mp.num_vars; ++k)
                e[k] = mp.basis[i][k] + mp.basis[j][k];
            t(i, j) = mu[mp.index(e)];
        }
    Eigen::JacobiSVD<RMatrix> svd(t);
    const RVector sv = svd.singularValues();
    const double cut = 1e-6 * sv[0];
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        rank += sv[i] > cut ? 1 : 0;
    return rank;
}

} // namespace

LasserreResult localize_optimal(const OneBitRangeData &data, const Geometry &g,
                                const LasserreOptions &opt)
{
    data.validate();
    g.validate();
    const int m_count = g.num_nodes();
    if (data.size() != m_count)
        throw Error("one-bit data length differs from node count");
    const double s = data.r_max;
    const double s4 = std::pow(s, 4);
    const auto fc = fractional_coeffs(scaled(g, s));
    const RVector lambda = data.lambda / s;
    const double v_max = opt.v_max > 0.0 ? opt.v_max / s4 : default_v_max(fc, data.w, lambda, 1.0);

    LasserreResult res;
    res.v_max = v_max * s4;
    int order = opt.order;
    while (true) {
        const long long count = moment_count(m_count, order);
        if (count - 1 > kMaxMoments)
            throw RelaxationError("order-" + std::to_string(order) + " relaxation over " +
                                  std::to_string(m_count) + " ranges needs " + std::to_string(count) +
                                  " moments, above the limit of " + std::to_string(kMaxMoments));
        const auto mp = build_moment_program(fc, data.w, lambda, v_max, order, opt.j_min, 1.0);
        auto rep = conic::solve_sdp(mp.sdp, opt.solver, opt.backend);
        if (!rep.ok())
            throw RelaxationError("moment SDP at order " + std::to_string(order) + ": " +
                                  conic::to_string(rep.status) + " " + rep.message);
        const RVector &mu = rep.solution;
        RVector r(m_count);
        for (int m = 0; m < m_count; ++m)
            r[m] = mu[mp.range_index(m)];
        double worst = 0.0;
        for (int m = 0; m < m_count; ++m)
            worst = std::min({worst, data.w[m] * (r[m] - lambda[m]), r[m]});
        res.tight = worst >= -opt.sanity_tol;
        res.moment_rank = order_one_rank(mp, mu);
        res.order = order;
        res.num_moments = static_cast<int>(count);
        res.ranges = r * s;
        res.v_opt = mu[mp.v_index()] * v_max * s4;
        res.report = std::move(rep);
        if (res.tight || !opt.escalate || order > opt.order)
            break;
        if (moment_count(m_count, order + 1) - 1 > kMaxMoments)
            break;
        ++order;
    }
    if (!res.tight)
        res.message = "relaxation not tight at order " + std::to_string(res.order);
    try {
        res.target = localize_full_precision(g, res.ranges).target;
        res.have_target = true;
    } catch (const RankDeficientError &e) {
        res.message += (res.message.empty() ? "" : "; ") + std::string(e.what());
    }
    return res;
}

void dump(const MomentProgram &mp, std::ostream &os)
{
    os << "# moment relaxation order " << mp.order << " vars " << mp.num_vars << " moments "
       << mp.moments.size() << " v_max " << mp.v_max << "\n";
    conic::dump(mp.sdp, os);
}

} // namespace onebit
