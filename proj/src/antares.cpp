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

#include "onebit/antares.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace onebit {

double QuarticCoeffs::eval(double r) const
{
    return (((0.25 * r + beta) * r + varsigma) * r + omega) * r + eta;
}

double QuarticCoeffs::derivative(double r) const
{
    return ((r + 3.0 * beta) * r + 2.0 * varsigma) * r + omega;
}

QuarticCoeffs quartic_coeffs_node(const RVector &theta, double r1, double zeta)
{
    const double t = theta[theta.size() - 1];
    const double tz = t * t + zeta;
    QuarticCoeffs c;
    c.beta = t - r1;
    c.varsigma = 1.5 * r1 * r1 - 3.0 * t * r1 + tz;
    c.omega = -r1 * r1 * r1 + 3.0 * t * r1 * r1 - 2.0 * tz * r1 + 2.0 * t * zeta;
    c.eta = 0.25 * std::pow(r1, 4) - t * r1 * r1 * r1 + tz * r1 * r1 - 2.0 * t * zeta * r1 + zeta * zeta;
    return c;
}

std::array<cplx, 3> cubic_roots(double beta, double varsigma, double omega)
{
    const double d0 = 9.0 * beta * beta - 6.0 * varsigma;
    const double d1 = 54.0 * beta * beta * beta - 54.0 * beta * varsigma + 27.0 * omega;
    const cplx disc = std::sqrt(cplx(d1 * d1 - 4.0 * d0 * d0 * d0, 0.0));
    // The sign giving the larger modulus avoids cancellation.
    const cplx plus = 0.5 * (d1 + disc);
    const cplx minus = 0.5 * (d1 - disc);
    const cplx c3 = std::abs(plus) >= std::abs(minus) ? plus : minus;
    std::array<cplx, 3> roots;
    if (std::abs(c3) == 0.0) {
        roots.fill(cplx(-beta, 0.0));
        return roots;
    }
    const cplx c = std::pow(c3, 1.0 / 3.0);
    const cplx xi(-0.5, std::sqrt(3.0) / 2.0);
    cplx xq(1.0, 0.0);
    for (int q = 0; q < 3; ++q) {
        const cplx s = xq * c;
        roots[q] = -(3.0 * beta + s + d0 / s) / 3.0;
        xq *= xi;
    }
    return roots;
}

QuarticSolution solve_constrained_quartic(const QuarticCoeffs &c, int w, double lambda, double r_max)
{
    if (!(lambda > 0.0))
        throw Error("range threshold must be positive");
    if (w != 1 && w != -1)
        throw Error("one-bit range sign must be +-1");
    const double lo = w > 0 ? lambda : 0.0;
    const double hi = w > 0 ? r_max : std::min(lambda, r_max);
    if (lo > hi)
        throw Error("empty feasible interval for the range subproblem");
    auto feasible = [&](double r) { return r >= lo && r <= hi; };

    std::vector<double> cand;
    // Boundary at the threshold, multiplier on the sign constraint.
    if (feasible(lambda) && w * c.derivative(lambda) > 0.0)
        cand.push_back(lambda);
    // Boundary at zero, multiplier on nonnegativity.
    if (w < 0 && c.omega > 0.0)
        cand.push_back(0.0);
    if (std::isfinite(r_max) && feasible(r_max) && c.derivative(r_max) < 0.0)
        cand.push_back(r_max);

    const double scale = 1.0 + hi - lo + std::abs(lo);
    for (const cplx &z : cubic_roots(c.beta, c.varsigma, c.omega)) {
        if (std::abs(z.imag()) > kRealRootTol * (1.0 + std::abs(z.real())))
            continue;
        double r = z.real();
        for (int k = 0; k < 2; ++k) {
            const double d2 = (3.0 * r + 6.0 * c.beta) * r + 2.0 * c.varsigma;
            if (d2 != 0.0)
                r -= c.derivative(r) / d2;
        }
        if (!std::isfinite(r))
            continue;
        if ((3.0 * r + 6.0 * c.beta) * r + 2.0 * c.varsigma < 0.0)
            continue;
        // Pull roots that sit on a boundary to within roundoff back inside.
        if (r < lo && r > lo - 1e-12 * scale)
            r = lo;
        if (r > hi && r < hi + 1e-12 * scale)
            r = hi;
        if (feasible(r))
            cand.push_back(r);
    }

    QuarticSolution sol;
    if (cand.empty()) {
        sol.fallback = true;
        for (double r : {0.0, lambda, r_max})
            if (std::isfinite(r) && feasible(r))
                cand.push_back(r);
    }
    std::sort(cand.begin(), cand.end());
    double best = std::numeric_limits<double>::infinity();
    for (double r : cand) {
        const double v = c.eval(r);
        if (v < best) {
            best = v;
            sol.r = r;
        }
    }
    return sol;
}

RVector node_zetas(const Geometry &g, const RVector &theta)
{
    const int dim = g.dim();
    if (theta.size() != dim + 1)
        throw Error("theta has the wrong dimension");
    RVector z(g.num_nodes() - 1);
    for (int m = 1; m < g.num_nodes(); ++m) {
        const RVector d = (g.nodes[m] - g.nodes[0]).head(dim);
        z[m - 1] = d.dot(theta.head(dim)) - 0.5 * d.squaredNorm();
    }
    return z;
}

QuarticCoeffs r1_subproblem_coeffs(const RVector &theta, const RVector &r_rest, const RVector &zetas)
{
    if (r_rest.size() < 1 || r_rest.size() != zetas.size())
        throw Error("r1 subproblem needs one zeta per non-reference range");
    // In r1 the residual reads (r1 - r_m)^2 / 2 - theta_d (r1 - r_m) + zeta_m.
    RVector mirrored = theta;
    mirrored[theta.size() - 1] = -theta[theta.size() - 1];
    QuarticCoeffs acc;
    for (Eigen::Index m = 0; m < r_rest.size(); ++m) {
        const QuarticCoeffs c = quartic_coeffs_node(mirrored, r_rest[m], zetas[m]);
        acc.beta += c.beta;
        acc.varsigma += c.varsigma;
        acc.omega += c.omega;
        acc.eta += c.eta;
    }
    const double n = static_cast<double>(r_rest.size());
    acc.beta /= n;
    acc.varsigma /= n;
    acc.omega /= n;
    acc.eta /= n;
    return acc;
}

ThetaUpdate theta_update(const Geometry &g, const RVector &r, const RVector &previous)
{
    try {
        return {localize_full_precision(g, r).theta, false};
    } catch (const RankDeficientError &) {
        return {previous, true};
    }
}

double ls_objective(const Geometry &g, const RVector &r, const RVector &theta)
{
    const auto sys = build_G_h(g, r);
    return (sys.g * theta - sys.h).squaredNorm();
}

std::string AntaresDiagnostics::to_json() const
{
    nlohmann::json j;
    j["iterations"] = iterations;
    j["converged"] = converged;
    j["objective_trace"] = objective_trace;
    j["fallback_count"] = fallback_count;
    j["rank_freezes"] = rank_freezes;
    return j.dump();
}

AntaresResult antares(const OneBitRangeData &data, const Geometry &g, const AntaresConfig &cfg)
{
    data.validate();
    g.validate();
    const int m_count = g.num_nodes();
    if (data.size() != m_count)
        throw Error("one-bit data length differs from node count");
    if (!(cfg.eps_theta > 0.0) || !(cfg.eps_r > 0.0))
        throw Error("ANTARES tolerances must be positive");
    const double r_max = data.r_max;

    RVector r = data.lambda;
    if (std::isnan(cfg.r1_init)) {
        r[0] = data.w[0] > 0 ? std::min(data.lambda[0] + 0.1 * r_max, r_max) : 0.5 * data.lambda[0];
    } else {
        if (!(data.w[0] * (cfg.r1_init - data.lambda[0]) > 0.0) || cfg.r1_init < 0.0)
            throw Error("r1_init must satisfy w_1 (r1 - lambda_1) > 0");
        r[0] = cfg.r1_init;
    }

    AntaresResult res;
    RVector theta;
    if (cfg.theta_init.size() > 0) {
        if (cfg.theta_init.size() != g.dim() + 1)
            throw Error("theta_init has the wrong dimension");
        theta = cfg.theta_init;
    } else {
        theta = theta_update(g, data.lambda, RVector::Zero(g.dim() + 1)).theta;
    }
    auto &diag = res.diag;
    diag.objective_trace.push_back(ls_objective(g, r, theta));

    RVector r_next(m_count);
    for (int k = 0; k < cfg.max_iters; ++k) {
        const RVector zeta = node_zetas(g, theta);
        int fallbacks = 0;
#pragma omp parallel for reduction(+ : fallbacks) if (cfg.exec == Exec::parallel)
        for (int m = 1; m < m_count; ++m) {
            const auto sol = solve_constrained_quartic(quartic_coeffs_node(theta, r[0], zeta[m - 1]),
                                                       data.w[m], data.lambda[m], r_max);
            r_next[m] = sol.r;
            fallbacks += sol.fallback ? 1 : 0;
        }
        r_next[0] = r[0];
        diag.objective_trace.push_back(ls_objective(g, r_next, theta));

        const auto s1 = solve_constrained_quartic(r1_subproblem_coeffs(theta, r_next.tail(m_count - 1), zeta),
                                                  data.w[0], data.lambda[0], r_max);
        r_next[0] = s1.r;
        fallbacks += s1.fallback ? 1 : 0;
        diag.objective_trace.push_back(ls_objective(g, r_next, theta));

        const auto tu = theta_update(g, r_next, theta);
        diag.rank_freezes += tu.frozen ? 1 : 0;
        diag.fallback_count += fallbacks;
        diag.objective_trace.push_back(ls_objective(g, r_next, tu.theta));

        const double dtheta = (tu.theta - theta).squaredNorm() / (r_max * r_max);
        const double dr = (r_next - r).squaredNorm() / (r_max * r_max);
        theta = tu.theta;
        r = r_next;
        diag.iterations = k + 1;
        if (dtheta < cfg.eps_theta || dr < cfg.eps_r) {
            diag.converged = true;
            break;
        }
    }

    res.theta = theta;
    res.r = r;
    res.target = g.nodes[0];
    if (g.planar)
        res.target.z() = 0.0;
    for (int k = 0; k < g.dim(); ++k)
        res.target[k] += theta[k];
    return res;
}

} // namespace onebit
