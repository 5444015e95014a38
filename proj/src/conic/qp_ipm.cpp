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

// Mehrotra predictor-corrector interior-point method for QuadLinProgram.
//
// The objective Hessian is diagonal and bound constraints are diagonal, so
// Newton systems are reduced onto the general rows: with H diagonal, one
// solves (C H^-1 C^T + Delta) v = rhs whose size is the number of rows.

#include "backends.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <limits>

namespace onebit::conic::detail {
namespace {

struct DenseRows {
    RMatrix c;
    RVector rhs;
};

DenseRows densify(const std::vector<SparseRow> &rows, int n)
{
    DenseRows d{RMatrix::Zero(static_cast<Eigen::Index>(rows.size()), n),
                RVector::Zero(static_cast<Eigen::Index>(rows.size()))};
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t k = 0; k < rows[r].index.size(); ++k)
            d.c(r, rows[r].index[k]) += rows[r].value[k];
        d.rhs[r] = rows[r].rhs;
        const double scale = d.c.row(r).cwiseAbs().maxCoeff();
        if (scale > 0.0) {
            d.c.row(r) /= scale;
            d.rhs[r] /= scale;
        }
    }
    return d;
}

// Largest step in (0, 1] keeping v + a*dv > 0 where mask selects entries.
double max_step(const RVector &v, const RVector &dv, const std::vector<char> *mask = nullptr)
{
    double a = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (mask && !(*mask)[i])
            continue;
        if (dv[i] < 0.0)
            a = std::min(a, -v[i] / dv[i]);
    }
    return a;
}

// Scaled KKT error accepted when the iteration cannot reach the requested tolerance.
constexpr double kAcceptable = 1e-6;

} // namespace

namespace {

SolveReport run_ipm(const QuadLinProgram &prog, const SolverOptions &opt)
{
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    SolveReport rep;
    rep.backend = "ipm-qp";

    const int n = prog.num_vars;
    const DenseRows ineq = densify(prog.inequalities, n);
    const DenseRows eq = densify(prog.equalities, n);
    const Eigen::Index mi = ineq.c.rows();
    const Eigen::Index me = eq.c.rows();
    const Eigen::Index m = mi + me;

    RMatrix c(m, n);
    c.topRows(mi) = ineq.c;
    c.bottomRows(me) = eq.c;

    const RVector p = 2.0 * prog.quadratic;
    const RVector &q = prog.linear_cost;
    const std::vector<char> &bounded = prog.nonneg;
    Eigen::Index nb = 0;
    for (char b : bounded)
        nb += b ? 1 : 0;

    const double tol = opt.tolerance;
    const int max_iter = opt.max_iterations > 0 ? opt.max_iterations : 100;
    const double scale_rhs = 1.0 + std::max(ineq.rhs.size() ? ineq.rhs.cwiseAbs().maxCoeff() : 0.0,
                                            eq.rhs.size() ? eq.rhs.cwiseAbs().maxCoeff() : 0.0);
    const double scale_cost = 1.0 + (n ? q.cwiseAbs().maxCoeff() : 0.0);
    const double reg_free = 1e-10 * (1.0 + (n ? p.maxCoeff() : 0.0));

    RVector x = RVector::Zero(n);
    RVector zeta = RVector::Zero(n);
    for (int j = 0; j < n; ++j)
        if (bounded[j]) {
            x[j] = 1.0;
            zeta[j] = 1.0;
        }
    RVector s = (ineq.c * x - ineq.rhs).cwiseMax(1.0);
    RVector z = RVector::Ones(mi);
    RVector y = RVector::Zero(me);

    const double count = static_cast<double>(mi + nb);
    auto complementarity = [&](const RVector &xx, const RVector &ss, const RVector &zz,
                               const RVector &ze) {
        double acc = ss.dot(zz);
        for (int j = 0; j < n; ++j)
            if (bounded[j])
                acc += xx[j] * ze[j];
        return count > 0 ? acc / count : 0.0;
    };

    RVector best_x = x;
    double best_err = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        rep.iterations = it + 1;
        const RVector rd = p.cwiseProduct(x) + q - eq.c.transpose() * y - ineq.c.transpose() * z - zeta;
        const RVector re = eq.c * x - eq.rhs;
        const RVector ri = ineq.c * x - s - ineq.rhs;
        const double mu = complementarity(x, s, z, zeta);

        const double pres = std::max(re.size() ? re.cwiseAbs().maxCoeff() : 0.0,
                                     ri.size() ? ri.cwiseAbs().maxCoeff() : 0.0) / scale_rhs;
        const double dres = (n ? rd.cwiseAbs().maxCoeff() : 0.0) / scale_cost;
        const double pobj = prog.objective(x);
        const double gap = mu * count / (1.0 + std::abs(pobj));
        if (opt.verbose)
            std::fprintf(stderr, "ipm-qp %3d obj %+.8e pres %.2e dres %.2e gap %.2e\n", it, pobj, pres, dres, gap);
        if (pres < tol && dres < tol && gap < tol) {
            rep.status = SolveStatus::optimal;
            rep.message = "converged";
            best_x = x;
            break;
        }
        // Near the optimum the reduced system loses accuracy as bounds become
        // active; keep the best iterate and stop once progress reverses.
        const double err = std::max({pres, dres, gap});
        if (err < best_err) {
            best_err = err;
            best_x = x;
        } else if (best_err < kAcceptable && err > 1e3 * best_err) {
            rep.message = "stalled";
            break;
        }

        if (count > 0 && pres > std::sqrt(tol) && gap < 1e-3 * tol) {
            rep.message = "stalled while infeasible";
            break;
        }
        // Farkas certificate: nonnegative combination of rows that cancels every
        // free direction while its right-hand side is positive.
        if (mi + me > 0) {
            RVector combo = ineq.c.transpose() * z + eq.c.transpose() * y + zeta;
            const double t = ineq.rhs.dot(z) + eq.rhs.dot(y);
            const double dual_mag = std::max(z.size() ? z.cwiseAbs().maxCoeff() : 0.0,
                                             y.size() ? y.cwiseAbs().maxCoeff() : 0.0);
            if (t > 0.0 && dual_mag > 1e6 * scale_cost &&
                combo.cwiseAbs().maxCoeff() <= 1e-7 * t) {
                rep.status = SolveStatus::infeasible;
                rep.message = "primal infeasibility certificate";
                break;
            }
        }

        if (opt.time_limit_s > 0.0 &&
            std::chrono::duration<double>(clock::now() - t0).count() > opt.time_limit_s) {
            rep.message = "time limit reached";
            break;
        }

        RVector h = p;
        for (int j = 0; j < n; ++j) {
            if (bounded[j])
                h[j] += zeta[j] / x[j];
            else if (h[j] <= 0.0)
                h[j] = reg_free;
        }
        const RVector hinv = h.cwiseInverse();

        RVector delta(m);
        delta.head(mi) = s.cwiseQuotient(z);
        delta.tail(me).setConstant(1e-12);
        RMatrix k = c * hinv.asDiagonal() * c.transpose();
        k.diagonal() += delta;
        Eigen::LDLT<RMatrix> ldlt(k);
        if (ldlt.info() != Eigen::Success) {
            rep.message = "reduced KKT factorization failed";
            break;
        }

        struct Step {
            RVector dx, ds, dz, dy, dzeta;
        };
        // Solves the linearized KKT system for arbitrary right-hand sides.
        auto newton = [&](const RVector &rd_, const RVector &re_, const RVector &ri_,
                          const RVector &rsz, const RVector &rxz) {
            Step st;
            RVector g = -rd_;
            for (int j = 0; j < n; ++j)
                if (bounded[j])
                    g[j] -= rxz[j] / x[j];
            RVector f(m);
            f.head(mi) = ri_ + rsz.cwiseQuotient(z);
            f.tail(me) = re_;
            const RVector v = m ? RVector(ldlt.solve(c * hinv.cwiseProduct(g) + f)) : RVector();
            st.dx = m ? RVector(hinv.cwiseProduct(g - c.transpose() * v)) : RVector(hinv.cwiseProduct(g));
            st.dy = -v.tail(me);
            // Each complementarity pair is recovered from whichever side is
            // well scaled, which avoids dividing by a vanishing slack.
            RVector w_dz = m ? RVector(-v.head(mi)) : RVector::Zero(0);
            st.ds = ineq.c * st.dx + ri_;
            st.dz.resize(mi);
            for (Eigen::Index i = 0; i < mi; ++i) {
                if (s[i] < z[i]) {
                    st.dz[i] = w_dz[i];
                    st.ds[i] = -(rsz[i] + s[i] * st.dz[i]) / z[i];
                } else {
                    st.dz[i] = -(rsz[i] + z[i] * st.ds[i]) / s[i];
                }
            }
            st.dzeta = RVector::Zero(n);
            const RVector ctw = m ? RVector(-(eq.c.transpose() * st.dy + ineq.c.transpose() * w_dz)) : RVector::Zero(n);
            for (int j = 0; j < n; ++j) {
                if (!bounded[j])
                    continue;
                if (x[j] < zeta[j])
                    st.dzeta[j] = p[j] * st.dx[j] + rd_[j] + ctw[j];
                else
                    st.dzeta[j] = -(rxz[j] + zeta[j] * st.dx[j]) / x[j];
            }
            return st;
        };
        // Newton step with two rounds of iterative refinement on the full system.
        auto refined = [&](const RVector &rsz, const RVector &rxz) {
            Step st = newton(rd, re, ri, rsz, rxz);
            for (int pass = 0; pass < 2; ++pass) {
                const RVector e_d = p.cwiseProduct(st.dx) - eq.c.transpose() * st.dy -
                                    ineq.c.transpose() * st.dz - st.dzeta + rd;
                const RVector e_e = eq.c * st.dx + re;
                const RVector e_i = ineq.c * st.dx - st.ds + ri;
                const RVector e_sz = z.cwiseProduct(st.ds) + s.cwiseProduct(st.dz) + rsz;
                RVector e_xz = RVector::Zero(n);
                for (int j = 0; j < n; ++j)
                    if (bounded[j])
                        e_xz[j] = zeta[j] * st.dx[j] + x[j] * st.dzeta[j] + rxz[j];
                const Step corr = newton(e_d, e_e, e_i, e_sz, e_xz);
                st.dx -= corr.dx;
                st.dy -= corr.dy;
                st.ds -= corr.ds;
                st.dz -= corr.dz;
                st.dzeta -= corr.dzeta;
            }
            return st;
        };
        auto step_len = [&](const Step &st) {
            double a = std::min(max_step(s, st.ds), max_step(z, st.dz));
            a = std::min(a, max_step(x, st.dx, &bounded));
            a = std::min(a, max_step(zeta, st.dzeta, &bounded));
            return a;
        };

        RVector rxz = RVector::Zero(n);
        for (int j = 0; j < n; ++j)
            if (bounded[j])
                rxz[j] = x[j] * zeta[j];
        const Step aff = refined(s.cwiseProduct(z), rxz);
        const double a_aff = step_len(aff);
        const double mu_aff = complementarity(x + a_aff * aff.dx, s + a_aff * aff.ds,
                                              z + a_aff * aff.dz, zeta + a_aff * aff.dzeta);
        const double sigma = mu > 0.0 ? std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3) : 0.0;

        RVector rsz = s.cwiseProduct(z) + aff.ds.cwiseProduct(aff.dz);
        rsz.array() -= sigma * mu;
        for (int j = 0; j < n; ++j)
            if (bounded[j])
                rxz[j] += aff.dx[j] * aff.dzeta[j] - sigma * mu;
        const Step cor = refined(rsz, rxz);
        const double a = std::min(1.0, 0.99 * step_len(cor));

        x += a * cor.dx;
        s += a * cor.ds;
        z += a * cor.dz;
        y += a * cor.dy;
        zeta += a * cor.dzeta;
        if (!x.allFinite() || !z.allFinite()) {
            rep.message = "iterates diverged";
            break;
        }
        if (it + 1 == max_iter)
            rep.message = "iteration limit reached";
    }

    if (rep.status == SolveStatus::numerical_failure && best_err <= kAcceptable &&
        rep.message != "time limit reached") {
        rep.status = SolveStatus::optimal;
        rep.message = "reduced accuracy " + std::to_string(best_err);
    }
    rep.solution = rep.status == SolveStatus::optimal ? best_x : x;
    rep.solve_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    return rep;
}


// Minimizes the total constraint violation; optimal value zero iff feasible.
QuadLinProgram phase_one(const QuadLinProgram &prog)
{
    QuadLinProgram f(prog.num_vars);
    f.nonneg = prog.nonneg;
    f.linear_cost.setZero();
    f.inequalities = prog.inequalities;
    f.equalities = prog.equalities;
    const int ni = static_cast<int>(f.inequalities.size());
    const int ne = static_cast<int>(f.equalities.size());
    const int t = f.add_l1_split(ni + 2 * ne);
    for (int i = 0; i < ni; ++i) {
        f.inequalities[i].index.push_back(t + i);
        f.inequalities[i].value.push_back(1.0);
    }
    for (int e = 0; e < ne; ++e) {
        f.equalities[e].index.push_back(t + ni + 2 * e);
        f.equalities[e].value.push_back(1.0);
        f.equalities[e].index.push_back(t + ni + 2 * e + 1);
        f.equalities[e].value.push_back(-1.0);
    }
    // A tiny proximal weight keeps otherwise free directions bounded.
    for (int j = 0; j < prog.num_vars; ++j)
        f.quadratic[j] = 1e-12;
    return f;
}

} // namespace

SolveReport InteriorPointQuadLin::solve(const QuadLinProgram &prog, const SolverOptions &opt) const
{
    SolveReport rep = run_ipm(prog, opt);
    if (rep.status != SolveStatus::numerical_failure || rep.message == "time limit reached")
        return rep;
    // Infeasible-start iterations can stall on an empty feasible set without
    // producing a usable certificate; settle the question directly.
    SolverOptions o = opt;
    o.tolerance = std::max(opt.tolerance, 1e-9);
    const QuadLinProgram p1 = phase_one(prog);
    const SolveReport f = run_ipm(p1, o);
    if (f.status == SolveStatus::optimal) {
        double scale = 1.0;
        for (const auto &r : prog.inequalities)
            scale = std::max(scale, std::abs(r.rhs));
        for (const auto &r : prog.equalities)
            scale = std::max(scale, std::abs(r.rhs));
        const double violation = p1.objective(f.solution);
        if (violation > 1e-6 * scale) {
            rep.status = SolveStatus::infeasible;
            rep.message = "minimum total violation " + std::to_string(violation);
        }
    }
    rep.solve_seconds += f.solve_seconds;
    return rep;
}

} // namespace onebit::conic::detail
