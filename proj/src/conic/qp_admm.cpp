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

// Operator-splitting (OSQP-style) ADMM for QuadLinProgram:
//   minimize 1/2 x'Px + q'x  s.t.  l <= A x <= u
// with equality rows, inequality rows and variable bounds stacked into A.

#include "backends.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace onebit::conic::detail {

SolveReport AdmmQuadLin::solve(const QuadLinProgram &prog, const SolverOptions &opt) const
{
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    SolveReport rep;
    rep.backend = name();

    const double inf = std::numeric_limits<double>::infinity();
    const int n = prog.num_vars;
    int nb = 0;
    for (char b : prog.nonneg)
        nb += b ? 1 : 0;
    const int m = static_cast<int>(prog.equalities.size() + prog.inequalities.size()) + nb;

    RMatrix a = RMatrix::Zero(m, n);
    RVector lo(m), hi(m);
    std::vector<char> is_eq(m, 0);
    int row = 0;
    auto put = [&](const SparseRow &r, double l, double u) {
        for (std::size_t k = 0; k < r.index.size(); ++k)
            a(row, r.index[k]) += r.value[k];
        double scale = a.row(row).cwiseAbs().maxCoeff();
        if (scale <= 0.0)
            scale = 1.0;
        a.row(row) /= scale;
        lo[row] = l / scale;
        hi[row] = u / scale;
        ++row;
    };
    for (const auto &r : prog.equalities) {
        is_eq[row] = 1;
        put(r, r.rhs, r.rhs);
    }
    for (const auto &r : prog.inequalities)
        put(r, r.rhs, inf);
    for (int j = 0; j < n; ++j)
        if (prog.nonneg[j]) {
            a(row, j) = 1.0;
            lo[row] = 0.0;
            hi[row] = inf;
            ++row;
        }

    const RVector pdiag = 2.0 * prog.quadratic;
    const RVector &q = prog.linear_cost;
    const double sigma = 1e-6;
    const double alpha = 1.6;
    double rho = 0.1;
    const double eps = std::max(opt.tolerance, 1e-12);
    const int max_iter = opt.max_iterations > 0 ? opt.max_iterations : 200000;

    RVector rho_vec(m);
    Eigen::LLT<RMatrix> llt;
    auto factor = [&]() {
        for (int i = 0; i < m; ++i)
            rho_vec[i] = is_eq[i] ? 1e3 * rho : rho;
        RMatrix k = a.transpose() * rho_vec.asDiagonal() * a;
        k.diagonal() += pdiag;
        k.diagonal().array() += sigma;
        llt.compute(k);
    };
    factor();

    RVector x = RVector::Zero(n), zv = RVector::Zero(m), yv = RVector::Zero(m);
    RVector prev_y = yv;
    for (int it = 0; it < max_iter; ++it) {
        rep.iterations = it + 1;
        const RVector rhs = sigma * x - q + a.transpose() * (rho_vec.cwiseProduct(zv) - yv);
        const RVector xt = llt.solve(rhs);
        const RVector zt = a * xt;
        x = alpha * xt + (1.0 - alpha) * x;
        const RVector zrel = alpha * zt + (1.0 - alpha) * zv;
        RVector znew = (zrel + yv.cwiseQuotient(rho_vec)).cwiseMax(lo).cwiseMin(hi);
        prev_y = yv;
        yv += rho_vec.cwiseProduct(zrel - znew);
        zv = znew;

        if (it % 25 != 0)
            continue;
        const RVector ax = a * x;
        const RVector px = pdiag.cwiseProduct(x);
        const RVector aty = a.transpose() * yv;
        const double r_prim = m ? (ax - zv).cwiseAbs().maxCoeff() : 0.0;
        const double r_dual = n ? (px + q + aty).cwiseAbs().maxCoeff() : 0.0;
        const double s_prim = std::max(m ? ax.cwiseAbs().maxCoeff() : 0.0, m ? zv.cwiseAbs().maxCoeff() : 0.0);
        const double s_dual = std::max({n ? px.cwiseAbs().maxCoeff() : 0.0,
                                        n ? aty.cwiseAbs().maxCoeff() : 0.0,
                                        n ? q.cwiseAbs().maxCoeff() : 0.0});
        if (r_prim <= eps * (1.0 + s_prim) && r_dual <= eps * (1.0 + s_dual)) {
            rep.status = SolveStatus::optimal;
            rep.message = "converged";
            break;
        }

        // Primal infeasibility: dy with A'dy ~ 0 and support function negative.
        const RVector dy = yv - prev_y;
        const double dy_norm = m ? dy.cwiseAbs().maxCoeff() : 0.0;
        if (dy_norm > 1e-12) {
            double support = 0.0;
            bool finite = true;
            for (int i = 0; i < m; ++i) {
                if (dy[i] > 0.0) {
                    if (std::isinf(hi[i])) { finite = false; break; }
                    support += hi[i] * dy[i];
                } else if (dy[i] < 0.0) {
                    support += lo[i] * dy[i];
                }
            }
            const double atdy = n ? (a.transpose() * dy).cwiseAbs().maxCoeff() : 0.0;
            if (finite && atdy <= 1e-9 * dy_norm && support < -1e-9 * dy_norm) {
                rep.status = SolveStatus::infeasible;
                rep.message = "primal infeasibility certificate";
                break;
            }
        }

        if (r_prim > 0.0 && r_dual > 0.0 && s_prim > 0.0 && s_dual > 0.0) {
            const double ratio = std::sqrt((r_prim / s_prim) / (r_dual / s_dual));
            const double cand = std::clamp(rho * ratio, 1e-6, 1e6);
            if (cand > 5.0 * rho || cand < 0.2 * rho) {
                rho = cand;
                factor();
            }
        }
        if (opt.time_limit_s > 0.0 &&
            std::chrono::duration<double>(clock::now() - t0).count() > opt.time_limit_s) {
            rep.message = "time limit reached";
            break;
        }
    }
    if (rep.status != SolveStatus::optimal && rep.message.empty())
        rep.message = "iteration limit reached";
    rep.solution = x;
    rep.solve_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    return rep;
}

} // namespace onebit::conic::detail
