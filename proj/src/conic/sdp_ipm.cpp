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

// Primal-dual interior-point method for linear matrix inequalities
//
//   minimize c^T y  subject to  Z_b = C_b + sum_i y_i F_{b,i} >= 0 for every block b,
//
// using the HKM search direction with a Mehrotra predictor-corrector and an
// infeasible starting point. X_b are the dual matrices.

#include "backends.hpp"
#include "sdp_layout.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <limits>

namespace onebit::conic::detail {
namespace {

// Above this many free variables the dense Schur complement does not fit.
constexpr int kMaxSchurDim = 20000;

// Largest a with A + a*D still positive definite (infinity if unbounded).
double psd_step(const RMatrix &a, const RMatrix &d)
{
    Eigen::LLT<RMatrix> llt(a);
    if (llt.info() != Eigen::Success)
        return 0.0;
    RMatrix m = llt.matrixL().solve(d);
    m = llt.matrixL().solve(m.transpose()).transpose();
    m = 0.5 * (m + m.transpose());
    const double lmin = Eigen::SelfAdjointEigenSolver<RMatrix>(m, Eigen::EigenvaluesOnly).eigenvalues()[0];
    return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

double inner(const RMatrix &a, const RMatrix &b) { return a.cwiseProduct(b).sum(); }

struct VarRef {
    int block;
    int row;
    int col;
    double coef;
};

// H_ij = sum_b tr(F_{b,i} X_b F_{b,j} Z_b^-1).
RMatrix schur(const SdpLayout &lay, const std::vector<std::vector<VarRef>> &by_var,
              const std::vector<RMatrix> &x, const std::vector<RMatrix> &zi, Exec exec)
{
    const int n = lay.num_free;
    RMatrix h = RMatrix::Zero(n, n);
#pragma omp parallel for schedule(dynamic, 4) if (exec == Exec::parallel)
    for (int i = 0; i < n; ++i) {
        for (const VarRef &r : by_var[i]) {
            const RMatrix &xb = x[r.block];
            const RMatrix &zb = zi[r.block];
            const int a1 = r.row, b1 = r.col;
            for (const FreeEntry &e : lay.blocks[r.block].entries) {
                const int a2 = e.row, b2 = e.col;
                // tr(E_pq X E_st Zi) = X(q,s) Zi(t,p), summed over the symmetric parts.
                double t = xb(b1, a2) * zb(b2, a1);
                if (a2 != b2)
                    t += xb(b1, b2) * zb(a2, a1);
                if (a1 != b1) {
                    t += xb(a1, a2) * zb(b2, b1);
                    if (a2 != b2)
                        t += xb(a1, b2) * zb(a2, b1);
                }
                h(i, e.var) += r.coef * e.coef * t;
            }
        }
    }
    return 0.5 * (h + h.transpose());
}

} // namespace

namespace {

SolveReport run_sdp_ipm(const SdpProgram &prog, const SolverOptions &opt)
{
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };

    SolveReport rep;
    rep.backend = "ipm-sdp";
    const SdpLayout lay(prog);
    const int n = lay.num_free;
    const int nb = static_cast<int>(lay.blocks.size());
    const double tol = opt.tolerance;
    const int max_iter = opt.max_iterations > 0 ? opt.max_iterations : 100;

    if (n == 0) {
        rep.solution = lay.pinned_values;
        rep.status = prog.min_block_eigenvalue(rep.solution) >= -tol ? SolveStatus::optimal
                                                                      : SolveStatus::infeasible;
        rep.solve_seconds = elapsed();
        return rep;
    }
    if (n > kMaxSchurDim) {
        rep.status = SolveStatus::numerical_failure;
        rep.message = "Schur complement of dimension " + std::to_string(n) + " exceeds the dense limit";
        rep.solution = lay.pinned_values;
        rep.solve_seconds = elapsed();
        return rep;
    }

    std::vector<std::vector<VarRef>> by_var(n);
    for (int b = 0; b < nb; ++b)
        for (const auto &e : lay.blocks[b].entries)
            by_var[e.var].push_back({b, e.row, e.col, e.coef});

    int total_dim = 0;
    double c_scale = lay.cost.cwiseAbs().maxCoeff();
    double f_scale = 0.0;
    double f0_norm = 0.0;
    for (const auto &fb : lay.blocks) {
        total_dim += fb.dim;
        f0_norm += fb.constant.squaredNorm();
        if (fb.dim > 0)
            f_scale = std::max(f_scale, fb.constant.cwiseAbs().maxCoeff());
    }
    f0_norm = std::sqrt(f0_norm);
    const double c_norm = lay.cost.norm();

    const double lambda0 = std::max({10.0, 10.0 * f_scale, 10.0 * c_scale});
    RVector y = RVector::Zero(n);
    std::vector<RMatrix> x(nb), z(nb);
    for (int b = 0; b < nb; ++b) {
        x[b] = lambda0 * RMatrix::Identity(lay.blocks[b].dim, lay.blocks[b].dim);
        z[b] = lambda0 * RMatrix::Identity(lay.blocks[b].dim, lay.blocks[b].dim);
    }

    std::vector<RMatrix> zi(nb), rp(nb), dx(nb), dz(nb), dxa(nb), dza(nb);
    double last_err = std::numeric_limits<double>::infinity();
    double best_err = last_err;
    RVector best_y = y;
    int since_best = 0;
    int it = 0;
    for (; it < max_iter; ++it) {
        if (opt.time_limit_s > 0.0 && elapsed() > opt.time_limit_s) {
            rep.status = SolveStatus::numerical_failure;
            rep.message = "time limit reached";
            break;
        }
        // Residuals.
        RVector atx = RVector::Zero(n);
        double pres2 = 0.0, mu_acc = 0.0, dual_obj = 0.0, trace_x = 0.0;
        for (int b = 0; b < nb; ++b) {
            rp[b] = lay.block_value(b, y) - z[b];
            pres2 += rp[b].squaredNorm();
            lay.adjoint_add(b, x[b], atx);
            mu_acc += inner(x[b], z[b]);
            dual_obj -= inner(lay.blocks[b].constant, x[b]);
            trace_x += x[b].trace();
        }
        const RVector rd = lay.cost - atx;
        const double mu = mu_acc / total_dim;
        const double primal_obj = lay.cost.dot(y);
        const double pinf = std::sqrt(pres2) / (1.0 + f0_norm);
        const double dinf = rd.norm() / (1.0 + c_norm);
        const double gap = std::abs(primal_obj - dual_obj) / (1.0 + std::abs(primal_obj) + std::abs(dual_obj));
        const double comp = mu_acc / (1.0 + std::abs(primal_obj) + std::abs(dual_obj));
        if (opt.verbose)
            std::fprintf(stderr, "ipm-sdp %3d pobj %+.8e dobj %+.8e pinf %.2e dinf %.2e gap %.2e\n", it,
                         primal_obj, dual_obj, pinf, dinf, gap);
        last_err = std::max({pinf, dinf, gap, comp});
        if (last_err < tol) {
            rep.status = SolveStatus::optimal;
            break;
        }
        if (last_err < best_err) {
            since_best = last_err < 0.5 * best_err ? 0 : since_best + 1;
            best_err = last_err;
            best_y = y;
        } else if (++since_best > 15) {
            rep.status = SolveStatus::numerical_failure;
            rep.message = "no progress";
            break;
        }
        // Certificate of an empty feasible set: X >= 0, A^*(X) ~ 0, <C, X> < 0.
        if (trace_x > 1e8 * lambda0 && -dual_obj / trace_x > 1e-8 && atx.norm() / trace_x < 1e-10 * (1.0 + c_norm)) {
            rep.status = SolveStatus::infeasible;
            rep.message = "primal infeasibility certificate";
            break;
        }
        if (pinf > std::sqrt(tol) && mu_acc < 1e-3 * tol * (1.0 + std::abs(primal_obj))) {
            rep.status = SolveStatus::numerical_failure;
            rep.message = "stalled while infeasible";
            break;
        }
        if (pinf < std::sqrt(tol) && primal_obj < -1e10 * (1.0 + c_norm)) {
            rep.status = SolveStatus::unbounded;
            break;
        }

        for (int b = 0; b < nb; ++b) {
            Eigen::LLT<RMatrix> llt(z[b]);
            zi[b] = llt.solve(RMatrix::Identity(z[b].rows(), z[b].cols()));
            zi[b] = 0.5 * (zi[b] + zi[b].transpose());
        }
        RMatrix h = schur(lay, by_var, x, zi, opt.exec);
        const double diag_scale = std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
        Eigen::LLT<RMatrix> hfac(h);
        if (hfac.info() != Eigen::Success) {
            h.diagonal().array() += 1e-12 * diag_scale;
            hfac.compute(h);
            if (hfac.info() != Eigen::Success) {
                rep.status = SolveStatus::numerical_failure;
                rep.message = "Schur complement not positive definite";
                break;
            }
        }

        // Solves for a direction given target sigma*mu and a correction term per block.
        auto direction = [&](double smu, const std::vector<RMatrix> *corr, std::vector<RMatrix> &ox,
                             std::vector<RMatrix> &oz, RVector &ody) {
            RVector rhs = -lay.cost;
            std::vector<RMatrix> g(nb);
            for (int b = 0; b < nb; ++b) {
                g[b] = smu * zi[b] - x[b] * rp[b] * zi[b];
                if (corr)
                    g[b] -= (*corr)[b];
                lay.adjoint_add(b, g[b], rhs);
            }
            ody = hfac.solve(rhs);
            auto recover = [&] {
                for (int b = 0; b < nb; ++b) {
                    oz[b] = lay.block_linear(b, ody) + rp[b];
                    RMatrix d = smu * zi[b] - x[b] - x[b] * oz[b] * zi[b];
                    if (corr)
                        d -= (*corr)[b];
                    ox[b] = 0.5 * (d + d.transpose());
                }
            };
            recover();
            // Refine against the exact operator: A^*(dX) must equal rd.
            for (int pass = 0; pass < 2; ++pass) {
                RVector a = RVector::Zero(n);
                for (int b = 0; b < nb; ++b)
                    lay.adjoint_add(b, ox[b], a);
                const RVector e = rd - a;
                if (e.norm() <= 1e-14 * (1.0 + rd.norm()))
                    break;
                ody -= hfac.solve(e);
                recover();
            }
        };
        auto steps = [&](const std::vector<RMatrix> &ox, const std::vector<RMatrix> &oz) {
            double ap = std::numeric_limits<double>::infinity(), ad = ap;
            for (int b = 0; b < nb; ++b) {
                ap = std::min(ap, psd_step(z[b], oz[b]));
                ad = std::min(ad, psd_step(x[b], ox[b]));
            }
            return std::pair<double, double>{ap, ad};
        };

        RVector dya, dy;
        direction(0.0, nullptr, dxa, dza, dya);
        auto [apa, ada] = steps(dxa, dza);
        apa = std::min(1.0, apa);
        ada = std::min(1.0, ada);
        double mu_aff = 0.0;
        for (int b = 0; b < nb; ++b)
            mu_aff += inner(x[b] + ada * dxa[b], z[b] + apa * dza[b]);
        mu_aff /= total_dim;
        const double ratio = std::clamp(mu_aff / mu, 0.0, 1.0);
        const double sigma = std::pow(ratio, 3.0);

        std::vector<RMatrix> corr(nb);
        for (int b = 0; b < nb; ++b)
            corr[b] = dxa[b] * dza[b] * zi[b];
        direction(sigma * mu, &corr, dx, dz, dy);
        auto [ap, ad] = steps(dx, dz);
        const double frac = 0.9 + 0.09 * std::min({1.0, ap, ad});
        ap = std::min(1.0, frac * ap);
        ad = std::min(1.0, frac * ad);
        if (!(ap > 1e-14) && !(ad > 1e-14)) {
            rep.status = SolveStatus::numerical_failure;
            rep.message = "step length collapsed";
            break;
        }
        y += ap * dy;
        for (int b = 0; b < nb; ++b) {
            z[b] += ap * dz[b];
            z[b] = 0.5 * (z[b] + z[b].transpose());
            x[b] += ad * dx[b];
            x[b] = 0.5 * (x[b] + x[b].transpose());
        }
    }
    if (it == max_iter) {
        rep.status = SolveStatus::numerical_failure;
        rep.message = "iteration limit reached";
    }
    // Stalling close to the optimum is common near degenerate faces.
    if (rep.status == SolveStatus::numerical_failure) {
        y = best_y;
        if (best_err < std::sqrt(tol) * 1e-1 && rep.message != "time limit reached") {
            rep.status = SolveStatus::optimal;
            rep.message = "reduced accuracy " + std::to_string(best_err);
        }
    }
    rep.iterations = it;
    rep.solution = lay.expand(y);
    rep.solve_seconds = elapsed();
    return rep;
}


// minimize t s.t. every block + t I >= 0 and t >= -1.
SdpProgram phase_one(const SdpProgram &prog)
{
    SdpProgram f = prog;
    const int t = f.num_vars++;
    f.cost = {{t, 1.0}};
    for (auto &b : f.blocks)
        for (int i = 0; i < b.dim; ++i)
            b.entries.push_back({i, i, t, 1.0});
    int one = -1;
    for (const auto &[v, val] : prog.fixed)
        if (val != 0.0) {
            one = v;
            PsdBlock lower;
            lower.dim = 1;
            lower.label = "phase-one bound";
            lower.entries = {{0, 0, t, 1.0}, {0, 0, one, 1.0 / val}};
            f.blocks.push_back(lower);
            break;
        }
    return f;
}

} // namespace

SolveReport InteriorPointSdp::solve(const SdpProgram &prog, const SolverOptions &opt) const
{
    SolveReport rep = run_sdp_ipm(prog, opt);
    if (rep.status != SolveStatus::numerical_failure || rep.message == "time limit reached" ||
        prog.fixed.empty())
        return rep;
    SolverOptions o = opt;
    o.tolerance = std::max(opt.tolerance, 1e-9);
    const SdpProgram p1 = phase_one(prog);
    const SolveReport f = run_sdp_ipm(p1, o);
    if (f.status == SolveStatus::optimal && f.solution[p1.num_vars - 1] > 1e-6) {
        rep.status = SolveStatus::infeasible;
        rep.message = "minimum eigenvalue shift " + std::to_string(f.solution[p1.num_vars - 1]);
    }
    rep.solve_seconds += f.solve_seconds;
    return rep;
}

} // namespace onebit::conic::detail
