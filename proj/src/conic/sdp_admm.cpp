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

// Dual alternating-direction augmented Lagrangian method for the LMI form
//
//   minimize c^T y  subject to  S_b = C_b + sum_i y_i F_{b,i} >= 0,
//
// viewed as the dual of a standard-form SDP with data (C, -F_i, -c). Each
// iteration solves one linear system with the fixed Gram matrix <F_i, F_j>
// and projects every block onto the PSD cone.
//
// 1x1 blocks touching many variables would make the Gram matrix dense, so
// they enter as low-rank terms handled by a Woodbury update.

#include "backends.hpp"
#include "sdp_layout.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>

namespace onebit::conic::detail {
namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Projection of a symmetric matrix onto the PSD cone; returns the positive part.
RMatrix psd_part(const RMatrix &v)
{
    if (v.rows() == 1)
        return RMatrix::Constant(1, 1, std::max(0.0, v(0, 0)));
    Eigen::SelfAdjointEigenSolver<RMatrix> es(v);
    const RVector lam = es.eigenvalues().cwiseMax(0.0);
    const RMatrix &q = es.eigenvectors();
    return q * lam.asDiagonal() * q.transpose();
}

class GramSolver {
public:
    GramSolver(const SdpLayout &lay)
    {
        const int n = lay.num_free;
        std::vector<Eigen::Triplet<double>> trip;
        std::vector<RVector> low_rank;
        for (const auto &fb : lay.blocks) {
            if (fb.dim == 1) {
                RVector u = RVector::Zero(n);
                for (const auto &e : fb.entries)
                    u[e.var] += e.coef;
                low_rank.push_back(std::move(u));
                continue;
            }
            std::map<std::pair<int, int>, std::vector<std::pair<int, double>>> at;
            for (const auto &e : fb.entries)
                at[{e.row, e.col}].push_back({e.var, e.coef});
            for (const auto &[pos, vars] : at) {
                const double w = pos.first == pos.second ? 1.0 : 2.0;
                for (const auto &[vi, ci] : vars)
                    for (const auto &[vj, cj] : vars)
                        trip.emplace_back(vi, vj, w * ci * cj);
            }
        }
        SpMat k(n, n);
        k.setFromTriplets(trip.begin(), trip.end());
        double scale = 0.0;
        for (int i = 0; i < n; ++i)
            scale = std::max(scale, k.coeff(i, i));
        for (const auto &u : low_rank)
            scale = std::max(scale, u.cwiseAbs2().maxCoeff());
        // Keeps the sparse part invertible when a variable only lives in 1x1 blocks.
        SpMat reg(n, n);
        reg.setIdentity();
        k += (1e-10 * std::max(scale, 1.0)) * reg;
        ldlt_.compute(k);
        ok_ = ldlt_.info() == Eigen::Success;
        if (!ok_ || low_rank.empty())
            return;
        u_.resize(n, static_cast<Eigen::Index>(low_rank.size()));
        for (std::size_t j = 0; j < low_rank.size(); ++j)
            u_.col(j) = low_rank[j];
        kinv_u_ = ldlt_.solve(u_);
        RMatrix cap = RMatrix::Identity(u_.cols(), u_.cols()) + u_.transpose() * kinv_u_;
        cap_.compute(cap);
    }

    bool ok() const { return ok_; }

    RVector solve(const RVector &r) const
    {
        RVector x = ldlt_.solve(r);
        if (u_.cols() > 0)
            x -= kinv_u_ * cap_.solve(u_.transpose() * x);
        return x;
    }

private:
    Eigen::SimplicialLDLT<SpMat> ldlt_;
    RMatrix u_;
    RMatrix kinv_u_;
    Eigen::LDLT<RMatrix> cap_;
    bool ok_ = false;
};

} // namespace

SolveReport AdmmSdp::solve(const SdpProgram &prog, const SolverOptions &opt) const
{
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };

    SolveReport rep;
    rep.backend = name();
    const SdpLayout lay(prog);
    const int n = lay.num_free;
    const int nb = static_cast<int>(lay.blocks.size());
    const double tol = opt.tolerance;
    const int max_iter = opt.max_iterations > 0 ? opt.max_iterations : 20000;

    if (n == 0) {
        rep.solution = lay.pinned_values;
        rep.status = prog.min_block_eigenvalue(rep.solution) >= -tol ? SolveStatus::optimal
                                                                      : SolveStatus::infeasible;
        rep.solve_seconds = elapsed();
        return rep;
    }

    const GramSolver gram(lay);
    if (!gram.ok()) {
        rep.status = SolveStatus::numerical_failure;
        rep.message = "Gram matrix factorization failed";
        rep.solution = lay.pinned_values;
        rep.solve_seconds = elapsed();
        return rep;
    }

    double f0_norm = 0.0;
    for (const auto &fb : lay.blocks)
        f0_norm += fb.constant.squaredNorm();
    f0_norm = std::sqrt(f0_norm);
    const double c_norm = lay.cost.norm();

    std::vector<RMatrix> x(nb), s(nb);
    for (int b = 0; b < nb; ++b) {
        x[b] = RMatrix::Zero(lay.blocks[b].dim, lay.blocks[b].dim);
        s[b] = RMatrix::Zero(lay.blocks[b].dim, lay.blocks[b].dim);
    }
    RVector y = RVector::Zero(n);
    double mu = 1.0;
    int it = 0;
    for (; it < max_iter; ++it) {
        if (opt.time_limit_s > 0.0 && elapsed() > opt.time_limit_s) {
            rep.status = SolveStatus::numerical_failure;
            rep.message = "time limit reached";
            break;
        }
        // y-step: <F_i,F_j> y = mu (F^*(X) - c) + F^*(S - C).
        RVector rhs = -mu * lay.cost;
        for (int b = 0; b < nb; ++b) {
            lay.adjoint_add(b, mu * x[b] + s[b] - lay.blocks[b].constant, rhs);
        }
        y = gram.solve(rhs);

        double pres2 = 0.0;
#pragma omp parallel for schedule(dynamic) reduction(+ : pres2) if (opt.exec == Exec::parallel)
        for (int b = 0; b < nb; ++b) {
            const RMatrix zb = lay.block_value(b, y);
            const RMatrix v = zb - mu * x[b];
            s[b] = psd_part(v);
            x[b] = (s[b] - v) / mu;
            pres2 += (zb - s[b]).squaredNorm();
        }

        if (it % 10 != 0 && it + 1 != max_iter)
            continue;
        RVector atx = RVector::Zero(n);
        double dual_obj = 0.0;
        for (int b = 0; b < nb; ++b) {
            lay.adjoint_add(b, x[b], atx);
            dual_obj -= (lay.blocks[b].constant.cwiseProduct(x[b])).sum();
        }
        const double primal_obj = lay.cost.dot(y);
        const double pinf = std::sqrt(pres2) / (1.0 + f0_norm);
        const double dinf = (lay.cost - atx).norm() / (1.0 + c_norm);
        const double gap = std::abs(primal_obj - dual_obj) / (1.0 + std::abs(primal_obj) + std::abs(dual_obj));
        if (opt.verbose && it % 100 == 0)
            std::fprintf(stderr, "admm-sdp %6d pobj %+.8e dobj %+.8e pinf %.2e dinf %.2e gap %.2e mu %.1e\n", it,
                         primal_obj, dual_obj, pinf, dinf, gap, mu);
        if (pinf < tol && dinf < tol && gap < tol) {
            rep.status = SolveStatus::optimal;
            break;
        }
        // Balance the two residuals.
        if (it % 50 == 0 && it > 0) {
            if (dinf < 0.1 * pinf)
                mu = std::max(1e-6, 0.5 * mu);
            else if (dinf > 10.0 * pinf)
                mu = std::min(1e6, 2.0 * mu);
        }
    }
    if (it == max_iter) {
        rep.status = SolveStatus::numerical_failure;
        rep.message = "iteration limit reached";
    }
    rep.iterations = it;
    rep.solution = lay.expand(y);
    rep.solve_seconds = elapsed();
    return rep;
}

} // namespace onebit::conic::detail
