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

#include "onebit/conic.hpp"

#include "backends.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace onebit::conic {

std::string to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::numerical_failure: return "numerical-failure";
    }
    return "unknown";
}

double SparseRow::dot(const RVector &x) const
{
    double acc = 0.0;
    for (std::size_t k = 0; k < index.size(); ++k)
        acc += value[k] * x[index[k]];
    return acc;
}

QuadLinProgram::QuadLinProgram(int n)
    : num_vars(n), quadratic(RVector::Zero(n)), linear_cost(RVector::Zero(n)), nonneg(n, 0)
{
}

void QuadLinProgram::add_quadratic_block(int first, int count, double rho)
{
    if (first < 0 || count < 0 || first + count > num_vars)
        throw Error("quadratic block out of range");
    if (!(rho >= 0.0))
        throw Error("quadratic weight must be nonnegative");
    quadratic.segment(first, count).array() += rho;
}

int QuadLinProgram::add_l1_split(int count)
{
    const int first = add_free(count);
    for (int i = first; i < first + count; ++i) {
        nonneg[i] = 1;
        linear_cost[i] = 1.0;
    }
    return first;
}

int QuadLinProgram::add_free(int count)
{
    const int first = num_vars;
    num_vars += count;
    quadratic.conservativeResize(num_vars);
    linear_cost.conservativeResize(num_vars);
    quadratic.tail(count).setZero();
    linear_cost.tail(count).setZero();
    nonneg.resize(num_vars, 0);
    return first;
}

void QuadLinProgram::validate() const
{
    if (quadratic.size() != num_vars || linear_cost.size() != num_vars ||
        static_cast<int>(nonneg.size()) != num_vars)
        throw Error("QuadLinProgram: inconsistent variable count");
    if (!quadratic.allFinite() || !linear_cost.allFinite() || (quadratic.array() < 0.0).any())
        throw Error("QuadLinProgram: objective data must be finite with q >= 0");
    auto check = [&](const std::vector<SparseRow> &rows) {
        for (const auto &r : rows) {
            if (r.index.size() != r.value.size() || !std::isfinite(r.rhs))
                throw Error("QuadLinProgram: malformed row");
            for (std::size_t k = 0; k < r.index.size(); ++k)
                if (r.index[k] < 0 || r.index[k] >= num_vars || !std::isfinite(r.value[k]))
                    throw Error("QuadLinProgram: row references invalid variable");
        }
    };
    check(inequalities);
    check(equalities);
}

double QuadLinProgram::objective(const RVector &x) const
{
    return quadratic.dot(x.cwiseAbs2()) + linear_cost.dot(x);
}

double QuadLinProgram::max_violation(const RVector &x) const
{
    double v = 0.0;
    for (const auto &r : inequalities)
        v = std::max(v, r.rhs - r.dot(x));
    for (const auto &r : equalities)
        v = std::max(v, std::abs(r.rhs - r.dot(x)));
    for (int i = 0; i < num_vars; ++i)
        if (nonneg[i])
            v = std::max(v, -x[i]);
    return v;
}

RMatrix PsdBlock::evaluate(const RVector &mu) const
{
    RMatrix m = RMatrix::Zero(dim, dim);
    for (const auto &e : entries) {
        const double val = e.coef * mu[e.var];
        m(e.row, e.col) += val;
        if (e.row != e.col)
            m(e.col, e.row) += val;
    }
    return m;
}

void SdpProgram::validate() const
{
    if (blocks.empty())
        throw Error("SdpProgram: at least one PSD block is required");
    auto valid_var = [&](int v) { return v >= 0 && v < num_vars; };
    for (const auto &[v, c] : cost)
        if (!valid_var(v) || !std::isfinite(c))
            throw Error("SdpProgram: cost references invalid variable");
    for (const auto &[v, c] : fixed)
        if (!valid_var(v) || !std::isfinite(c))
            throw Error("SdpProgram: pinned value references invalid variable");
    for (const auto &b : blocks) {
        if (b.dim < 1)
            throw Error("SdpProgram: empty block");
        for (const auto &e : b.entries)
            if (e.row < 0 || e.col < e.row || e.col >= b.dim || !valid_var(e.var) ||
                !std::isfinite(e.coef))
                throw Error("SdpProgram: malformed entry in block '" + b.label + "'");
    }
}

double SdpProgram::objective(const RVector &mu) const
{
    double acc = 0.0;
    for (const auto &[v, c] : cost)
        acc += c * mu[v];
    return acc;
}

double SdpProgram::min_block_eigenvalue(const RVector &mu) const
{
    double lo = std::numeric_limits<double>::infinity();
    for (const auto &b : blocks) {
        Eigen::SelfAdjointEigenSolver<RMatrix> eig(b.evaluate(mu), Eigen::EigenvaluesOnly);
        lo = std::min(lo, eig.eigenvalues()[0]);
    }
    return lo;
}

double SdpProgram::max_violation(const RVector &mu) const
{
    double v = std::max(0.0, -min_block_eigenvalue(mu));
    for (const auto &[var, val] : fixed)
        v = std::max(v, std::abs(mu[var] - val));
    return v;
}

std::unique_ptr<QuadLinBackend> make_quadlin_backend(BackendKind kind)
{
    if (kind == BackendKind::admm)
        return std::make_unique<detail::AdmmQuadLin>();
    return std::make_unique<detail::InteriorPointQuadLin>();
}

std::unique_ptr<SdpBackend> make_sdp_backend(BackendKind kind)
{
    if (kind == BackendKind::admm)
        return std::make_unique<detail::AdmmSdp>();
    return std::make_unique<detail::InteriorPointSdp>();
}

SolveReport solve_quadlin(const QuadLinProgram &p, const SolverOptions &opt, BackendKind kind)
{
    p.validate();
    SolveReport rep = make_quadlin_backend(kind)->solve(p, opt);
    if (rep.solution.size() == p.num_vars) {
        rep.objective = p.objective(rep.solution);
        rep.max_violation = p.max_violation(rep.solution);
    }
    return rep;
}

SolveReport solve_sdp(const SdpProgram &p, const SolverOptions &opt, BackendKind kind)
{
    p.validate();
    SolveReport rep = make_sdp_backend(kind)->solve(p, opt);
    if (rep.solution.size() == p.num_vars) {
        rep.objective = p.objective(rep.solution);
        rep.max_violation = p.max_violation(rep.solution);
    }
    return rep;
}

void dump(const QuadLinProgram &p, std::ostream &os)
{
    os << "quadlin " << p.num_vars << ' ' << p.inequalities.size() << ' ' << p.equalities.size() << '\n';
    for (int i = 0; i < p.num_vars; ++i)
        if (p.quadratic[i] != 0.0 || p.linear_cost[i] != 0.0 || p.nonneg[i])
            os << "var " << i << ' ' << p.quadratic[i] << ' ' << p.linear_cost[i] << ' '
               << int(p.nonneg[i]) << '\n';
    auto rows = [&](const char *tag, const std::vector<SparseRow> &rs) {
        for (std::size_t r = 0; r < rs.size(); ++r) {
            for (std::size_t k = 0; k < rs[r].index.size(); ++k)
                os << tag << ' ' << r << ' ' << rs[r].index[k] << ' ' << rs[r].value[k] << '\n';
            os << tag << "_rhs " << r << ' ' << rs[r].rhs << '\n';
        }
    };
    rows("ge", p.inequalities);
    rows("eq", p.equalities);
}

void dump(const SdpProgram &p, std::ostream &os)
{
    os << "sdp " << p.num_vars << ' ' << p.blocks.size() << '\n';
    for (const auto &[v, c] : p.cost)
        os << "cost " << v << ' ' << c << '\n';
    for (const auto &[v, c] : p.fixed)
        os << "fix " << v << ' ' << c << '\n';
    for (std::size_t b = 0; b < p.blocks.size(); ++b) {
        os << "block " << b << ' ' << p.blocks[b].dim << ' ' << p.blocks[b].label << '\n';
        for (const auto &e : p.blocks[b].entries)
            os << "entry " << b << ' ' << e.row << ' ' << e.col << ' ' << e.var << ' ' << e.coef << '\n';
    }
}

} // namespace onebit::conic
