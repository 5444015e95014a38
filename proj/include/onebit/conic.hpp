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

#pragma once

// Convex program model shared by the delay estimator and the moment relaxation,
// plus the backend contract. Two backends ship for each program class: a dense
// primal-dual interior-point method and a first-order ADMM method.

#include "onebit/common.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace onebit::conic {

enum class SolveStatus { optimal, infeasible, unbounded, numerical_failure };

std::string to_string(SolveStatus s);

struct SolveReport {
    SolveStatus status = SolveStatus::numerical_failure;
    RVector solution;
    double objective = 0.0;
    // Recomputed from `solution` by the program itself, never copied from the backend.
    double max_violation = 0.0;
    int iterations = 0;
    double solve_seconds = 0.0;
    std::string backend;
    std::string message;

    bool ok() const { return status == SolveStatus::optimal; }
};

struct SolverOptions {
    double tolerance = 1e-8;
    int max_iterations = 0;     // 0 selects the backend default
    double time_limit_s = 0.0;  // 0 disables
    bool verbose = false;
    Exec exec = Exec::parallel;
};

// One linear row a.x (>= or =) rhs, stored sparsely.
struct SparseRow {
    std::vector<int> index;
    std::vector<double> value;
    double rhs = 0.0;

    double dot(const RVector &x) const;
};

// minimize  sum_i q_i x_i^2 + c.x
// subject to inequality rows (a.x >= rhs), equality rows (a.x = rhs), and
// x_i >= 0 for every variable flagged nonneg.
//
// l1 terms are modeled by nonnegative split pairs u = u+ - u-, each carrying
// unit linear cost.
struct QuadLinProgram {
    int num_vars = 0;
    RVector quadratic;         // q_i >= 0
    RVector linear_cost;       // c
    std::vector<char> nonneg;  // 1 when x_i >= 0
    std::vector<SparseRow> inequalities;
    std::vector<SparseRow> equalities;

    explicit QuadLinProgram(int n = 0);

    // Adds rho * ||x[first .. first+count)||^2 to the objective.
    void add_quadratic_block(int first, int count, double rho);
    // Appends `count` nonnegative variables with unit cost; returns the first index.
    int add_l1_split(int count);
    // Appends `count` free variables; returns the first index.
    int add_free(int count);

    void validate() const;
    double objective(const RVector &x) const;
    double max_violation(const RVector &x) const;
};

// One entry of a symmetric PSD block: block(row, col) += coef * mu[var],
// row <= col. Lower triangle is implied by symmetry.
struct BlockEntry {
    int row = 0;
    int col = 0;
    int var = 0;
    double coef = 0.0;
};

struct PsdBlock {
    int dim = 0;
    std::string label;
    std::vector<BlockEntry> entries;

    RMatrix evaluate(const RVector &mu) const;
};

// minimize c.mu subject to every block being PSD, with some entries of mu
// pinned to constants (mu_{0...0} = 1 for moment programs).
struct SdpProgram {
    int num_vars = 0;
    std::vector<std::pair<int, double>> cost;   // sparse c
    std::vector<std::pair<int, double>> fixed;  // pinned (var, value)
    std::vector<PsdBlock> blocks;

    void validate() const;
    double objective(const RVector &mu) const;
    // Largest of: -min eigenvalue over blocks, pinned-value deviation.
    double max_violation(const RVector &mu) const;
    double min_block_eigenvalue(const RVector &mu) const;
};

class QuadLinBackend {
public:
    virtual ~QuadLinBackend() = default;
    virtual std::string name() const = 0;
    // Must be reentrant: no state may persist between calls.
    virtual SolveReport solve(const QuadLinProgram &p, const SolverOptions &opt) const = 0;
};

class SdpBackend {
public:
    virtual ~SdpBackend() = default;
    virtual std::string name() const = 0;
    virtual SolveReport solve(const SdpProgram &p, const SolverOptions &opt) const = 0;
};

enum class BackendKind { interior_point, admm };

std::unique_ptr<QuadLinBackend> make_quadlin_backend(BackendKind kind);
std::unique_ptr<SdpBackend> make_sdp_backend(BackendKind kind);

SolveReport solve_quadlin(const QuadLinProgram &p, const SolverOptions &opt = {},
                          BackendKind kind = BackendKind::interior_point);
SolveReport solve_sdp(const SdpProgram &p, const SolverOptions &opt = {},
                      BackendKind kind = BackendKind::interior_point);

// Sparse-triplet text dump for cross-checking against external tools.
void dump(const QuadLinProgram &p, std::ostream &os);
void dump(const SdpProgram &p, std::ostream &os);

} // namespace onebit::conic
