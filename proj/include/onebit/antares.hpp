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

// Sub-optimal joint range and target estimation from one-bit range data by
// alternating exact minimization over the non-reference ranges, the reference
// range and theta. Each range subproblem is a constrained quartic solved in
// closed form.

#include "onebit/geo_loc.hpp"

#include <array>
#include <limits>
#include <string>
#include <vector>

namespace onebit {

// r^4 / 4 + beta r^3 + varsigma r^2 + omega r + eta.
struct QuarticCoeffs {
    double beta = 0.0;
    double varsigma = 0.0;
    double omega = 0.0;
    double eta = 0.0;

    double eval(double r) const;
    // r^3 + 3 beta r^2 + 2 varsigma r + omega.
    double derivative(double r) const;
};

// Expansion of ((r - r1)^2 / 2 + theta_d (r - r1) + zeta)^2, theta_d the last
// entry of theta.
QuarticCoeffs quartic_coeffs_node(const RVector &theta, double r1, double zeta);

// Roots of r^3 + 3 beta r^2 + 2 varsigma r + omega by Cardano's formula.
std::array<cplx, 3> cubic_roots(double beta, double varsigma, double omega);

inline constexpr double kRealRootTol = 1e-7;

struct QuarticSolution {
    double r = 0.0;
    bool fallback = false; // the KKT candidate set came out empty
};

// Global minimizer over {r >= 0, w (r - lambda) >= 0, r <= r_max}.
QuarticSolution solve_constrained_quartic(const QuarticCoeffs &c, int w, double lambda,
                                          double r_max = std::numeric_limits<double>::infinity());

// zeta_m = [V theta_bar]_m - b_m for the non-reference nodes.
RVector node_zetas(const Geometry &g, const RVector &theta);

// Average over m >= 2 of ((r1 - r_m)^2 / 2 - theta_d (r1 - r_m) + zeta_m)^2 as
// a quartic in r1.
QuarticCoeffs r1_subproblem_coeffs(const RVector &theta, const RVector &r_rest, const RVector &zetas);

struct ThetaUpdate {
    RVector theta;
    bool frozen = false; // G lost rank, previous theta kept
};

ThetaUpdate theta_update(const Geometry &g, const RVector &r, const RVector &previous);

// ||G(r) theta - h(r)||^2.
double ls_objective(const Geometry &g, const RVector &r, const RVector &theta);

// Tolerances apply to squared steps measured in units of r_max.
struct AntaresConfig {
    double eps_theta = 1e-8;
    double eps_r = 1e-8;
    int max_iters = 500;
    double r1_init = std::numeric_limits<double>::quiet_NaN(); // NaN selects the default
    RVector theta_init;                                        // empty selects the default
    Exec exec = Exec::parallel;
};

struct AntaresDiagnostics {
    int iterations = 0;
    bool converged = false;
    // Objective after initialization, then after each of the three block updates.
    std::vector<double> objective_trace;
    int fallback_count = 0;
    int rank_freezes = 0;

    std::string to_json() const;
};

struct AntaresResult {
    RVector theta;
    RVector r;
    Point target = Point::Zero();
    AntaresDiagnostics diag;
};

AntaresResult antares(const OneBitRangeData &data, const Geometry &g, const AntaresConfig &cfg = {});

} // namespace onebit
