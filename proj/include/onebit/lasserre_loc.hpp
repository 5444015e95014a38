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

// Optimal localization from one-bit range data. The least-squares residual
// after eliminating the target is the ratio F(r)/J(r) of two polynomials in
// the ranges; its epigraph is relaxed by a Lasserre moment SDP.
//
// Polynomial variables are ordered (r_1, ..., r_M, v).

#include "onebit/conic.hpp"
#include "onebit/geo_loc.hpp"
#include "onebit/polynomial.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace onebit {

struct FractionalCoefficients {
    RMatrix psi;        // M x M, J(r) = r^T psi r
    RVector kappa;      // M, d^T P b = kappa^T r
    double chi = 0.0;   // ||P b||^2
    RMatrix projector;  // P = I - V V^+, (M-1) x (M-1)
    RMatrix v;          // node offsets from node 1, (M-1) x dim
    RVector b;          // half squared node offsets

    int num_nodes() const { return static_cast<int>(kappa.size()); }
};

// Throws RankDeficientError when V loses column rank.
FractionalCoefficients fractional_coeffs(const Geometry &g);

double eval_F(const RVector &r, const FractionalCoefficients &fc);
double eval_J(const RVector &r, const FractionalCoefficients &fc);

// v J(r) - F(r) as a polynomial in M + 1 variables.
Polynomial expand_vJ_minus_F(const FractionalCoefficients &fc);

struct MomentProgram {
    int order = 3;
    int num_vars = 0;                   // M + 1
    double v_max = 0.0;
    std::vector<Exponent> basis;        // degree <= order
    std::vector<Exponent> moments;      // degree <= 2 order, mu index = position
    std::map<Exponent, int> index_of;
    conic::SdpProgram sdp;
    // Block positions inside sdp.blocks.
    int moment_block = 0;
    int epigraph_block = 0;    // v J - F >= 0
    std::vector<int> localizer_blocks;  // 2M + 1, then v >= 0, r <= r_upper, J >= j_min

    int index(const Exponent &e) const;
    const Exponent &exponent(int k) const { return moments.at(k); }
    int v_index() const;
    int range_index(int m) const;
};

// All inputs in the units the relaxation is solved in. The last polynomial
// variable is v / v_max, so the v moment lies in [0, 1].
inline constexpr double kDefaultJMin = 1e-6;

// On r = c 1 both J and F vanish and v is unconstrained, so the epigraph is
// unbounded below; the J >= j_min and v >= 0 localizers remove that line.
// Ranges are also capped at r_upper, since F vanishes on an unbounded set of
// consistent ranges.
MomentProgram build_moment_program(const FractionalCoefficients &fc, const std::vector<int> &w,
                                   const RVector &lambda, double v_max, int order,
                                   double j_min = kDefaultJMin, double r_upper = 1.0);

// Number of moments of a relaxation of the given order over M ranges.
long long moment_count(int num_nodes, int order);

// Relaxations above this many free moments are refused (dense Schur complement).
inline constexpr long long kMaxMoments = 20000;

class RelaxationError : public Error {
public:
    using Error::Error;
};

struct LasserreOptions {
    int order = 3;
    double v_max = 0.0;        // m^4; 0 selects 10 F/J at the feasible-box midpoint
    bool escalate = true;      // retry once at order + 1 when extraction fails
    double sanity_tol = 1e-6;  // relative to r_max
    double j_min = kDefaultJMin; // in units of r_max^2
    conic::BackendKind backend = conic::BackendKind::interior_point;
    conic::SolverOptions solver;

    // The dual of a moment relaxation is often not attained, which caps
    // interior-point accuracy near 1e-5.
    LasserreOptions() { solver.tolerance = 1e-7; }
};

struct LasserreResult {
    RVector ranges;        // first-order moments, meters
    double v_opt = 0.0;    // lower bound on min F/J, m^4
    Point target = Point::Zero();
    bool have_target = false;
    bool tight = false;    // extraction sanity passed
    int moment_rank = 0;   // numerical rank of the order-1 moment submatrix
    int order = 0;
    int num_moments = 0;
    double v_max = 0.0;    // m^4
    conic::SolveReport report;
    std::string message;
};

// Solves the relaxation in units of r_max (ranges and coordinates divided by
// r_max). Throws RelaxationError on size overflow or solver failure.
LasserreResult localize_optimal(const OneBitRangeData &data, const Geometry &g,
                                const LasserreOptions &opt = {});

// Default v_max in the scaled units of `fc`.
double default_v_max(const FractionalCoefficients &fc, const std::vector<int> &w,
                     const RVector &lambda, double r_max);

void dump(const MomentProgram &mp, std::ostream &os);

} // namespace onebit
