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

// Sparse recovery of the direct and indirect path delays at one node from
// its one-bit samples, plus a full-precision baseline on the same grid.

#include "onebit/common.hpp"
#include "onebit/conic.hpp"
#include "onebit/sensing.hpp"

#include <vector>

namespace onebit {

struct DelayGrid {
    std::vector<double> points; // k T / N, k = 0..N-1
    double spacing = 0.0;

    int size() const { return static_cast<int>(points.size()); }
    static DelayGrid uniform(double window, int n);
};

// Unitary L x L DFT, [F]_{n,k} = exp(-j 2 pi n k / L) / sqrt(L).
CMatrix dft_matrix(int num_samples);

// Frequency-domain phase ramp for a delay u, with bins above L/2 taken as
// negative frequencies so that fractional shifts stay band-limited.
CVector phase_ramp(double delay, int num_samples, double sample_period);

struct Dictionary {
    CMatrix columns; // L x N, F s_k (.) a(tau_k)
    CMatrix time;    // F^H columns, the atoms as seen by the sign constraints
    DelayGrid grid;
    CMatrix dft;

    Eigen::Index rows() const { return columns.rows(); }
    Eigen::Index cols() const { return columns.cols(); }
};

Dictionary build_dictionary(const Waveform &w, const SamplingConfig &cfg, int grid_size,
                            Exec exec = Exec::parallel);

// W = Sigma^{-1/2} F^H on the floored eigenspace.
CMatrix whitener(const CovarianceFactor &factor, const CMatrix &dft);
CMatrix whitener(const RMatrix &sigma);

struct SparseSolution {
    CVector alpha;
    CVector slack;
    double objective_value = 0.0;
    conic::SolveReport report;
};

struct SparseOptions {
    double rho = 1.0;
    conic::BackendKind backend = conic::BackendKind::interior_point;
    conic::SolverOptions solver{};
};

// Convex program whose minimizer is the one-bit sparse estimate. Variable
// layout: 4N nonnegative parts of (Re alpha, Im alpha), then Re x, Im x.
conic::QuadLinProgram build_sparse_program(const OneBitVector &z, const CVector &gamma,
                                           const Dictionary &d, const CovarianceFactor &factor,
                                           double rho);

SparseSolution estimate_sparse(const OneBitVector &z, const CVector &gamma, const Dictionary &d,
                               const CovarianceFactor &factor, const SparseOptions &opt = {});

// Same objective with the sign constraints replaced by y = F^H D alpha + Sigma^{1/2} x.
SparseSolution estimate_full_precision(const CVector &y, const Dictionary &d,
                                       const CovarianceFactor &factor, const SparseOptions &opt = {});

struct DelayEstimate {
    double direct = 0.0;
    double indirect = 0.0;
    int support[2] = {0, 0}; // grid indices of the direct and indirect picks
    double range_m = 0.0;
};

// Second peak below this fraction of the first counts as no detection.
inline constexpr double kSecondPeakRatio = 1e-3;

// The second pick must lie at least min_separation grid points from the
// first; 1 allows adjacent indices.
DelayEstimate extract_delays(const SparseSolution &sol, const DelayGrid &grid, int min_separation = 1);

} // namespace onebit
