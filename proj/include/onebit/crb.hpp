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

// Likelihood, score and Fisher information of one-bit range data under a
// Gaussian range-error model, and the normalized localization CRB.
//
// Parameter vector q = [target (dim entries), d0, upsilon_1 .. upsilon_M],
// with r_m = |target - node_m| + d0.

#include "onebit/geo_loc.hpp"

#include <vector>

namespace onebit {

struct CrbParams {
    Point target = Point::Zero();
    double d0 = 0.0;
    RVector upsilon; // per-node range-error standard deviation, meters

    void validate(const Geometry &g) const;
};

int crb_dim(const Geometry &g);
RVector to_vector(const CrbParams &q, const Geometry &g);
CrbParams from_vector(const RVector &v, const Geometry &g);

double normal_cdf(double x);
// log Phi(x), accurate far into the lower tail.
double log_normal_cdf(double x);
// phi(x) / Phi(x).
double inverse_mills(double x);

double loglik(const std::vector<int> &w, const CrbParams &q, const Geometry &g, const RVector &lambda);
RVector score(const std::vector<int> &w, const CrbParams &q, const Geometry &g, const RVector &lambda);

// Contribution of node m alone; fim() is the sum over m.
RMatrix fim_node(const CrbParams &q, const Geometry &g, const RVector &lambda, int m);
RMatrix fim(const CrbParams &q, const Geometry &g, const RVector &lambda);

enum class CrbBlock {
    full,          // invert the whole FIM (singular: rank <= M < M + dim + 1)
    known_spread,  // upsilon treated as known, invert the target and d0 block
};

// sqrt((CRB_xx + CRB_yy) / (x^2 + y^2)). Throws when the inverted block is singular.
double normalized_root_crb(const RMatrix &info, const CrbParams &q, const Geometry &g,
                           CrbBlock block = CrbBlock::known_spread);

} // namespace onebit
