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

// Free-variable view of an SdpProgram: pinned variables are folded into a
// constant matrix per block, the rest are renumbered 0..n-1.

#include "onebit/conic.hpp"

#include <vector>

namespace onebit::conic::detail {

struct FreeEntry {
    int row;
    int col;
    int var; // free index
    double coef;
};

struct FreeBlock {
    int dim = 0;
    RMatrix constant;
    std::vector<FreeEntry> entries;
};

struct SdpLayout {
    int num_free = 0;
    std::vector<int> free_of;      // program var -> free index or -1
    std::vector<int> program_of;   // free index -> program var
    RVector pinned_values;         // program var -> value (valid where free_of == -1)
    RVector cost;                  // over free vars
    std::vector<FreeBlock> blocks;

    explicit SdpLayout(const SdpProgram &p);

    // Z_b(y) = constant_b + sum_i y_i F_{b,i}.
    RMatrix block_value(int b, const RVector &y) const;
    // sum_i y_i F_{b,i} without the constant.
    RMatrix block_linear(int b, const RVector &y) const;
    // Adds <F_{b,i}, G> to out[i] for every free var i touching block b.
    void adjoint_add(int b, const RMatrix &g, RVector &out) const;
    RVector expand(const RVector &y) const;
};

} // namespace onebit::conic::detail
