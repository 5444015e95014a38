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

#include "sdp_layout.hpp"

namespace onebit::conic::detail {

SdpLayout::SdpLayout(const SdpProgram &p)
    : free_of(p.num_vars, 0), pinned_values(RVector::Zero(p.num_vars))
{
    for (const auto &[v, val] : p.fixed) {
        free_of[v] = -1;
        pinned_values[v] = val;
    }
    for (int v = 0; v < p.num_vars; ++v) {
        if (free_of[v] == -1)
            continue;
        free_of[v] = num_free++;
        program_of.push_back(v);
    }
    cost = RVector::Zero(num_free);
    for (const auto &[v, c] : p.cost) {
        if (free_of[v] >= 0)
            cost[free_of[v]] += c;
    }
    blocks.reserve(p.blocks.size());
    for (const auto &b : p.blocks) {
        FreeBlock fb;
        fb.dim = b.dim;
        fb.constant = RMatrix::Zero(b.dim, b.dim);
        for (const auto &e : b.entries) {
            const int f = free_of[e.var];
            if (f < 0) {
                const double val = e.coef * pinned_values[e.var];
                fb.constant(e.row, e.col) += val;
                if (e.row != e.col)
                    fb.constant(e.col, e.row) += val;
            } else {
                fb.entries.push_back({e.row, e.col, f, e.coef});
            }
        }
        blocks.push_back(std::move(fb));
    }
}

RMatrix SdpLayout::block_linear(int b, const RVector &y) const
{
    const FreeBlock &fb = blocks[b];
    RMatrix m = RMatrix::Zero(fb.dim, fb.dim);
    for (const auto &e : fb.entries) {
        const double val = e.coef * y[e.var];
        m(e.row, e.col) += val;
        if (e.row != e.col)
            m(e.col, e.row) += val;
    }
    return m;
}

RMatrix SdpLayout::block_value(int b, const RVector &y) const
{
    return blocks[b].constant + block_linear(b, y);
}

void SdpLayout::adjoint_add(int b, const RMatrix &g, RVector &out) const
{
    for (const auto &e : blocks[b].entries) {
        const double t = e.row == e.col ? g(e.row, e.row) : g(e.row, e.col) + g(e.col, e.row);
        out[e.var] += e.coef * t;
    }
}

RVector SdpLayout::expand(const RVector &y) const
{
    RVector mu = pinned_values;
    for (int i = 0; i < num_free; ++i)
        mu[program_of[i]] = y[i];
    return mu;
}

} // namespace onebit::conic::detail
