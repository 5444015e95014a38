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

#include "onebit/geo_loc.hpp"

#include <json.hpp>

#include <Eigen/QR>

#include <random>

namespace onebit {

void Geometry::validate() const
{
    const int need = planar ? 4 : 5;
    if (num_nodes() < need)
        throw Error("geometry needs at least " + std::to_string(need) + " nodes in " +
                    (planar ? "planar" : "3-D") + " mode");
}

RVector true_ranges(const Geometry &g, const Point &target)
{
    const double d0 = (g.base - target).norm();
    RVector r(g.num_nodes());
    for (int m = 0; m < g.num_nodes(); ++m)
        r[m] = (g.nodes[m] - target).norm() + d0;
    return r;
}

LinearSystem build_G_h(const Geometry &g, const RVector &ranges)
{
    const int m_count = g.num_nodes();
    const int dim = g.dim();
    if (m_count < dim + 2)
        throw Error("build_G_h needs M >= dim + 2 nodes");
    if (ranges.size() != m_count)
        throw Error("range vector length differs from node count");
    LinearSystem s{RMatrix(m_count - 1, dim + 1), RVector(m_count - 1)};
    for (int m = 1; m < m_count; ++m) {
        const Point d = g.nodes[m] - g.nodes[0];
        const double dr = ranges[m] - ranges[0];
        for (int k = 0; k < dim; ++k)
            s.g(m - 1, k) = d[k];
        s.g(m - 1, dim) = dr;
        s.h[m - 1] = 0.5 * (d.head(dim).squaredNorm() - dr * dr);
    }
    return s;
}

LsSolution solve_ls(const LinearSystem &sys, const Geometry &g)
{
    Eigen::ColPivHouseholderQR<RMatrix> qr(sys.g);
    qr.setThreshold(1e-10);
    if (qr.rank() < sys.g.cols()) {
        static const char *names[] = {"x", "y", "z", "d1"};
        const int dim = g.dim();
        const int col = static_cast<int>(qr.colsPermutation().indices()[qr.rank()]);
        const char *label = col == dim ? names[3] : names[col];
        throw RankDeficientError(std::string("G is rank deficient in column '") + label + "'", col);
    }
    LsSolution s;
    s.theta = qr.solve(sys.h);
    s.target = g.nodes[0];
    if (g.planar)
        s.target.z() = 0.0;
    for (int k = 0; k < g.dim(); ++k)
        s.target[k] += s.theta[k];
    return s;
}

LsSolution localize_full_precision(const Geometry &g, const RVector &ranges)
{
    return solve_ls(build_G_h(g, ranges), g);
}

double quantize_range(double range, double threshold)
{
    return sign_pos(range - threshold);
}

void OneBitRangeData::validate() const
{
    const int m = size();
    if (lambda.size() != m || static_cast<int>(codes.size()) != m)
        throw Error("one-bit range record has inconsistent lengths");
    for (int i = 0; i < m; ++i) {
        if (w[i] != 1 && w[i] != -1)
            throw Error("one-bit range signs must be +-1");
        if (codes[i] < 0 || codes[i] >= kThresholdLevels)
            throw Error("threshold code out of range");
        if (std::abs(lambda[i] - threshold_level(codes[i], r_max)) > 1e-9 * r_max)
            throw Error("threshold does not match its code");
    }
}

double threshold_level(int code, double r_max)
{
    return (code + 1) * r_max / kThresholdLevels;
}

RangeThresholds draw_range_thresholds(int num_nodes, double r_max, std::uint64_t rng_seed)
{
    if (!(r_max > 0.0))
        throw Error("r_max must be positive");
    std::mt19937_64 rng(rng_seed);
    std::uniform_int_distribution<int> pick(0, kThresholdLevels - 1);
    RangeThresholds t{RVector(num_nodes), std::vector<int>(num_nodes)};
    for (int m = 0; m < num_nodes; ++m) {
        t.codes[m] = pick(rng);
        t.lambda[m] = threshold_level(t.codes[m], r_max);
    }
    return t;
}

OneBitRangeData quantize_ranges(const RVector &ranges, const RangeThresholds &th, double r_max)
{
    if (ranges.size() != th.lambda.size())
        throw Error("ranges and thresholds differ in length");
    OneBitRangeData d;
    d.r_max = r_max;
    d.lambda = th.lambda;
    d.codes = th.codes;
    d.w.resize(ranges.size());
    for (Eigen::Index m = 0; m < ranges.size(); ++m)
        d.w[m] = static_cast<int>(quantize_range(ranges[m], th.lambda[m]));
    return d;
}

std::vector<std::uint8_t> pack_uplink(const OneBitRangeData &d)
{
    d.validate();
    std::vector<std::uint8_t> out((d.size() + 1) / 2, 0);
    for (int m = 0; m < d.size(); ++m) {
        const unsigned nibble = (d.w[m] > 0 ? 1u : 0u) | (static_cast<unsigned>(d.codes[m]) << 1);
        out[m / 2] |= static_cast<std::uint8_t>(nibble << (4 * (m % 2)));
    }
    return out;
}

OneBitRangeData unpack_uplink(const std::vector<std::uint8_t> &bytes, int num_nodes, double r_max)
{
    if (static_cast<int>(bytes.size()) * 2 < num_nodes)
        throw Error("uplink record too short");
    OneBitRangeData d;
    d.r_max = r_max;
    d.w.resize(num_nodes);
    d.codes.resize(num_nodes);
    d.lambda.resize(num_nodes);
    for (int m = 0; m < num_nodes; ++m) {
        const unsigned nibble = (bytes[m / 2] >> (4 * (m % 2))) & 0xFu;
        d.w[m] = (nibble & 1u) ? 1 : -1;
        d.codes[m] = static_cast<int>(nibble >> 1);
        d.lambda[m] = threshold_level(d.codes[m], r_max);
    }
    return d;
}

std::string uplink_json(const OneBitRangeData &d)
{
    nlohmann::json j;
    j["r_max"] = d.r_max;
    j["nodes"] = nlohmann::json::array();
    for (int m = 0; m < d.size(); ++m)
        j["nodes"].push_back({{"w", d.w[m]}, {"code", d.codes[m]}, {"lambda", d.lambda[m]}});
    return j.dump();
}

} // namespace onebit
