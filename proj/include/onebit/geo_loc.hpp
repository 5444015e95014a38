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

// Full-precision localization from bistatic ranges by linear least squares,
// and the per-node one-bit range quantizer with its uplink record.

#include "onebit/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace onebit {

using Point = Eigen::Vector3d;

struct Geometry {
    std::vector<Point> nodes; // node 0 is the reference
    Point base = Point::Zero();
    bool planar = true;       // drop the z coordinate

    int num_nodes() const { return static_cast<int>(nodes.size()); }
    int dim() const { return planar ? 2 : 3; }
    void validate() const;
};

// r_m = |node_m - target| + |base - target|.
RVector true_ranges(const Geometry &g, const Point &target);

struct LinearSystem {
    RMatrix g; // (M-1) x (dim+1)
    RVector h;
};

LinearSystem build_G_h(const Geometry &g, const RVector &ranges);

// theta = [target - node_0 (dim entries), d_1].
struct LsSolution {
    RVector theta;
    Point target = Point::Zero();
};

LsSolution solve_ls(const LinearSystem &sys, const Geometry &g);
// Convenience: build and solve.
LsSolution localize_full_precision(const Geometry &g, const RVector &ranges);

double quantize_range(double range, double threshold);

inline constexpr int kThresholdLevels = 8;

struct OneBitRangeData {
    std::vector<int> w;          // +-1
    RVector lambda;              // meters
    std::vector<int> codes;      // lambda_m = (code + 1) r_max / 8
    double r_max = 4000.0;

    int size() const { return static_cast<int>(w.size()); }
    void validate() const;
};

struct RangeThresholds {
    RVector lambda;
    std::vector<int> codes;
};

double threshold_level(int code, double r_max);
RangeThresholds draw_range_thresholds(int num_nodes, double r_max, std::uint64_t rng_seed);

OneBitRangeData quantize_ranges(const RVector &ranges, const RangeThresholds &th, double r_max);

// Uplink record: one nibble per node, bit 0 = sign (1 means +1), bits 1..3 =
// threshold code. Node m sits in byte m/2, low nibble for even m.
std::vector<std::uint8_t> pack_uplink(const OneBitRangeData &d);
OneBitRangeData unpack_uplink(const std::vector<std::uint8_t> &bytes, int num_nodes, double r_max);
std::string uplink_json(const OneBitRangeData &d);

} // namespace onebit
