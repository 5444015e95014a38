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

#include "onebit/conic.hpp"

namespace onebit::conic::detail {

class InteriorPointQuadLin final : public QuadLinBackend {
public:
    std::string name() const override { return "ipm-qp"; }
    SolveReport solve(const QuadLinProgram &p, const SolverOptions &opt) const override;
};

class AdmmQuadLin final : public QuadLinBackend {
public:
    std::string name() const override { return "admm-qp"; }
    SolveReport solve(const QuadLinProgram &p, const SolverOptions &opt) const override;
};

class InteriorPointSdp final : public SdpBackend {
public:
    std::string name() const override { return "ipm-sdp"; }
    SolveReport solve(const SdpProgram &p, const SolverOptions &opt) const override;
};

class AdmmSdp final : public SdpBackend {
public:
    std::string name() const override { return "admm-sdp"; }
    SolveReport solve(const SdpProgram &p, const SolverOptions &opt) const override;
};

} // namespace onebit::conic::detail
