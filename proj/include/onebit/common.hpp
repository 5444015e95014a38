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

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace onebit {

using cplx = std::complex<double>;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;

// Selects between the OpenMP kernel and the serial reference it is tested against.
enum class Exec { serial, parallel };

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when a linear system that must be full column rank is not.
class RankDeficientError : public Error {
public:
    RankDeficientError(const std::string &what, int column)
        : Error(what), column_(column) {}
    int column() const { return column_; }

private:
    int column_;
};

// Sparse recovery produced fewer than two usable path components.
class NoDetectionError : public Error {
public:
    using Error::Error;
};

// Normalized sinc, sin(pi u)/(pi u) with sinc(0) = 1.
inline double sinc(double u)
{
    if (std::abs(u) < 1e-12)
        return 1.0;
    const double x = kPi * u;
    return std::sin(x) / x;
}

// sgn with sgn(0) = +1.
inline double sign_pos(double x) { return x >= 0.0 ? 1.0 : -1.0; }

// Derives a per-trial seed from a master seed (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace onebit
