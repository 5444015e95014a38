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

#include "onebit/crb.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace onebit {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// Gradient of t_m = (r_m - lambda_m) / upsilon_m with respect to q.
RVector t_gradient(const CrbParams &q, const Geometry &g, const RVector &lambda, int m, double &t)
{
    const int dim = g.dim();
    const Point diff = q.target - g.nodes[m];
    const double dm = diff.head(dim).norm();
    if (!(dm > 0.0))
        throw Error("target coincides with node " + std::to_string(m));
    const double ups = q.upsilon[m];
    const double r = dm + q.d0;
    t = (r - lambda[m]) / ups;
    RVector grad = RVector::Zero(crb_dim(g));
    for (int k = 0; k < dim; ++k)
        grad[k] = diff[k] / (dm * ups);
    grad[dim] = 1.0 / ups;
    grad[dim + 1 + m] = -(r - lambda[m]) / (ups * ups);
    return grad;
}

} // namespace

void CrbParams::validate(const Geometry &g) const
{
    if (upsilon.size() != g.num_nodes())
        throw Error("one spread per node required");
    for (double u : upsilon)
        if (!(u > 0.0))
            throw Error("range-error spreads must be positive");
}

int crb_dim(const Geometry &g)
{
    return g.dim() + 1 + g.num_nodes();
}

RVector to_vector(const CrbParams &q, const Geometry &g)
{
    const int dim = g.dim();
    RVector v(crb_dim(g));
    v.head(dim) = q.target.head(dim);
    v[dim] = q.d0;
    v.tail(g.num_nodes()) = q.upsilon;
    return v;
}

CrbParams from_vector(const RVector &v, const Geometry &g)
{
    if (v.size() != crb_dim(g))
        throw Error("parameter vector has the wrong dimension");
    const int dim = g.dim();
    CrbParams q;
    q.target.head(dim) = v.head(dim);
    q.d0 = v[dim];
    q.upsilon = v.tail(g.num_nodes());
    return q;
}

double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double log_normal_cdf(double x)
{
    if (x > 0.0)
        return std::log1p(-normal_cdf(-x));
    if (x > -30.0)
        return std::log(normal_cdf(x));
    // Asymptotic series of the Gaussian lower tail.
    const double x2 = x * x;
    const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
    return -0.5 * x2 - std::log(-x) - kLogSqrt2Pi + std::log(series);
}

double inverse_mills(double x)
{
    if (x > -30.0)
        return std::exp(-0.5 * x * x - kLogSqrt2Pi - log_normal_cdf(x));
    const double x2 = x * x;
    const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
    return -x / series;
}

double loglik(const std::vector<int> &w, const CrbParams &q, const Geometry &g, const RVector &lambda)
{
    q.validate(g);
    double acc = 0.0;
    for (int m = 0; m < g.num_nodes(); ++m) {
        const double dm = (q.target - g.nodes[m]).head(g.dim()).norm();
        acc += log_normal_cdf(w[m] * (dm + q.d0 - lambda[m]) / q.upsilon[m]);
    }
    return acc;
}

RVector score(const std::vector<int> &w, const CrbParams &q, const Geometry &g, const RVector &lambda)
{
    q.validate(g);
    RVector s = RVector::Zero(crb_dim(g));
    for (int m = 0; m < g.num_nodes(); ++m) {
        double t = 0.0;
        const RVector grad = t_gradient(q, g, lambda, m, t);
        s += (w[m] * inverse_mills(w[m] * t)) * grad;
    }
    return s;
}

RMatrix fim_node(const CrbParams &q, const Geometry &g, const RVector &lambda, int m)
{
    double t = 0.0;
    const RVector grad = t_gradient(q, g, lambda, m, t);
    const double phi = std::exp(-0.5 * t * t - kLogSqrt2Pi);
    // E over w of (phi / Phi(w t))^2 = phi^2 (1 / Phi(t) + 1 / Phi(-t)).
    const double c = phi * (inverse_mills(t) + inverse_mills(-t));
    return c * grad * grad.transpose();
}

RMatrix fim(const CrbParams &q, const Geometry &g, const RVector &lambda)
{
    q.validate(g);
    if (lambda.size() != g.num_nodes())
        throw Error("one threshold per node required");
    const int n = crb_dim(g);
    RMatrix info = RMatrix::Zero(n, n);
    for (int m = 0; m < g.num_nodes(); ++m)
        info += fim_node(q, g, lambda, m);
    return 0.5 * (info + info.transpose());
}

double normalized_root_crb(const RMatrix &info, const CrbParams &q, const Geometry &g, CrbBlock block)
{
    const int dim = g.dim();
    const int n = block == CrbBlock::full ? crb_dim(g) : dim + 1;
    if (info.rows() < n || info.cols() < n)
        throw Error("information matrix too small");
    const RMatrix sub = info.topLeftCorner(n, n);
    const Eigen::SelfAdjointEigenSolver<RMatrix> eig(sub);
    const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (!(eig.eigenvalues().minCoeff() > 1e-12 * top))
        throw Error("Fisher information is singular; the CRB does not exist");
    const RMatrix inv = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
                        eig.eigenvectors().transpose();
    const double norm2 = q.target.head(2).squaredNorm();
    if (!(norm2 > 0.0))
        throw Error("normalized CRB undefined for a target at the origin");
    return std::sqrt((inv(0, 0) + inv(1, 1)) / norm2);
}

} // namespace onebit
