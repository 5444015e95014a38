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

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace onebit;

namespace {

struct Instance {
    Geometry g;
    CrbParams q;
    RVector lambda;
};

// Thresholds within a few spreads of the true ranges so every node carries information.
Instance random_instance(int m, std::uint64_t seed, bool planar = true)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(-800.0, 800.0);
    std::uniform_real_distribution<double> spread(5.0, 30.0);
    std::uniform_real_distribution<double> offset(-1.5, 1.5);
    Instance in;
    in.g.planar = planar;
    for (int i = 0; i < m; ++i)
        in.g.nodes.emplace_back(pos(rng), pos(rng), planar ? 0.0 : pos(rng) * 0.1);
    in.q.target = Point(pos(rng), pos(rng), planar ? 0.0 : 20.0);
    in.q.d0 = 300.0 + std::abs(pos(rng));
    in.q.upsilon.resize(m);
    in.lambda.resize(m);
    for (int i = 0; i < m; ++i) {
        in.q.upsilon[i] = spread(rng);
        const double r = (in.q.target - in.g.nodes[i]).head(in.g.dim()).norm() + in.q.d0;
        in.lambda[i] = r + offset(rng) * in.q.upsilon[i];
    }
    return in;
}

std::vector<int> draw_signs(const Instance &in, std::mt19937_64 &rng)
{
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<int> w(in.g.num_nodes());
    for (int i = 0; i < in.g.num_nodes(); ++i) {
        const double r = (in.q.target - in.g.nodes[i]).head(in.g.dim()).norm() + in.q.d0;
        const double p = normal_cdf((r - in.lambda[i]) / in.q.upsilon[i]);
        w[i] = uni(rng) < p ? 1 : -1;
    }
    return w;
}

// log Phi(x) = log phi(x) + log int_0^inf exp(x s - s^2 / 2) ds, composite Simpson.
double log_cdf_quadrature(double x)
{
    const double upper = std::max(x, 0.0) + 40.0;
    const int n = 400000;
    const double h = upper / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double s = i * h;
        const double f = std::exp(x * s - 0.5 * s * s);
        acc += f * ((i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    acc *= h / 3.0;
    return -0.5 * x * x - 0.5 * std::log(2.0 * kPi) + std::log(acc);
}

} // namespace

TEST(Crb, LoglikAtThresholdIsHalfPerNode)
{
    Instance in = random_instance(7, 1);
    for (int i = 0; i < 7; ++i)
        in.lambda[i] = (in.q.target - in.g.nodes[i]).head(2).norm() + in.q.d0;
    const std::vector<int> w = {1, -1, 1, 1, -1, -1, 1};
    EXPECT_NEAR(loglik(w, in.q, in.g, in.lambda), 7.0 * std::log(0.5), 1e-12);
}

TEST(Crb, LoglikTendsToZeroFromBelow)
{
    Instance in = random_instance(4, 2);
    std::vector<int> w(4);
    for (int i = 0; i < 4; ++i) {
        const double r = (in.q.target - in.g.nodes[i]).head(2).norm() + in.q.d0;
        w[i] = r >= in.lambda[i] ? 1 : -1;
        in.lambda[i] = r - w[i] * 8.0 * in.q.upsilon[i];
    }
    const double ll = loglik(w, in.q, in.g, in.lambda);
    EXPECT_LT(ll, 0.0);
    EXPECT_GT(ll, -1e-13);
}

TEST(Crb, LogCdfMatchesQuadrature)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-40.0, 6.0);
    std::vector<double> xs = {-30.1, -29.9, 9.0};
    while (xs.size() < 33)
        xs.push_back(uni(rng));
    for (double x : xs) {
        const double ref = log_cdf_quadrature(x);
        EXPECT_NEAR(log_normal_cdf(x), ref, 1e-10 * std::max(1.0, std::abs(ref))) << x;
    }
    EXPECT_NEAR(inverse_mills(-30.0 - 1e-9), inverse_mills(-30.0 + 1e-9), 1e-7);
}

TEST(Crb, ScoreMatchesFiniteDifferences)
{
    std::mt19937_64 rng(4);
    for (int k = 0; k < 50; ++k) {
        const Instance in = random_instance(4 + k % 5, 100 + k, k % 3 == 0 ? false : true);
        const std::vector<int> w = draw_signs(in, rng);
        const RVector an = score(w, in.q, in.g, in.lambda);
        const RVector q0 = to_vector(in.q, in.g);
        RVector fd(q0.size());
        for (Eigen::Index i = 0; i < q0.size(); ++i) {
            const double h = 1e-5 * std::max(1.0, std::abs(q0[i]));
            RVector qp = q0, qm = q0;
            qp[i] += h;
            qm[i] -= h;
            fd[i] = (loglik(w, from_vector(qp, in.g), in.g, in.lambda) -
                     loglik(w, from_vector(qm, in.g), in.g, in.lambda)) / (2.0 * h);
        }
        EXPECT_LE((fd - an).cwiseAbs().maxCoeff(), 1e-5 * an.cwiseAbs().maxCoeff()) << "instance " << k;
    }
}

TEST(Crb, SymmetricScenarioHasNoPositionScore)
{
    Instance in;
    const int m = 8;
    for (int i = 0; i < m; ++i) {
        const double a = 2.0 * kPi * i / m;
        in.g.nodes.emplace_back(500.0 * std::cos(a), 500.0 * std::sin(a), 0.0);
    }
    in.q.target = Point::Zero();
    in.q.d0 = 400.0;
    in.q.upsilon = RVector::Constant(m, 10.0);
    in.lambda = RVector::Constant(m, 905.0);
    const std::vector<int> w(m, -1);
    const RVector s = score(w, in.q, in.g, in.lambda);
    EXPECT_NEAR(s[0], 0.0, 1e-12 * s.cwiseAbs().maxCoeff());
    EXPECT_NEAR(s[1], 0.0, 1e-12 * s.cwiseAbs().maxCoeff());
    EXPECT_GT(std::abs(s[2]), 0.0);
}

TEST(Crb, LargeSpreadRemovesNodeInformation)
{
    Instance in = random_instance(5, 5);
    const RMatrix before = fim_node(in.q, in.g, in.lambda, 2);
    in.q.upsilon[2] = 1e9;
    const RMatrix after = fim_node(in.q, in.g, in.lambda, 2);
    EXPECT_GT(before.norm(), 1e-6);
    EXPECT_LT(after.norm(), 1e-15);
}

// Entries of the analytic FIM that are at least 1% of the trace, compared with mc.
int compare_entries(const RMatrix &info, const RMatrix &mc, double rel)
{
    int checked = 0;
    for (Eigen::Index i = 0; i < info.rows(); ++i)
        for (Eigen::Index j = 0; j < info.cols(); ++j)
            if (std::abs(info(i, j)) >= 0.01 * info.trace()) {
                ++checked;
                EXPECT_NEAR(mc(i, j), info(i, j), rel * std::abs(info(i, j))) << i << "," << j;
            }
    return checked;
}

TEST(Crb, FimMatchesMonteCarloPerNodeOuterProducts)
{
    // Nodes are independent, so E[s s^T] = sum_m E[s_m s_m^T]; averaging the
    // per-node products avoids the zero-mean cross-node noise.
    const Instance in = random_instance(6, 6);
    const RMatrix info = fim(in.q, in.g, in.lambda);
    const int dim = in.g.dim();
    std::mt19937_64 rng(7);
    const int n = 100000;
    RMatrix mc = RMatrix::Zero(info.rows(), info.cols());
    for (int k = 0; k < n; ++k) {
        const std::vector<int> w = draw_signs(in, rng);
        for (int m = 0; m < in.g.num_nodes(); ++m) {
            Geometry one;
            one.nodes = {in.g.nodes[m]};
            CrbParams q1 = in.q;
            q1.upsilon = RVector::Constant(1, in.q.upsilon[m]);
            const RVector s1 = score({w[m]}, q1, one, RVector::Constant(1, in.lambda[m]));
            RVector s = RVector::Zero(info.rows());
            s.head(dim + 1) = s1.head(dim + 1);
            s[dim + 1 + m] = s1[dim + 1];
            mc += s * s.transpose();
        }
    }
    mc /= n;
    EXPECT_GT(compare_entries(info, mc, 0.05), 6);
}

TEST(Crb, FimMatchesMonteCarloOuterProduct)
{
    // The plain estimator has ~5% standard error on the smallest checked
    // entries at 1e5 draws, so it runs at 2e6 draws against a 1% tolerance.
    const Instance in = random_instance(6, 6);
    const RMatrix info = fim(in.q, in.g, in.lambda);
    std::mt19937_64 rng(8);
    const int n = 2000000;
    RMatrix mc = RMatrix::Zero(info.rows(), info.cols());
    for (int k = 0; k < n; ++k) {
        const RVector s = score(draw_signs(in, rng), in.q, in.g, in.lambda);
        mc.selfadjointView<Eigen::Lower>().rankUpdate(s);
    }
    mc = mc.selfadjointView<Eigen::Lower>();
    mc /= n;
    EXPECT_GT(compare_entries(info, mc, 0.01), 6);
}

TEST(Crb, FimSymmetricPsdAndAdditive)
{
    for (int k = 0; k < 10; ++k) {
        const Instance in = random_instance(5 + k, 200 + k, k % 2 == 0);
        const RMatrix info = fim(in.q, in.g, in.lambda);
        EXPECT_EQ(info, info.transpose());
        const Eigen::SelfAdjointEigenSolver<RMatrix> eig(info);
        EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-9 * info.trace());
        RMatrix sum = RMatrix::Zero(info.rows(), info.cols());
        for (int m = 0; m < in.g.num_nodes(); ++m)
            sum += fim_node(in.q, in.g, in.lambda, m);
        EXPECT_LE((sum - info).cwiseAbs().maxCoeff(), 1e-12 * info.cwiseAbs().maxCoeff());
        EXPECT_EQ(info.rows(), in.g.num_nodes() + (k % 2 == 0 ? 3 : 4));
    }
}

TEST(Crb, SpreadBlockIsDiagonal)
{
    const Instance in = random_instance(6, 8);
    const RMatrix info = fim(in.q, in.g, in.lambda);
    for (int i = 3; i < info.rows(); ++i)
        for (int j = 3; j < info.cols(); ++j)
            if (i != j)
                EXPECT_EQ(info(i, j), 0.0);
}

TEST(Crb, LargerSpreadLowersInformationNearThreshold)
{
    Instance in = random_instance(6, 9);
    for (int i = 0; i < 6; ++i) {
        const double r = (in.q.target - in.g.nodes[i]).head(2).norm() + in.q.d0;
        in.lambda[i] = r + 0.8 * in.q.upsilon[i];
    }
    const double before = fim(in.q, in.g, in.lambda)(0, 0);
    in.q.upsilon *= 2.0;
    EXPECT_LT(fim(in.q, in.g, in.lambda)(0, 0), before);
}

TEST(Crb, NormalizedCrbOfScaledIdentity)
{
    Geometry g;
    for (int i = 0; i < 4; ++i)
        g.nodes.emplace_back(i * 100.0, 50.0, 0.0);
    CrbParams q;
    q.target = Point(300.0, -400.0, 0.0);
    q.upsilon = RVector::Constant(4, 1.0);
    const double c = 2.5;
    const RMatrix info = c * RMatrix::Identity(crb_dim(g), crb_dim(g));
    EXPECT_NEAR(normalized_root_crb(info, q, g), std::sqrt(2.0 / c) / 500.0, 1e-15);
    EXPECT_NEAR(normalized_root_crb(info, q, g, CrbBlock::full), std::sqrt(2.0 / c) / 500.0, 1e-15);
}

TEST(Crb, NormalizedCrbMatchesNumericInverse)
{
    const Instance in = random_instance(9, 10);
    const RMatrix info = fim(in.q, in.g, in.lambda);
    const RMatrix inv = info.topLeftCorner(3, 3).inverse();
    const double ref = std::sqrt((inv(0, 0) + inv(1, 1)) / in.q.target.head(2).squaredNorm());
    EXPECT_NEAR(normalized_root_crb(info, in.q, in.g), ref, 1e-10 * ref);
}

TEST(Crb, FullFimIsSingular)
{
    // Rank is at most M while the dimension is M + 3.
    const Instance in = random_instance(9, 11);
    EXPECT_THROW(normalized_root_crb(fim(in.q, in.g, in.lambda), in.q, in.g, CrbBlock::full), Error);
}

TEST(Crb, TooFewNodesIsSingular)
{
    const Instance in = random_instance(2, 12);
    EXPECT_THROW(normalized_root_crb(fim(in.q, in.g, in.lambda), in.q, in.g), Error);
}

TEST(Crb, MoreNodesTightenBound)
{
    const Instance small = random_instance(20, 13);
    Instance big = small;
    const Instance extra = random_instance(80, 14);
    for (int i = 0; i < 80; ++i) {
        big.g.nodes.push_back(extra.g.nodes[i]);
        const double r = (big.q.target - extra.g.nodes[i]).head(2).norm() + big.q.d0;
        big.lambda.conservativeResize(big.lambda.size() + 1);
        big.lambda[big.lambda.size() - 1] = r + (extra.lambda[i] - (extra.q.target - extra.g.nodes[i]).head(2).norm() - extra.q.d0);
    }
    big.q.upsilon.conservativeResize(100);
    big.q.upsilon.tail(80) = extra.q.upsilon;
    EXPECT_LT(normalized_root_crb(fim(big.q, big.g, big.lambda), big.q, big.g),
              normalized_root_crb(fim(small.q, small.g, small.lambda), small.q, small.g));
}

TEST(Crb, CoincidentTargetThrows)
{
    Instance in = random_instance(4, 15);
    in.q.target = in.g.nodes[1];
    EXPECT_THROW(fim(in.q, in.g, in.lambda), Error);
    in.q.target = Point(1.0, 2.0, 0.0);
    in.q.upsilon[0] = 0.0;
    EXPECT_THROW(fim(in.q, in.g, in.lambda), Error);
}
