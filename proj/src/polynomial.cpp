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

#include "onebit/polynomial.hpp"

#include <algorithm>
#include <numeric>

namespace onebit {

Polynomial Polynomial::constant(int num_vars, double c)
{
    Polynomial p(num_vars);
    p.add_term(Exponent(num_vars, 0), c);
    return p;
}

Polynomial Polynomial::variable(int num_vars, int i)
{
    if (i < 0 || i >= num_vars)
        throw Error("polynomial variable index out of range");
    Polynomial p(num_vars);
    Exponent e(num_vars, 0);
    e[i] = 1;
    p.add_term(e, 1.0);
    return p;
}

void Polynomial::add_term(const Exponent &e, double c)
{
    if (static_cast<int>(e.size()) != num_vars_)
        throw Error("exponent length does not match polynomial variable count");
    if (c == 0.0)
        return;
    auto it = terms_.find(e);
    if (it == terms_.end()) {
        terms_.emplace(e, c);
        return;
    }
    it->second += c;
    if (it->second == 0.0)
        terms_.erase(it);
}

double Polynomial::coefficient(const Exponent &e) const
{
    auto it = terms_.find(e);
    return it == terms_.end() ? 0.0 : it->second;
}

int Polynomial::degree() const
{
    int d = 0;
    for (const auto &[e, c] : terms_)
        d = std::max(d, std::accumulate(e.begin(), e.end(), 0));
    return d;
}

int Polynomial::degree_in(int var) const
{
    int d = 0;
    for (const auto &[e, c] : terms_)
        d = std::max(d, e[var]);
    return d;
}

double Polynomial::evaluate(const RVector &u) const
{
    if (u.size() != num_vars_)
        throw Error("evaluation point has the wrong dimension");
    double acc = 0.0;
    for (const auto &[e, c] : terms_) {
        double t = c;
        for (int i = 0; i < num_vars_; ++i)
            for (int k = 0; k < e[i]; ++k)
                t *= u[i];
        acc += t;
    }
    return acc;
}

Polynomial &Polynomial::operator+=(const Polynomial &o)
{
    if (o.num_vars_ != num_vars_)
        throw Error("polynomial variable counts differ");
    for (const auto &[e, c] : o.terms_)
        add_term(e, c);
    return *this;
}

Polynomial &Polynomial::operator-=(const Polynomial &o)
{
    if (o.num_vars_ != num_vars_)
        throw Error("polynomial variable counts differ");
    for (const auto &[e, c] : o.terms_)
        add_term(e, -c);
    return *this;
}

Polynomial &Polynomial::operator*=(double c)
{
    if (c == 0.0) {
        terms_.clear();
        return *this;
    }
    for (auto &kv : terms_)
        kv.second *= c;
    return *this;
}

Polynomial operator*(const Polynomial &a, const Polynomial &b)
{
    if (a.num_vars_ != b.num_vars_)
        throw Error("polynomial variable counts differ");
    Polynomial out(a.num_vars_);
    Exponent e(a.num_vars_);
    for (const auto &[ea, ca] : a.terms_)
        for (const auto &[eb, cb] : b.terms_) {
            for (int i = 0; i < a.num_vars_; ++i)
                e[i] = ea[i] + eb[i];
            out.add_term(e, ca * cb);
        }
    return out;
}

namespace {

// Exponents of exact total degree d, u_1-heavy first.
void fill_degree(int num_vars, int d, int var, Exponent &cur, std::vector<Exponent> &out)
{
    if (var == num_vars - 1) {
        cur[var] = d;
        out.push_back(cur);
        cur[var] = 0;
        return;
    }
    for (int k = d; k >= 0; --k) {
        cur[var] = k;
        fill_degree(num_vars, d - k, var + 1, cur, out);
    }
    cur[var] = 0;
}

} // namespace

std::vector<Exponent> monomial_basis(int num_vars, int degree)
{
    if (num_vars < 0 || degree < 0)
        throw Error("monomial_basis needs nonnegative arguments");
    std::vector<Exponent> out;
    if (num_vars == 0) {
        out.emplace_back();
        return out;
    }
    Exponent cur(num_vars, 0);
    for (int d = 0; d <= degree; ++d)
        fill_degree(num_vars, d, 0, cur, out);
    return out;
}

long long binomial(int n, int k)
{
    if (k < 0 || k > n)
        return 0;
    k = std::min(k, n - k);
    long long r = 1;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

} // namespace onebit
