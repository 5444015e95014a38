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

// Sparse multivariate polynomials keyed by exponent tuples, plus the
// graded-lex monomial basis used by the moment relaxation.

#include "onebit/common.hpp"

#include <map>
#include <vector>

namespace onebit {

using Exponent = std::vector<int>;

class Polynomial {
public:
    explicit Polynomial(int num_vars = 0) : num_vars_(num_vars) {}

    static Polynomial constant(int num_vars, double c);
    // The single variable u_i.
    static Polynomial variable(int num_vars, int i);

    int num_vars() const { return num_vars_; }
    const std::map<Exponent, double> &terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }

    // Adds c * u^e; entries that cancel to zero are erased.
    void add_term(const Exponent &e, double c);
    double coefficient(const Exponent &e) const;

    int degree() const;
    int degree_in(int var) const;
    double evaluate(const RVector &u) const;

    Polynomial &operator+=(const Polynomial &o);
    Polynomial &operator-=(const Polynomial &o);
    Polynomial &operator*=(double c);

    friend Polynomial operator+(Polynomial a, const Polynomial &b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial &b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, double c) { return a *= c; }
    friend Polynomial operator*(double c, Polynomial a) { return a *= c; }
    friend Polynomial operator*(const Polynomial &a, const Polynomial &b);

private:
    int num_vars_;
    std::map<Exponent, double> terms_;
};

// All exponents in `num_vars` variables of total degree <= degree, ordered by
// degree and then lexicographically with u_1 leading: 1, u1, u2, u1^2, u1u2, u2^2.
std::vector<Exponent> monomial_basis(int num_vars, int degree);

// binomial(n, k) as a double-checked integer.
long long binomial(int n, int k);

} // namespace onebit
