// Copyright 2026 the greensolve authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "greensolve/gauss.hpp"

using namespace greensolve;

TEST_CASE("Gauss-Legendre integrates polynomials exactly", "[gauss]") {
    for (int n : {2, 5, 8, 16}) {
        const QuadratureRule rule = gauss_legendre(n);
        // exact for degree up to 2n-1 on (-1, 1)
        for (int deg = 0; deg <= 2 * n - 1; ++deg) {
            double acc = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i)
                acc += rule.weights[i] * std::pow(rule.nodes[i], deg);
            const double exact = deg % 2 == 1 ? 0.0 : 2.0 / (deg + 1);
            CHECK_THAT(acc, Catch::Matchers::WithinAbs(exact, 1e-13));
        }
    }
}

TEST_CASE("Gauss-Legendre on an interval", "[gauss]") {
    const QuadratureRule rule = gauss_legendre(8, 0.25, 0.75);
    double acc = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        CHECK(rule.nodes[i] > 0.25);
        CHECK(rule.nodes[i] < 0.75);
        acc += rule.weights[i] * rule.nodes[i] * rule.nodes[i];
        mass += rule.weights[i];
    }
    CHECK_THAT(mass, Catch::Matchers::WithinRel(0.5, 1e-14));
    // int_{1/4}^{3/4} x^2 dx
    CHECK_THAT(acc, Catch::Matchers::WithinRel((0.421875 - 0.015625) / 3.0,
                                               1e-13));
}

TEST_CASE("power-weight rule integrates x^(b-1) moments", "[gauss]") {
    // rule for int_0^1 x^(b-1) f(x) dx; exact moments 1/(b+k)
    for (double b : {0.3, 0.5, 1.0, 1.2}) {
        const QuadratureRule rule = gauss_power_weight(12, b);
        for (int k = 0; k <= 10; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i)
                acc += rule.weights[i] * std::pow(rule.nodes[i], k);
            CHECK_THAT(acc, Catch::Matchers::WithinRel(1.0 / (b + k), 1e-12));
        }
    }
}

TEST_CASE("power-weight rule handles a non-polynomial integrand", "[gauss]") {
    // int_0^1 x^(-1/2) exp(x) dx = sqrt(pi) * erfi(1); frozen reference
    // from 30-digit adaptive quadrature
    const QuadratureRule rule = gauss_power_weight(24, 0.5);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * std::exp(rule.nodes[i]);
    CHECK_THAT(acc, Catch::Matchers::WithinRel(2.9253034918143632, 1e-12));
}
