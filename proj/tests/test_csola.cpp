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

#include "fixtures.hpp"
#include "greensolve/csola.hpp"

using namespace greensolve;

TEST_CASE("ladder with a trivial potential returns the Green image",
          "[csola]") {
    const QuadGrid& grid = fixtures::small_grid();
    const GreenKernel& k = fixtures::rfl_half();
    const GreenMatrix& m = fixtures::rfl_half_small();
    const Potential v = Potential::constant(0.0);
    RadonMeasure mu = RadonMeasure::from_density(
        std::vector<double>(grid.size(), 1.0));
    mu.atoms.push_back({Vec3(0.2, 0.0, 0.0), 0.5});
    const CsolaReport rep = csola(k, grid, m, v, mu);
    const std::vector<double> gmu = apply_measure(k, grid, m, mu);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK_THAT(rep.u_limit[i], Catch::Matchers::WithinRel(gmu[i], 1e-10));
    CHECK(rep.is_solution);
    CHECK_FALSE(rep.inconclusive);
    CHECK(rep.mu_reduced.atoms.size() == 1);
}

TEST_CASE("ladder values decrease in the cutoff", "[csola]") {
    const QuadGrid& grid = fixtures::small_grid();
    const GreenKernel& k = fixtures::rfl_half();
    const GreenMatrix& m = fixtures::rfl_half_small();
    const Potential v = Potential::power_law(Vec3::Zero(), 1.5);
    const RadonMeasure mu = RadonMeasure::dirac(Vec3::Zero(), 1.0,
                                                grid.size());
    const CsolaReport rep = csola(k, grid, m, v, mu);
    REQUIRE(rep.ladder.size() >= 3);
    for (std::size_t j = 1; j < rep.ladder.size(); ++j)
        CHECK(rep.ladder[j].u_l1 <= rep.ladder[j - 1].u_l1 + 1e-12);
    CHECK(rep.vu_l1_running_max > 0.0);
    for (const auto& pt : rep.ladder)
        CHECK(pt.vu_l1 <= rep.vu_l1_running_max + 1e-12);
}

TEST_CASE("ladder limit is linear in the measure for bounded potentials",
          "[csola]") {
    const QuadGrid& grid = fixtures::small_grid();
    const GreenKernel& k = fixtures::rfl_half();
    const GreenMatrix& m = fixtures::rfl_half_small();
    const Potential v = Potential::constant(2.0);
    const RadonMeasure mu1 = RadonMeasure::from_density(
        std::vector<double>(grid.size(), 1.0));
    const RadonMeasure mu2 = RadonMeasure::from_density(
        std::vector<double>(grid.size(), 3.0));
    const CsolaReport r1 = csola(k, grid, m, v, mu1);
    const CsolaReport r2 = csola(k, grid, m, v, mu2);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK_THAT(r2.u_limit[i],
                   Catch::Matchers::WithinRel(3.0 * r1.u_limit[i], 1e-9));
}

TEST_CASE("sign-changing measures recombine linearly", "[csola]") {
    const QuadGrid& grid = fixtures::small_grid();
    const GreenKernel& k = fixtures::rfl_half();
    const GreenMatrix& m = fixtures::rfl_half_small();
    const Potential v = Potential::constant(1.0);
    std::vector<double> f(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) f[i] = grid.nodes[i].x();
    const CsolaReport rep =
        csola(k, grid, m, v, RadonMeasure::from_density(f));
    // mirror-antisymmetric data gives a mirror-antisymmetric limit
    double asym = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = 0; j < grid.size(); ++j)
            if ((grid.nodes[i] + grid.nodes[j]).norm() < 1e-12) {
                asym = std::max(asym,
                                std::abs(rep.u_limit[i] + rep.u_limit[j]));
                scale = std::max(scale, std::abs(rep.u_limit[i]));
            }
    CHECK(scale > 0.0);
    CHECK(asym < 1e-9 * scale);
}

TEST_CASE("concentration dichotomy on the medium grid", "[csola]") {
    const QuadGrid& grid = fixtures::mid_grid();
    const GreenKernel& k = fixtures::rfl_half();
    const GreenMatrix& m = fixtures::rfl_half_mid();
    const RadonMeasure mu = RadonMeasure::dirac(Vec3::Zero(), 1.0,
                                                grid.size());

    SECTION("mild singularity keeps the point mass") {
        const Potential v = Potential::power_law(Vec3::Zero(), 0.5);
        const CsolaReport rep = csola(k, grid, m, v, mu);
        REQUIRE(rep.alphas.size() == 1);
        CHECK(rep.alphas[0].consensus < 0.05);
        CHECK(rep.is_solution);
        CHECK(rep.mu_reduced.atoms.size() == 1);
    }

    SECTION("strong singularity absorbs the point mass") {
        const Potential v = Potential::power_law(Vec3::Zero(), 1.5);
        const CsolaReport rep = csola(k, grid, m, v, mu);
        REQUIRE(rep.alphas.size() == 1);
        CHECK(rep.alphas[0].consensus > 0.9);
        CHECK_FALSE(rep.is_solution);
        CHECK(rep.mu_reduced.atoms.empty());
        // the limit is (numerically) the zero solution
        const std::vector<double> gdelta = apply_measure(k, grid, m, mu);
        CHECK(detail::l1_norm(grid, rep.u_limit) <
              0.02 * detail::l1_norm(grid, gdelta));
    }
}

TEST_CASE("scalar extrapolation helpers", "[csola]") {
    // geometric sequence a - c q^j converges to a
    std::vector<double> seq;
    for (int j = 0; j < 6; ++j) seq.push_back(2.0 - std::pow(0.5, j));
    CHECK_THAT(detail::scalar_limit(seq),
               Catch::Matchers::WithinAbs(2.0, 1e-12));

    // model fit recovers the limit of L + c rho^t
    std::vector<double> rhos = {0.4, 0.2, 0.1, 0.05};
    std::vector<double> vals;
    for (double rho : rhos) vals.push_back(1.5 + 0.7 * std::pow(rho, 0.5));
    CHECK_THAT(detail::model_limit(rhos, vals, 0.5),
               Catch::Matchers::WithinAbs(1.5, 1e-12));
}
