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
#include "greensolve/diagnostics.hpp"

using namespace greensolve;

TEST_CASE("point interpolation is exact on nodes and sane between them",
          "[diagnostics]") {
    const QuadGrid& grid = fixtures::small_grid();
    std::vector<double> field(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        field[i] = 1.0 - grid.nodes[i].squaredNorm();
    CHECK(detail::interpolate_at(grid, field, grid.nodes[5]) == field[5]);
    const double mid = detail::interpolate_at(grid, field, Vec3(0.3, 0.1, 0.0));
    CHECK_THAT(mid, Catch::Matchers::WithinAbs(0.9, 0.1));
}

TEST_CASE("kernel column with no potential is the plain Green column",
          "[diagnostics]") {
    const QuadGrid& grid = fixtures::small_grid();
    const GreenKernel& k = fixtures::rfl_half();
    const GreenMatrix& m = fixtures::rfl_half_small();
    const Vec3 x(0.25, 0.0, 0.1);
    const std::vector<double> col =
        gv_column(k, grid, m, Potential::constant(0.0), x);
    const std::vector<double> ref = apply_measure(
        k, grid, m, RadonMeasure::dirac(x, 1.0, grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK_THAT(col[i], Catch::Matchers::WithinRel(ref[i], 1e-10));
    CHECK_THROWS_AS(gv_column(k, grid, m, Potential::constant(0.0),
                              Vec3(1.0, 0.0, 0.0)),
                    std::domain_error);
}

TEST_CASE("kernel columns are symmetric between interior points",
          "[diagnostics]") {
    const QuadGrid& grid = fixtures::mid_grid();
    const GreenKernel& k = fixtures::rfl_half();
    const GreenMatrix& m = fixtures::rfl_half_mid();
    const Potential v = Potential::constant(1.0);
    const Vec3 x(0.3, 0.0, 0.0);
    const Vec3 y(-0.2, 0.25, 0.0);
    const std::vector<double> col_x = gv_column(k, grid, m, v, x);
    const std::vector<double> col_y = gv_column(k, grid, m, v, y);
    const double xy = detail::interpolate_at(grid, col_x, y);
    const double yx = detail::interpolate_at(grid, col_y, x);
    CHECK_THAT(xy, Catch::Matchers::WithinRel(yx, 0.05));
}

TEST_CASE("maximum-principle field shrinks when the potential grows",
          "[diagnostics]") {
    const QuadGrid& grid = fixtures::small_grid();
    const GreenKernel& k = fixtures::rfl_half();
    const GreenMatrix& m = fixtures::rfl_half_small();
    const Potential v1 = Potential::power_law(Vec3::Zero(), 0.5, 1.0);
    const Potential v2 = Potential::power_law(Vec3::Zero(), 0.5, 2.0);
    const MaxPrincipleReport r1 = max_principle_probe(k, grid, m, v1);
    const MaxPrincipleReport r2 = max_principle_probe(k, grid, m, v2);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(r1.gv_one[i] >= 0.0);
        CHECK(r2.gv_one[i] <= r1.gv_one[i] + 1e-6);
    }
    CHECK(r1.inner_median > 0.0);
}

TEST_CASE("maximum-principle probe flags only the incompatible point",
          "[diagnostics]") {
    const QuadGrid& grid = fixtures::mid_grid();
    const GreenKernel& k = fixtures::rfl_half();
    const GreenMatrix& m = fixtures::rfl_half_mid();

    const MaxPrincipleReport keep = max_principle_probe(
        k, grid, m, Potential::power_law(Vec3::Zero(), 0.5));
    CHECK(keep.near_zero_points.empty());

    const MaxPrincipleReport lose = max_principle_probe(
        k, grid, m, Potential::power_law(Vec3::Zero(), 1.5));
    REQUIRE(lose.near_zero_points.size() == 1);
    CHECK(lose.near_zero_points[0].norm() < 1e-12);

    // trivial potential: the field is G(1), strictly positive inside
    const MaxPrincipleReport trivial =
        max_principle_probe(k, grid, m, Potential::constant(0.0));
    CHECK(trivial.near_zero_points.empty());
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(trivial.gv_one[i] > 0.0);
}

TEST_CASE("five-way membership suite agrees on both sides of the "
          "transition",
          "[diagnostics]") {
    const QuadGrid& grid = fixtures::mid_grid();
    const GreenKernel& k = fixtures::rfl_half();
    const GreenMatrix& m = fixtures::rfl_half_mid();

    const ZEquivalenceReport keep = z_equivalence_suite(
        k, grid, m, Potential::power_law(Vec3::Zero(), 0.5));
    REQUIRE(keep.rows.size() == 1);
    CHECK(keep.all_agree);
    CHECK_FALSE(keep.rows[0].in_z());
    CHECK(keep.z_report().z_points().empty());

    const ZEquivalenceReport lose = z_equivalence_suite(
        k, grid, m, Potential::power_law(Vec3::Zero(), 1.5));
    REQUIRE(lose.rows.size() == 1);
    CHECK(lose.all_agree);
    CHECK(lose.rows[0].in_z());
    REQUIRE(lose.z_report().z_points().size() == 1);
    CHECK(!lose.evidence_table().empty());
}
