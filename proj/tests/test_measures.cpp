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
#include "greensolve/measures.hpp"

using namespace greensolve;

TEST_CASE("measure total variation splits density and atoms", "[measures]") {
    const QuadGrid& grid = fixtures::small_grid();
    RadonMeasure mu = RadonMeasure::from_density(
        std::vector<double>(grid.size(), -2.0));
    mu.atoms.push_back({Vec3(0.1, 0.0, 0.0), 3.0});
    double w = 0.0;
    for (double wi : grid.weights) w += wi;
    CHECK_THAT(mu.total_variation(grid),
               Catch::Matchers::WithinRel(2.0 * w + 3.0, 1e-12));
    CHECK(mu.atom_mass_at(Vec3(0.1, 0.0, 0.0)) == 3.0);
    CHECK(mu.atom_mass_at(Vec3::Zero()) == 0.0);
}

TEST_CASE("measure validation rejects malformed input", "[measures]") {
    const QuadGrid& grid = fixtures::small_grid();
    RadonMeasure mu = RadonMeasure::from_density({1.0, 2.0});
    CHECK_THROWS_AS(mu.validate(grid), std::invalid_argument);
    mu = RadonMeasure::dirac(Vec3(1.2, 0, 0), 1.0, grid.size());
    CHECK_THROWS_AS(mu.validate(grid), std::domain_error);
    mu = RadonMeasure::dirac(Vec3::Zero(), 1.0, grid.size());
    mu.atoms.push_back({Vec3::Zero(), 2.0});
    CHECK_THROWS_AS(mu.validate(grid), std::invalid_argument);
}

TEST_CASE("potential validation", "[measures]") {
    Potential v = Potential::power_law(Vec3::Zero(), 1.5);
    CHECK_NOTHROW(v.validate());
    CHECK_FALSE(v.bounded());
    CHECK(std::isinf(v.value_at(Vec3::Zero())));
    CHECK_THAT(v.value_at(Vec3(0.5, 0, 0)),
               Catch::Matchers::WithinRel(std::pow(0.5, -1.5), 1e-13));

    CHECK_THROWS_AS(Potential::power_law(Vec3(1.1, 0, 0), 1.0).validate(),
                    std::domain_error);
    CHECK_THROWS_AS(Potential::power_law(Vec3::Zero(), -1.0).validate(),
                    std::invalid_argument);
    Potential neg = Potential::constant(-1.0);
    CHECK_THROWS_AS(neg.validate(), std::invalid_argument);
    CHECK(Potential::constant(2.0).background_sup() == 2.0);
}

TEST_CASE("truncation is monotone in the cutoff", "[measures]") {
    const QuadGrid& grid = fixtures::small_grid();
    const Potential v = Potential::power_law(Vec3::Zero(), 1.5);
    std::vector<double> prev(grid.size(), 0.0);
    for (double k : {1.0, 4.0, 16.0, 256.0}) {
        const std::vector<double> vk = truncate(v, grid, k);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(vk[i] >= prev[i] - 1e-14);
            CHECK(vk[i] >= 0.0);
            CHECK(std::isfinite(vk[i]));
        }
        prev = vk;
    }
    CHECK_THROWS_AS(truncate(v, grid, 0.0), std::invalid_argument);
}

TEST_CASE("cell average of a truncated power law saturates", "[measures]") {
    // for beta < 3 the average over a ball of radius h converges to the
    // untruncated average 3 c h^(-beta) / (3 - beta) as k grows
    const double c = 1.0, h = 0.05;
    for (double beta : {0.5, 1.5, 2.5}) {
        const double full = 3.0 * c * std::pow(h, -beta) / (3.0 - beta);
        double prev = 0.0;
        // beta = 2.5 converges like k^(1 - 3/beta) = k^(-1/5), so the
        // ladder has to reach very large cutoffs
        for (double k : {1e2, 1e4, 1e8, 1e16}) {
            const double avg = detail::ball_average_truncated(c, beta, h, k);
            CHECK(avg >= prev);
            CHECK(avg <= full * (1.0 + 1e-12));
            prev = avg;
        }
        CHECK_THAT(prev, Catch::Matchers::WithinRel(full, 5e-3));
    }
    // tiny cutoff: the truncation level itself
    CHECK(detail::ball_average_truncated(1.0, 1.5, 0.05, 1e-3) == 1e-3);
}

TEST_CASE("analytic membership criterion matches the exponent rule",
          "[measures]") {
    for (double s : {0.5, 0.75}) {
        const GreenKernel k = GreenKernel::rfl(s);
        for (double beta : {0.25, 0.5, 1.5, 2.5}) {
            const Potential v = Potential::power_law(Vec3::Zero(), beta);
            const ZReport z = z_membership_analytic(v, k);
            REQUIRE(z.evidence.size() == 1);
            CHECK(z.evidence[0].in_z == (beta >= 2.0 * s));
            CHECK(z.evidence[0].borderline == (beta == 2.0 * s));
            CHECK(z.contains(Vec3::Zero()) == (beta >= 2.0 * s));
        }
    }
}

TEST_CASE("integral ladder detects divergence independently", "[measures]") {
    const QuadGrid& grid = fixtures::mid_grid();
    std::vector<double> rhos;
    for (double rho = 0.25; rho >= 1e-4; rho *= 0.5) rhos.push_back(rho);
    for (double s : {0.5, 0.75}) {
        const GreenKernel k = GreenKernel::rfl(s);
        for (double beta : {0.25, 0.5, 1.5, 2.5}) {
            const Potential v = Potential::power_law(Vec3::Zero(), beta);
            const ZPointEvidence e =
                z_integral_ladder(v, k, grid, Vec3::Zero(), rhos);
            INFO("s=" << s << " beta=" << beta);
            CHECK(e.ladder_resolved);
            CHECK(e.in_z == (beta >= 2.0 * s));
        }
    }
}

TEST_CASE("reduced measure drops exactly the incompatible atoms",
          "[measures]") {
    const QuadGrid& grid = fixtures::small_grid();
    RadonMeasure mu = RadonMeasure::from_density(
        std::vector<double>(grid.size(), 1.0));
    mu.atoms.push_back({Vec3::Zero(), 1.0});
    mu.atoms.push_back({Vec3(0.5, 0, 0), 2.0});

    ZReport z;
    ZPointEvidence e;
    e.point = Vec3::Zero();
    e.in_z = true;
    z.evidence.push_back(e);

    const RadonMeasure r1 = reduce(mu, z);
    CHECK(r1.density == mu.density);
    REQUIRE(r1.atoms.size() == 1);
    CHECK(r1.atoms[0].mass == 2.0);

    // idempotent
    const RadonMeasure r2 = reduce(r1, z);
    CHECK(r2.atoms.size() == r1.atoms.size());
    CHECK(r2.density == r1.density);
}
