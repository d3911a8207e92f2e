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

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "greensolve/gauss.hpp"

namespace greensolve {

using Vec3 = Eigen::Vector3d;

/// Spherical-coordinate box: r in [r_lo, r_hi], cos(theta) in [c_lo, c_hi],
/// phi in [p_lo, p_hi]. The quadrature cells of the product grid.
struct SphericalCell {
    double r_lo = 0, r_hi = 0;
    double c_lo = -1, c_hi = 1;
    double p_lo = 0, p_hi = 2 * std::numbers::pi;

    double volume() const {
        return (r_hi * r_hi * r_hi - r_lo * r_lo * r_lo) / 3.0 * (c_hi - c_lo) *
               (p_hi - p_lo);
    }

    /// Mass centroid of the cell. For a cell spanning the full sphere
    /// (the origin cell) this is the origin itself, so distance tests
    /// against it do not depend on the direction of approach.
    Vec3 center() const {
        const double r3 = r_hi * r_hi * r_hi - r_lo * r_lo * r_lo;
        const double rbar =
            (r3 > 0.0) ? 0.75 *
                             (r_hi * r_hi * r_hi * r_hi -
                              r_lo * r_lo * r_lo * r_lo) /
                             r3
                       : 0.5 * (r_lo + r_hi);
        auto arc = [](double c) {
            const double cc = std::clamp(c, -1.0, 1.0);
            return 0.5 * (cc * std::sqrt(std::max(1.0 - cc * cc, 0.0)) +
                          std::asin(cc));
        };
        const double mean_st = (arc(c_hi) - arc(c_lo)) / (c_hi - c_lo);
        const double mean_c = 0.5 * (c_lo + c_hi);
        const double mean_cp = (std::sin(p_hi) - std::sin(p_lo)) /
                               (p_hi - p_lo);
        const double mean_sp = (std::cos(p_lo) - std::cos(p_hi)) /
                               (p_hi - p_lo);
        return {rbar * mean_st * mean_cp, rbar * mean_st * mean_sp,
                rbar * mean_c};
    }

    /// Euclidean size estimate (diagonal of the box).
    double diameter() const {
        const double r = 0.5 * (r_lo + r_hi);
        const double c = 0.5 * (c_lo + c_hi);
        const double st = std::sqrt(std::max(1.0 - c * c, 1e-12));
        const double dr = r_hi - r_lo;
        const double dth = r * (c_hi - c_lo);
        const double dph = r * st * (p_hi - p_lo);
        return std::sqrt(dr * dr + dth * dth + dph * dph);
    }
};

/// Quadrature discretization of the unit ball. Immutable after
/// construction; all member data is plain value storage.
struct QuadGrid {
    int dim = 3;
    int radial_count = 0;
    int angular_count = 0;  // as requested; actual rule sizes below
    int n_theta = 0;
    int n_phi = 0;
    std::vector<Vec3> nodes;
    std::vector<double> weights;
    std::vector<double> boundary_dist;  // 1 - |x_i|
    std::vector<double> radial_levels;  // sorted distinct radii (excl. origin)
    std::vector<double> cell_radius;    // equivalent-ball radius of each cell
    std::vector<SphericalCell> cells;
    std::array<std::uint8_t, 32> hash{};

    std::size_t size() const { return nodes.size(); }

    /// Smallest radius at which local ball probes are resolved: a
    /// ball of this radius about an interior node covers the full
    /// innermost shell of cells (the cells tile, so the captured
    /// quadrature measure then tracks the ball volume).
    double min_probe_radius() const {
        return cells.size() > 1 ? cells[1].r_hi
                                : 2.0 * radial_levels.front();
    }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d649d2d5094258ULL ^ 0x95ULL;
    return z ^ (z >> 31);
}

inline std::array<std::uint8_t, 32> grid_hash(int dim, int radial, int angular,
                                              std::uint32_t rule_version) {
    std::uint64_t state = 0x6772656e736f6c76ULL;  // "grensolv"
    state ^= static_cast<std::uint64_t>(dim) << 48;
    state ^= static_cast<std::uint64_t>(radial) << 32;
    state ^= static_cast<std::uint64_t>(angular) << 16;
    state ^= rule_version;
    std::array<std::uint8_t, 32> out{};
    for (int blk = 0; blk < 4; ++blk) {
        const std::uint64_t word = splitmix64(state);
        for (int b = 0; b < 8; ++b)
            out[blk * 8 + b] = static_cast<std::uint8_t>(word >> (8 * b));
    }
    return out;
}

}  // namespace detail

/// Version tag for the quadrature rule construction; bump on any change
/// that alters node placement or weights (invalidates kernel caches).
inline constexpr std::uint32_t kGridRuleVersion = 2;

/// Builds the product quadrature grid of the unit ball:
/// composite two-point Gauss-Legendre radial panels against a
/// (Gauss-Legendre in cos(theta)) x (uniform phi) sphere rule, plus a
/// dedicated origin node with a small spherical cell.
inline QuadGrid build_ball_grid(int dim, int radial_count, int angular_count) {
    if (dim != 3)
        throw std::invalid_argument(
            "build_ball_grid: only dim = 3 is supported");
    if (radial_count < 4)
        throw std::invalid_argument("build_ball_grid: radial_count must be >= 4");
    if (angular_count < 6)
        throw std::invalid_argument("build_ball_grid: angular_count must be >= 6");

    QuadGrid grid;
    grid.dim = dim;
    grid.radial_count = radial_count;
    grid.angular_count = angular_count;

    // Radial rule: radial_count/2 equal panels, 2-point Gauss each.
    // The first panel starts at the origin cell's outer radius h0, not
    // at zero, so the radial cells and the origin cell tile the ball
    // with no overlap: kernels with an integrable radial singularity
    // put non-negligible mass near the origin, and double-covering
    // [0, h0] would bias every row of the assembled operator there.
    const int panels = (radial_count + 1) / 2;
    const double gl_lo = 0.5 - 0.5 / std::sqrt(3.0);
    const double gl_hi = 0.5 + 0.5 / std::sqrt(3.0);
    const double h0 = 0.5 * gl_lo / panels;
    // Panel breakpoints: equal widths, except that the outermost panel
    // is split geometrically (halved twice toward r = 1). The cell
    // touching r = 1 carries a grid-independent relative error from
    // freezing (1 - r)^gamma at its node (the factor is concave there
    // for gamma < 1), so its width directly controls the boundary-layer
    // error of the assembled operator.
    std::vector<std::pair<double, double>> panel_bounds;
    for (int p = 0; p < panels; ++p) {
        const double a = p == 0 ? h0 : static_cast<double>(p) / panels;
        const double b = static_cast<double>(p + 1) / panels;
        if (p == panels - 1) {
            const double m1 = 0.5 * (a + b);
            const double m2 = 0.5 * (m1 + b);
            panel_bounds.emplace_back(a, m1);
            panel_bounds.emplace_back(m1, m2);
            panel_bounds.emplace_back(m2, b);
        } else {
            panel_bounds.emplace_back(a, b);
        }
    }
    std::vector<double> r_nodes, r_weights, r_cell_lo, r_cell_hi;
    for (const auto& [a, b] : panel_bounds) {
        const double d = b - a;
        const double r1 = a + gl_lo * d;
        const double r2 = a + gl_hi * d;
        // Split the panel so each node's cell carries exactly the
        // node's share of the r^2-measure (2-point Gauss is exact for
        // r^2, so the two shares tile the panel): near-field entries
        // replace point values by cell averages, which is consistent
        // only when cell measure and quadrature weight agree.
        const double split = std::cbrt(a * a * a + 1.5 * d * r1 * r1);
        r_nodes.push_back(r1);
        r_weights.push_back(0.5 * d);
        r_cell_lo.push_back(a);
        r_cell_hi.push_back(split);
        r_nodes.push_back(r2);
        r_weights.push_back(0.5 * d);
        r_cell_lo.push_back(split);
        r_cell_hi.push_back(b);
    }
    grid.radial_levels = r_nodes;

    // Angular rule: n_theta Gauss-Legendre nodes in cos(theta),
    // 2*n_theta uniform phi nodes; sized from the requested count.
    const int n_theta =
        std::max(2, static_cast<int>(std::lround(std::sqrt(angular_count / 2.0))));
    const int n_phi = 2 * n_theta;
    grid.n_theta = n_theta;
    grid.n_phi = n_phi;
    const QuadratureRule theta_rule = gauss_legendre(n_theta);  // in cos(theta)
    // Cell breakpoints tile (-1, 1) by cumulative Gauss weights, so
    // each polar cell's cos(theta)-measure equals its node's weight
    // (same consistency requirement as the radial split above).
    std::vector<double> c_break(n_theta + 1);
    c_break[0] = -1.0;
    c_break[n_theta] = 1.0;
    for (int j = 1; j < n_theta; ++j)
        c_break[j] = c_break[j - 1] + theta_rule.weights[j - 1];
    const double w_phi = 2.0 * std::numbers::pi / n_phi;

    // Origin node: spherical cell filling the gap below the first panel.
    grid.nodes.push_back(Vec3::Zero());
    grid.weights.push_back(4.0 * std::numbers::pi / 3.0 * h0 * h0 * h0);
    grid.boundary_dist.push_back(1.0);
    grid.cell_radius.push_back(h0);
    grid.cells.push_back(SphericalCell{0.0, h0, -1.0, 1.0, 0.0,
                                       2.0 * std::numbers::pi});

    for (std::size_t i = 0; i < r_nodes.size(); ++i) {
        const double r = r_nodes[i];
        for (int j = 0; j < n_theta; ++j) {
            const double c = theta_rule.nodes[j];
            const double st = std::sqrt(std::max(1.0 - c * c, 0.0));
            for (int k = 0; k < n_phi; ++k) {
                const double phi = w_phi * k;
                grid.nodes.emplace_back(r * st * std::cos(phi),
                                        r * st * std::sin(phi), r * c);
                grid.weights.push_back(r_weights[i] * r * r *
                                       theta_rule.weights[j] * w_phi);
                grid.boundary_dist.push_back(1.0 - r);
                SphericalCell cell;
                cell.r_lo = r_cell_lo[i];
                cell.r_hi = r_cell_hi[i];
                cell.c_lo = c_break[j];
                cell.c_hi = c_break[j + 1];
                cell.p_lo = phi - 0.5 * w_phi;
                cell.p_hi = phi + 0.5 * w_phi;
                grid.cells.push_back(cell);
                grid.cell_radius.push_back(std::cbrt(
                    3.0 * cell.volume() / (4.0 * std::numbers::pi)));
            }
        }
    }
    grid.hash = detail::grid_hash(dim, radial_count, angular_count,
                                  kGridRuleVersion);
    return grid;
}

/// Result of a localized ball quadrature. `empty` flags a probe radius
/// too small to capture any node (the value is then meaningless).
struct BallIntegral {
    double value = 0.0;
    std::size_t captured = 0;
    bool empty = true;
};

/// Integrates per-node values u over B_radius(center), node-center
/// inclusion rule (a node contributes its full weight iff its center
/// lies inside the ball).
inline BallIntegral ball_integral(const QuadGrid& grid,
                                  const std::vector<double>& u,
                                  const Vec3& center, double radius) {
    if (radius <= 0.0)
        throw std::invalid_argument("ball_integral: radius must be positive");
    if (u.size() != grid.size())
        throw std::invalid_argument("ball_integral: value vector size mismatch");
    BallIntegral result;
    const double r2 = radius * radius;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if ((grid.nodes[i] - center).squaredNorm() <= r2) {
            result.value += grid.weights[i] * u[i];
            ++result.captured;
        }
    }
    result.empty = (result.captured == 0);
    return result;
}

}  // namespace greensolve
