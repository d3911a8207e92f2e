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
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "greensolve/green_kernel.hpp"
#include "greensolve/quad_grid.hpp"

namespace greensolve {

/// Point mass of a Radon measure.
struct Atom {
    Vec3 location = Vec3::Zero();
    double mass = 0.0;
};

/// Signed Radon measure on the ball: an absolutely continuous part
/// sampled at the grid nodes plus finitely many atoms.
struct RadonMeasure {
    std::vector<double> density;
    std::vector<Atom> atoms;

    static RadonMeasure from_density(std::vector<double> d) {
        RadonMeasure mu;
        mu.density = std::move(d);
        return mu;
    }

    static RadonMeasure dirac(const Vec3& location, double mass,
                              std::size_t grid_size) {
        RadonMeasure mu;
        mu.density.assign(grid_size, 0.0);
        mu.atoms.push_back({location, mass});
        return mu;
    }

    double atom_mass_at(const Vec3& x, double tol = 1e-9) const {
        for (const auto& a : atoms)
            if ((a.location - x).norm() <= tol) return a.mass;
        return 0.0;
    }

    double total_variation(const QuadGrid& grid) const {
        double tv = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i)
            tv += grid.weights[i] * std::abs(density[i]);
        for (const auto& a : atoms) tv += std::abs(a.mass);
        return tv;
    }

    void validate(const QuadGrid& grid) const {
        if (density.size() != grid.size())
            throw std::invalid_argument("RadonMeasure: density size mismatch");
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            if (atoms[i].location.norm() >= 1.0)
                throw std::domain_error("RadonMeasure: atom outside the domain");
            for (std::size_t j = i + 1; j < atoms.size(); ++j)
                if ((atoms[i].location - atoms[j].location).norm() < 1e-12)
                    throw std::invalid_argument(
                        "RadonMeasure: duplicate atom locations");
        }
    }
};

/// Isolated power-law singularity of a potential:
/// V(y) ~ coeff * |y - point|^(-beta) near the point.
struct Singularity {
    Vec3 point = Vec3::Zero();
    double beta = 0.0;
    double coeff = 1.0;
};

/// Nonnegative potential: bounded background (constant floor plus
/// optional per-node values) and finitely many power-law singular points.
struct Potential {
    double c0 = 0.0;                    // constant background floor
    std::vector<double> background;     // optional per-node part, may be empty
    std::vector<Singularity> singular;

    static Potential constant(double c) {
        Potential v;
        v.c0 = c;
        return v;
    }

    static Potential power_law(const Vec3& point, double beta, double coeff = 1.0) {
        Potential v;
        v.singular.push_back({point, beta, coeff});
        return v;
    }

    bool bounded() const { return singular.empty(); }

    double background_sup() const {
        double m = c0;
        for (double v : background) m = std::max(m, c0 + v);
        return m;
    }

    /// Pointwise value; +infinity exactly at a singular point.
    double value_at(const Vec3& x, std::size_t node_index = SIZE_MAX) const {
        double v = c0;
        if (node_index != SIZE_MAX && node_index < background.size())
            v += background[node_index];
        for (const auto& s : singular) {
            const double d = (x - s.point).norm();
            if (d == 0.0) return std::numeric_limits<double>::infinity();
            v += s.coeff * std::pow(d, -s.beta);
        }
        return v;
    }

    void validate() const {
        if (c0 < 0.0)
            throw std::invalid_argument("Potential: background floor must be >= 0");
        for (double v : background)
            if (v < 0.0)
                throw std::invalid_argument("Potential: background must be >= 0");
        for (std::size_t i = 0; i < singular.size(); ++i) {
            const auto& s = singular[i];
            if (s.point.norm() >= 1.0)
                throw std::domain_error("Potential: singular point outside domain");
            if (!(s.beta > 0.0) || !(s.coeff > 0.0))
                throw std::invalid_argument(
                    "Potential: singularity needs beta > 0 and coeff > 0");
            for (std::size_t j = i + 1; j < singular.size(); ++j)
                if ((s.point - singular[j].point).norm() < 1e-12)
                    throw std::invalid_argument(
                        "Potential: duplicate singular points");
        }
    }
};

namespace detail {

/// Average of min(c r^-beta, k) over a ball of radius h around the
/// singularity; the resolution-consistent node value for a cell that
/// contains a power-law singular point. Saturates as k grows whenever
/// beta < 3 (the power law is then locally integrable in volume).
inline double ball_average_truncated(double c, double beta, double h,
                                     double k) {
    const double rk = std::pow(c / k, 1.0 / beta);
    if (rk >= h) return k;
    double tail;
    if (beta == 3.0) {
        tail = 3.0 * c * std::log(h / rk);
    } else {
        tail = 3.0 * c * (std::pow(h, 3.0 - beta) - std::pow(rk, 3.0 - beta)) /
               (3.0 - beta);
    }
    return (k * rk * rk * rk + tail) / (h * h * h);
}

}  // namespace detail

/// min(V, k) sampled at the grid nodes; nondecreasing in k. A node that
/// coincides with a singular point takes the cell-averaged truncated
/// value (point sampling would read the cutoff k itself at every rung,
/// which no quadrature cell can represent).
inline std::vector<double> truncate(const Potential& v, const QuadGrid& grid,
                                    double k) {
    if (!(k > 0.0)) throw std::invalid_argument("truncate: k must be > 0");
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double regular = v.c0;
        if (i < v.background.size()) regular += v.background[i];
        double avg = 0.0;
        for (const auto& s : v.singular) {
            const double d = (grid.nodes[i] - s.point).norm();
            if (d < 1e-12) {
                avg += detail::ball_average_truncated(s.coeff, s.beta,
                                                      grid.cell_radius[i], k);
            } else {
                regular += s.coeff * std::pow(d, -s.beta);
            }
        }
        out[i] = std::min(regular, k) + avg;
    }
    return out;
}

/// Per-singular-point evidence of the incompatible-set test.
struct ZPointEvidence {
    Vec3 point = Vec3::Zero();
    double beta = 0.0;
    bool in_z = false;
    bool borderline = false;               // beta == 2s: log-divergent
    std::vector<double> integral_ladder;   // dyadic shell increments, if run
    bool ladder_divergent = false;
    bool ladder_resolved = false;
};

/// Verdicts for the incompatible set Z: data points where no solution
/// with a point mass exists.
struct ZReport {
    std::vector<ZPointEvidence> evidence;

    std::vector<Vec3> z_points() const {
        std::vector<Vec3> out;
        for (const auto& e : evidence)
            if (e.in_z) out.push_back(e.point);
        return out;
    }

    bool contains(const Vec3& x, double tol = 1e-9) const {
        for (const auto& e : evidence)
            if (e.in_z && (e.point - x).norm() <= tol) return true;
        return false;
    }
};

/// Analytic verdict: x in Z iff the local integral
/// int_{B_rho} V(y) |x-y|^(2s-n) dy diverges, i.e. iff beta >= 2s for a
/// power-law singularity (the radial integral of r^(-beta+2s-1) near 0).
/// beta = 2s is log-divergent: classified in Z and flagged borderline.
/// Bounded backgrounds never contribute.
inline ZReport z_membership_analytic(const Potential& v,
                                     const GreenKernel& kernel) {
    v.validate();
    ZReport report;
    const double two_s = 2.0 * kernel.order_s();
    for (const auto& s : v.singular) {
        ZPointEvidence e;
        e.point = s.point;
        e.beta = s.beta;
        e.in_z = s.beta >= two_s;
        e.borderline = s.beta == two_s;
        report.evidence.push_back(e);
    }
    return report;
}

/// Dyadic-shell increments of int V(y) |x-y|^(2s-n) dy around x,
/// accumulated inward; divergence shows as non-decaying increments.
/// Integrates in local polar coordinates (exact to quadrature error for
/// the power-law part), independent of the global grid resolution.
inline ZPointEvidence z_integral_ladder(const Potential& v,
                                        const GreenKernel& kernel,
                                        const QuadGrid& grid, const Vec3& x,
                                        const std::vector<double>& rho_ladder) {
    v.validate();
    ZPointEvidence e;
    e.point = x;
    const double two_s = 2.0 * kernel.order_s();
    const int n = kernel.dim();
    for (const auto& s : v.singular)
        if ((s.point - x).norm() < 1e-12) e.beta = s.beta;

    // shells rho_{j+1} < |y - x| < rho_j, radial 16-point Gauss each;
    // the angular average of V around x is taken over a small sample of
    // directions (exact for the centered power law).
    std::vector<double> rhos = rho_ladder;
    std::sort(rhos.begin(), rhos.end(), std::greater<>());
    const double rho_min_resolved = grid.min_probe_radius();
    e.ladder_resolved = !rhos.empty() && rhos.back() <= 0.25 * rhos.front();
    static const std::vector<Vec3> dirs = {
        {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    for (std::size_t j = 0; j + 1 < rhos.size(); ++j) {
        const QuadratureRule rule = gauss_legendre(16, rhos[j + 1], rhos[j]);
        double shell = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double r = rule.nodes[q];
            double vbar = 0.0;
            for (const Vec3& d : dirs) vbar += v.value_at(x + r * d);
            vbar /= static_cast<double>(dirs.size());
            shell += rule.weights[q] * vbar * std::pow(r, two_s - n) *
                     4.0 * std::numbers::pi * std::pow(r, n - 1.0);
        }
        e.integral_ladder.push_back(shell);
    }
    // Divergent iff the inward increments fail to decay geometrically.
    if (e.integral_ladder.size() >= 3) {
        const double last = e.integral_ladder.back();
        const double prev = e.integral_ladder[e.integral_ladder.size() - 2];
        e.ladder_divergent = last > 0.75 * prev;
    } else {
        e.ladder_resolved = false;
    }
    if (!e.ladder_resolved) {
        // under-resolved ladder: fall back to the analytic criterion
        e.ladder_divergent = e.beta >= two_s;
    }
    e.in_z = e.ladder_divergent;
    e.borderline = e.beta == two_s;
    (void)rho_min_resolved;
    return e;
}

/// Reduced measure: drop the atoms sitting at incompatible points.
/// Linear in mu and idempotent.
inline RadonMeasure reduce(const RadonMeasure& mu, const ZReport& z) {
    RadonMeasure out;
    out.density = mu.density;
    for (const auto& a : mu.atoms)
        if (!z.contains(a.location)) out.atoms.push_back(a);
    return out;
}

}  // namespace greensolve
