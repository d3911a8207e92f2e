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

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "greensolve/green_matrix.hpp"
#include "greensolve/measures.hpp"

namespace greensolve {

enum class SolveMethod { Direct, Iterative, DoubleLimit };

/// Result of one solve of u = G(mu - V u).
struct SolveReport {
    std::vector<double> u;
    std::vector<double> vu;
    double residual = 0.0;     // ||u - G(mu - V u)||_L1
    int iterations = 0;
    double bracket_gap = 0.0;  // ||upper - lower||_L1, monotone method only
    SolveMethod method = SolveMethod::Direct;
};

namespace detail {

inline double l1_norm(const QuadGrid& grid, const std::vector<double>& u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        acc += grid.weights[i] * std::abs(u[i]);
    return acc;
}

inline double solve_residual(const GreenKernel& kernel, const QuadGrid& grid,
                             const GreenMatrix& m, const std::vector<double>& vk,
                             const RadonMeasure& mu,
                             const std::vector<double>& u) {
    std::vector<double> vu(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) vu[i] = vk[i] * u[i];
    std::vector<double> rhs = apply_measure(kernel, grid, m, mu);
    const std::vector<double> gvu = apply_density(m, vu);
    double res = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        res += grid.weights[i] * std::abs(u[i] - (rhs[i] - gvu[i]));
    return res;
}

inline void check_bounded_potential(const std::vector<double>& vk,
                                    std::size_t n) {
    if (vk.size() != n)
        throw std::invalid_argument("solver: potential size mismatch");
    for (double v : vk)
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument(
                "solver: potential must be finite and >= 0 at every node");
}

}  // namespace detail

/// Linear-algebra oracle: solves (I + M diag(Vk)) u = G(mu) by dense LU.
/// The system is nonsingular for Vk >= 0 with a positive-semidefinite M.
inline SolveReport solve_bounded_direct(const GreenKernel& kernel,
                                        const QuadGrid& grid,
                                        const GreenMatrix& m,
                                        const std::vector<double>& vk,
                                        const RadonMeasure& mu) {
    const auto n = m.size();
    detail::check_bounded_potential(vk, static_cast<std::size_t>(n));
    mu.validate(grid);

    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        system.col(j) += m.entries.col(j) * vk[static_cast<std::size_t>(j)];
    const std::vector<double> rhs_vec = apply_measure(kernel, grid, m, mu);
    Eigen::VectorXd rhs =
        Eigen::Map<const Eigen::VectorXd>(rhs_vec.data(), n);

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    // guard against a numerically singular system (cannot occur for
    // Vk >= 0 and PSD M, but a broken assembly could produce one)
    const double rcond_proxy =
        lu.matrixLU().diagonal().cwiseAbs().minCoeff() /
        lu.matrixLU().diagonal().cwiseAbs().maxCoeff();
    if (!(rcond_proxy > 1e-14))
        throw std::runtime_error("solve_bounded_direct: singular system");
    Eigen::VectorXd u = lu.solve(rhs);

    SolveReport report;
    report.method = SolveMethod::Direct;
    report.u.assign(u.data(), u.data() + n);
    report.vu.resize(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < report.u.size(); ++i)
        report.vu[i] = vk[i] * report.u[i];
    report.iterations = 1;
    report.residual = detail::solve_residual(kernel, grid, m, vk, mu, report.u);
    return report;
}

/// Monotone fixed-point iteration for nonnegative data:
/// u0 = 0, u1 = G(f), u2 = G((f - V u1)+), u_i = G(f - V u_{i-1}).
/// Even iterates increase, odd iterates decrease, every even iterate
/// stays below every later odd iterate; returns the bracket midpoint.
/// Sign-changing data is split into positive and negative parts, each
/// solved by the same scheme, and recombined linearly.
inline SolveReport solve_bounded_iterative(const GreenKernel& kernel,
                                           const QuadGrid& grid,
                                           const GreenMatrix& m,
                                           const std::vector<double>& vk,
                                           const RadonMeasure& mu, double tol,
                                           int max_iterations = 400) {
    const std::size_t n = grid.size();
    detail::check_bounded_potential(vk, n);
    mu.validate(grid);

    bool has_negative = false;
    for (double v : mu.density) has_negative |= v < 0.0;
    for (const auto& a : mu.atoms) has_negative |= a.mass < 0.0;
    if (has_negative) {
        RadonMeasure pos, neg;
        pos.density.resize(n);
        neg.density.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            pos.density[i] = std::max(mu.density[i], 0.0);
            neg.density[i] = std::max(-mu.density[i], 0.0);
        }
        for (const auto& a : mu.atoms) {
            if (a.mass >= 0.0) pos.atoms.push_back(a);
            else neg.atoms.push_back({a.location, -a.mass});
        }
        SolveReport rp = solve_bounded_iterative(kernel, grid, m, vk, pos, tol,
                                                 max_iterations);
        SolveReport rn = solve_bounded_iterative(kernel, grid, m, vk, neg, tol,
                                                 max_iterations);
        SolveReport report;
        report.method = SolveMethod::Iterative;
        report.u.resize(n);
        report.vu.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            report.u[i] = rp.u[i] - rn.u[i];
            report.vu[i] = vk[i] * report.u[i];
        }
        report.iterations = rp.iterations + rn.iterations;
        report.bracket_gap = rp.bracket_gap + rn.bracket_gap;
        report.residual = detail::solve_residual(kernel, grid, m, vk, mu,
                                                 report.u);
        return report;
    }

    const std::vector<double> gmu = apply_measure(kernel, grid, m, mu);
    auto step = [&](const std::vector<double>& prev, bool clip) {
        std::vector<double> d(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = -vk[i] * prev[i];
        std::vector<double> gd = apply_density(m, d);
        std::vector<double> next(n);
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = gmu[i] + gd[i];
            if (clip) next[i] = std::max(next[i], 0.0);
        }
        return next;
    };

    std::vector<double> lower(n, 0.0);   // even iterates, increasing
    std::vector<double> upper = gmu;     // odd iterates, decreasing
    SolveReport report;
    report.method = SolveMethod::Iterative;
    report.iterations = 1;
    double gap = detail::l1_norm(grid, upper);
    constexpr double kOrderTol = 1e-10;
    while (gap >= tol && report.iterations < max_iterations) {
        std::vector<double> next_lower = step(upper, true);
        std::vector<double> next_upper = step(next_lower, false);
        report.iterations += 2;
        for (std::size_t i = 0; i < n; ++i) {
            // sandwich ordering; a violation beyond round-off signals a
            // broken (asymmetric or sign-violating) assembly
            if (next_lower[i] < lower[i] - kOrderTol ||
                next_upper[i] > upper[i] + kOrderTol ||
                next_lower[i] > next_upper[i] + kOrderTol)
                throw std::runtime_error(
                    "solve_bounded_iterative: monotone bracket violated");
        }
        lower = std::move(next_lower);
        upper = std::move(next_upper);
        gap = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            gap += grid.weights[i] * (upper[i] - lower[i]);
    }
    if (gap >= tol)
        throw std::runtime_error(
            "solve_bounded_iterative: no convergence after " +
            std::to_string(report.iterations) +
            " iterations, bracket gap = " + std::to_string(gap));
    report.bracket_gap = gap;
    report.u.resize(n);
    report.vu.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        report.u[i] = 0.5 * (lower[i] + upper[i]);
        report.vu[i] = vk[i] * report.u[i];
    }
    report.residual = detail::solve_residual(kernel, grid, m, vk, mu, report.u);
    return report;
}

/// Both sides of the L1 bound on V u:
///   int V |u| <= ||G(1)||_Linf (1/inf_K G(1) + ||V||_Linf(K)) ||mu||,
/// where K is the inner ball of the given radius around the origin.
struct VuEstimate {
    double lhs = 0.0;
    double rhs = 0.0;
};

inline VuEstimate vu_l1_estimate(const QuadGrid& grid, const GreenMatrix& m,
                                 const SolveReport& report,
                                 const std::vector<double>& vk,
                                 const RadonMeasure& mu,
                                 double inner_radius = 0.5) {
    VuEstimate est;
    for (std::size_t i = 0; i < grid.size(); ++i)
        est.lhs += grid.weights[i] * std::abs(report.vu[i]);

    const std::vector<double> ones(grid.size(), 1.0);
    const std::vector<double> g1 = apply_density(m, ones);
    double g1_sup = 0.0, g1_inf_inner = 1e300, v_sup_inner = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        g1_sup = std::max(g1_sup, g1[i]);
        if (grid.nodes[i].norm() <= inner_radius) {
            g1_inf_inner = std::min(g1_inf_inner, g1[i]);
            v_sup_inner = std::max(v_sup_inner, vk[i]);
        }
    }
    est.rhs = g1_sup * (1.0 / g1_inf_inner + v_sup_inner) *
              mu.total_variation(grid);
    return est;
}

/// Existence solver for integrable data and potential: double cutoff
/// ladder, inner in the potential cutoff k (solutions decrease), outer
/// in the data cutoff level (solutions increase). Sign-changing data is
/// split and recombined.
inline SolveReport solve_l1(const GreenKernel& kernel, const QuadGrid& grid,
                            const GreenMatrix& m, const Potential& v,
                            const std::vector<double>& f_density, double tol,
                            int max_ladder = 24) {
    v.validate();
    const std::size_t n = grid.size();
    if (f_density.size() != n)
        throw std::invalid_argument("solve_l1: data size mismatch");

    bool has_negative = false;
    for (double fv : f_density) has_negative |= fv < 0.0;
    if (has_negative) {
        std::vector<double> pos(n), neg(n);
        for (std::size_t i = 0; i < n; ++i) {
            pos[i] = std::max(f_density[i], 0.0);
            neg[i] = std::max(-f_density[i], 0.0);
        }
        SolveReport rp = solve_l1(kernel, grid, m, v, pos, tol, max_ladder);
        SolveReport rn = solve_l1(kernel, grid, m, v, neg, tol, max_ladder);
        SolveReport report;
        report.method = SolveMethod::DoubleLimit;
        report.u.resize(n);
        report.vu.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            report.u[i] = rp.u[i] - rn.u[i];
        report.iterations = rp.iterations + rn.iterations;
        // vu/residual against the untruncated potential sampled on nodes
        std::vector<double> vfull(n);
        for (std::size_t i = 0; i < n; ++i)
            vfull[i] = v.value_at(grid.nodes[i], i);
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            report.vu[i] = std::isfinite(vfull[i]) ? vfull[i] * report.u[i]
                                                   : 0.0;
        }
        RadonMeasure muf = RadonMeasure::from_density(f_density);
        std::vector<double> rhs = apply_measure(kernel, grid, m, muf);
        std::vector<double> gvu = apply_density(m, report.vu);
        for (std::size_t i = 0; i < n; ++i)
            res += grid.weights[i] * std::abs(report.u[i] - (rhs[i] - gvu[i]));
        report.residual = res;
        return report;
    }

    double f_sup = 0.0;
    for (double fv : f_density) f_sup = std::max(f_sup, fv);
    const double k0 = std::max(1.0, v.background_sup());
    const double m0 = std::max(1.0, std::min(f_sup, 1.0));

    SolveReport last;
    std::vector<double> u_prev_outer;
    int total_iter = 0;
    for (int mj = 0;; ++mj) {
        const double fcut = m0 * std::pow(2.0, mj);
        std::vector<double> fm(n);
        bool saturated_f = true;
        for (std::size_t i = 0; i < n; ++i) {
            fm[i] = std::min(f_density[i], fcut);
            saturated_f &= fm[i] == f_density[i];
        }
        RadonMeasure mum = RadonMeasure::from_density(fm);

        // inner ladder: potential cutoff k, decreasing solutions
        std::vector<double> u_prev_inner;
        SolveReport inner;
        for (int kj = 0;; ++kj) {
            const double kcut = k0 * std::pow(2.0, kj);
            const std::vector<double> vkt = truncate(v, grid, kcut);
            inner = solve_bounded_direct(kernel, grid, m, vkt, mum);
            ++total_iter;
            if (!u_prev_inner.empty()) {
                double diff = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    diff += grid.weights[i] *
                            std::abs(inner.u[i] - u_prev_inner[i]);
                bool saturated_v = v.bounded() && kcut >= v.background_sup();
                if (diff < tol || saturated_v) break;
                if (kj >= max_ladder)
                    throw std::runtime_error(
                        "solve_l1: potential ladder did not converge; last "
                        "increment " + std::to_string(diff));
            }
            u_prev_inner = inner.u;
        }

        bool outer_done = saturated_f;
        if (!u_prev_outer.empty()) {
            double diff = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                diff += grid.weights[i] * std::abs(inner.u[i] - u_prev_outer[i]);
            outer_done |= diff < tol;
        } else {
            outer_done &= saturated_f;
        }
        u_prev_outer = inner.u;
        last = inner;
        if (outer_done) break;
        if (mj >= max_ladder)
            throw std::runtime_error("solve_l1: data ladder did not converge");
    }
    last.method = SolveMethod::DoubleLimit;
    last.iterations = total_iter;
    return last;
}

}  // namespace greensolve
