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
#include <vector>

#include "greensolve/green_matrix.hpp"
#include "greensolve/measures.hpp"
#include "greensolve/solver.hpp"

namespace greensolve {

/// One rung of the cutoff ladder.
struct LadderPoint {
    double cutoff = 0.0;
    double u_l1 = 0.0;        // ||u_k||_L1
    double delta_l1 = 0.0;    // ||u_k - u_prev||_L1
    double vu_l1 = 0.0;       // int V_k |u_k|
};

/// Concentration-mass evidence at one singular point of the potential.
struct AlphaEstimate {
    Vec3 point = Vec3::Zero();
    double mass_balance = 0.0;   // limit of int_{B_rho} V_k u_k
    double scaling = 0.0;        // mu({x}) - [rho^(-2s) int_{B_rho} u] / c_x
    double consensus = 0.0;
    bool agree = true;           // |mass_balance - scaling| <= consensus band
    double calibration = 0.0;    // c_x = lim rho^(-2s) int_{B_rho} G(delta_x)
};

/// Result of the cutoff-ladder approximation u_k = G_{V and k}(mu):
/// the limit candidate, per-singular-point concentration masses, and
/// the reduced measure the limit actually solves for.
struct CsolaReport {
    std::vector<double> u_limit;
    std::vector<LadderPoint> ladder;
    std::vector<AlphaEstimate> alphas;
    RadonMeasure mu_reduced;
    bool is_solution = false;
    bool inconclusive = false;
    double vu_l1_running_max = 0.0;  // max over the ladder of int V_k |u_k|
};

struct CsolaOptions {
    std::vector<double> cutoffs;      // empty: geometric default ladder
    std::vector<double> rho_ladder;   // empty: dyadic default
    double alpha_solution = 0.05;     // all alphas below: "is a solution"
    double alpha_consensus = 0.1;     // estimator agreement band
};

namespace detail {

/// Default geometric cutoff ladder 4^0 .. 4^15 scaled by the bounded
/// part of the potential. The wide ratio reaches saturation (where
/// the truncated potential stops changing on the resolvable part of
/// the grid) within the ladder even for strongly singular potentials.
inline std::vector<double> default_cutoffs(const Potential& v) {
    const double base = std::max(1.0, v.background_sup());
    std::vector<double> out;
    for (int j = 0; j <= 15; ++j) out.push_back(base * std::pow(4.0, j));
    return out;
}

/// Node-wise Richardson extrapolation of a geometrically converging
/// monotone ladder: from the last three iterates, estimate the limit
/// u_inf = u2 + d2 q/(1-q) with q = d2/d1 (clamped for safety).
inline std::vector<double> richardson(const std::vector<double>& u0,
                                      const std::vector<double>& u1,
                                      const std::vector<double>& u2) {
    std::vector<double> out(u2.size());
    for (std::size_t i = 0; i < u2.size(); ++i) {
        const double d1 = u1[i] - u0[i];
        const double d2 = u2[i] - u1[i];
        double q = d1 != 0.0 ? d2 / d1 : 0.0;
        q = std::clamp(q, 0.0, 0.9);
        out[i] = u2[i] + d2 * q / (1.0 - q);
        // the ladders this serves are monotone between u0 and the limit
        out[i] = std::clamp(out[i], std::min({u0[i], u2[i], 0.0}),
                            std::max(u0[i], u2[i]));
    }
    return out;
}

/// Least-squares fit of values = L + c * rho^t over the rho ladder,
/// returning L. Used when the decay exponent t of the finite-rho bias
/// is known from the potential model.
inline double model_limit(const std::vector<double>& rhos,
                          const std::vector<double>& values, double t) {
    const std::size_t n = values.size();
    if (n < 2) return values.empty() ? 0.0 : values.back();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double x = std::pow(rhos[j], t);
        sx += x;
        sy += values[j];
        sxx += x * x;
        sxy += x * values[j];
    }
    const double denom = n * sxx - sx * sx;
    if (denom <= 0.0) return values.back();
    const double c = (n * sxy - sx * sy) / denom;
    return (sy - c * sx) / static_cast<double>(n);
}

/// Extrapolated limit of a scalar geometric sequence from its last
/// three terms.
inline double scalar_limit(const std::vector<double>& seq) {
    const std::size_t n = seq.size();
    if (n < 3) return seq.empty() ? 0.0 : seq.back();
    const double d1 = seq[n - 2] - seq[n - 3];
    const double d2 = seq[n - 1] - seq[n - 2];
    double q = d1 != 0.0 ? d2 / d1 : 0.0;
    q = std::clamp(q, 0.0, 0.9);
    return seq[n - 1] + d2 * q / (1.0 - q);
}

}  // namespace detail

/// Cutoff-ladder solve for a singular potential and measure data.
/// Sign-changing measures are split into positive and negative parts
/// (each ladder is then monotone) and recombined linearly.
inline CsolaReport csola(const GreenKernel& kernel, const QuadGrid& grid,
                         const GreenMatrix& m, const Potential& v,
                         const RadonMeasure& mu, const CsolaOptions& opts = {}) {
    v.validate();
    mu.validate(grid);
    const std::size_t n = grid.size();

    bool has_negative = false;
    for (double d : mu.density) has_negative |= d < 0.0;
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
        CsolaReport rp = csola(kernel, grid, m, v, pos, opts);
        CsolaReport rn = csola(kernel, grid, m, v, neg, opts);
        CsolaReport report = rp;
        for (std::size_t i = 0; i < n; ++i) report.u_limit[i] -= rn.u_limit[i];
        for (std::size_t a = 0; a < report.alphas.size(); ++a) {
            report.alphas[a].mass_balance -= rn.alphas[a].mass_balance;
            report.alphas[a].scaling -= rn.alphas[a].scaling;
            report.alphas[a].consensus -= rn.alphas[a].consensus;
            report.alphas[a].agree &= rn.alphas[a].agree;
        }
        report.mu_reduced.density = mu.density;
        report.mu_reduced.atoms.clear();
        for (const auto& a : mu.atoms) {
            bool at_z = false;
            for (const auto& est : report.alphas)
                if ((est.point - a.location).norm() < 1e-9 &&
                    std::abs(est.consensus) >= opts.alpha_solution)
                    at_z = true;
            if (!at_z) report.mu_reduced.atoms.push_back(a);
        }
        report.is_solution = rp.is_solution && rn.is_solution;
        report.inconclusive = rp.inconclusive || rn.inconclusive;
        report.vu_l1_running_max =
            std::max(rp.vu_l1_running_max, rn.vu_l1_running_max);
        return report;
    }

    std::vector<double> cutoffs =
        opts.cutoffs.empty() ? detail::default_cutoffs(v) : opts.cutoffs;
    std::vector<double> rho_ladder = opts.rho_ladder;
    if (rho_ladder.empty())
        for (double rho = 0.25; rho >= grid.min_probe_radius(); rho *= 0.5)
            rho_ladder.push_back(rho);
    if (rho_ladder.empty()) rho_ladder.push_back(grid.min_probe_radius());

    CsolaReport report;
    std::vector<std::vector<double>> iterates;
    std::vector<std::vector<double>> vu_iterates;
    std::vector<double> u_prev;
    for (double k : cutoffs) {
        const std::vector<double> vk = truncate(v, grid, k);
        SolveReport sr = solve_bounded_direct(kernel, grid, m, vk, mu);
        LadderPoint pt;
        pt.cutoff = k;
        pt.u_l1 = detail::l1_norm(grid, sr.u);
        if (!u_prev.empty()) {
            double diff = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                diff += grid.weights[i] * std::abs(sr.u[i] - u_prev[i]);
            pt.delta_l1 = diff;
        }
        pt.vu_l1 = detail::l1_norm(grid, sr.vu);
        report.vu_l1_running_max = std::max(report.vu_l1_running_max, pt.vu_l1);
        report.ladder.push_back(pt);
        iterates.push_back(sr.u);
        vu_iterates.push_back(sr.vu);
        u_prev = std::move(sr.u);
    }

    const std::size_t nl = iterates.size();
    report.u_limit =
        nl >= 3 ? detail::richardson(iterates[nl - 3], iterates[nl - 2],
                                     iterates[nl - 1])
                : iterates.back();

    // concentration masses at the singular points of the potential
    const double two_s = 2.0 * kernel.order_s();
    for (const auto& sing : v.singular) {
        AlphaEstimate est;
        est.point = sing.point;
        const double atom_mass = mu.atom_mass_at(sing.point);

        RadonMeasure delta = RadonMeasure::dirac(sing.point, 1.0, n);
        const std::vector<double> gdelta =
            apply_measure(kernel, grid, m, delta);

        // (a) mass balance: int_{B_rho} V_k u_k extrapolated in k at
        // each rho (the cell-averaged truncation saturates, so the k
        // sequence converges), then extrapolated down the rho ladder;
        // the regular part of V u decays like a power of rho while a
        // concentration mass stays.
        // (b) scaling: atom mass minus the locally surviving part of
        // u_limit, calibrated against the same local functional of
        // G(delta_x) so the quadrature bias cancels in the ratio. The
        // finite-rho bias of this reading scales like rho^|2s - beta|
        // under the power-law model, so the rho-limit is taken by a
        // least-squares fit in that variable.
        std::vector<double> mb_rho, sc_rho, rhos_eff;
        for (double rho : rho_ladder) {
            const double rho_eff = std::max(rho, grid.min_probe_radius());
            rhos_eff.push_back(rho_eff);
            std::vector<double> in_k;
            for (std::size_t j = 0; j < nl; ++j)
                in_k.push_back(ball_integral(grid, vu_iterates[j], sing.point,
                                             rho_eff)
                                   .value);
            mb_rho.push_back(detail::scalar_limit(in_k));

            const double scale = std::pow(rho_eff, two_s);
            const double cal =
                ball_integral(grid, gdelta, sing.point, rho_eff).value / scale;
            const double local =
                ball_integral(grid, report.u_limit, sing.point, rho_eff)
                    .value /
                scale;
            est.calibration = cal;
            sc_rho.push_back(cal > 0.0 ? atom_mass - local / cal : atom_mass);
        }
        est.mass_balance = detail::scalar_limit(mb_rho);
        const double bias_t = std::max(std::abs(two_s - sing.beta), 0.25);
        est.scaling = detail::model_limit(rhos_eff, sc_rho, bias_t);

        est.agree =
            std::abs(est.mass_balance - est.scaling) <= opts.alpha_consensus;
        double combined = est.agree
                              ? 0.5 * (est.mass_balance + est.scaling)
                              : est.mass_balance;
        est.consensus = std::clamp(combined, 0.0, std::max(atom_mass, 0.0));
        report.alphas.push_back(est);
    }

    report.inconclusive = false;
    report.is_solution = true;
    for (const auto& est : report.alphas) {
        report.inconclusive |= !est.agree;
        report.is_solution &= est.consensus < opts.alpha_solution;
    }

    // reduced measure: drop atoms whose concentration mass is
    // non-negligible (those data atoms never reach the limit)
    report.mu_reduced.density = mu.density;
    for (const auto& a : mu.atoms) {
        bool concentrated = false;
        for (const auto& est : report.alphas)
            if ((est.point - a.location).norm() < 1e-9 &&
                est.consensus >= opts.alpha_solution)
                concentrated = true;
        if (!concentrated) report.mu_reduced.atoms.push_back(a);
    }
    return report;
}

}  // namespace greensolve
