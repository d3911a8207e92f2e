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
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "greensolve/green_kernel.hpp"
#include "greensolve/measures.hpp"
#include "greensolve/quad_grid.hpp"

namespace greensolve {

/// Dense discretization of the Green operator on a QuadGrid.
///
/// entries(i,j) ~ G(x_i, x_j) w_j with the near field integrated over
/// the quadrature cells instead of sampled at nodes (point sampling of
/// the singular kernel is badly wrong for neighboring cells). The
/// boundary decay (delta_i delta_j)^gamma is factored out before cell
/// averaging so the averaged part varies mildly across boundary cells.
struct GreenMatrix {
    Eigen::MatrixXd entries;
    Eigen::VectorXd diag_correction;  // per-node integral of G(x_i, .) over cell_i
    std::array<std::uint8_t, 32> grid_hash{};
    int dim = 3;
    double order_s = 1.0;
    KernelVariant variant = KernelVariant::Classical;

    Eigen::Index size() const { return entries.rows(); }
};

struct AssemblyOptions {
    double near_window = 2.0;  // pairs closer than this many cell diameters
                               // get cell-averaged entries
    int max_depth = 7;         // recursive subdivision depth near the singularity
    int leaf_order = 3;        // tensor Gauss order on leaf boxes
};

namespace detail {

/// Integral of strength(x, y) over a spherical box, subdividing
/// toward the (possible) singularity at y = x. The boundary factors
/// are frozen at the cell nodes by the caller; the strength itself is
/// mild across boundary cells, which keeps the frozen-factor error
/// far below the near-field averaging error.
class CellIntegrator {
  public:
    CellIntegrator(const GreenKernel& kernel, const AssemblyOptions& opts)
        : kernel_(kernel), opts_(opts),
          leaf_rule_(gauss_legendre(opts.leaf_order, 0.0, 1.0)) {}

    double integrate(const Vec3& x, const SphericalCell& cell) const {
        // The coordinate origin belongs to every angular sliver with
        // r_lo = 0; handle it by exact radial substitution instead of
        // subdivision (which cannot localize an apex singularity).
        if (x.norm() < 1e-14 && cell.r_lo <= 0.0)
            return apex_integral(cell);
        return recurse(x, cell, 0);
    }

  private:
    /// Integral of strength(0, .) over a cell touching r = 0. The
    /// integrand is radially symmetric and behaves like r^(2s-1); the
    /// substitution u = (r/r_hi)^(2s) makes it smooth.
    double apex_integral(const SphericalCell& cell) const {
        const double two_s = 2.0 * kernel_.order_s();
        const int n = 24;
        const QuadratureRule rule = gauss_legendre(n, 0.0, 1.0);
        const double angular = (cell.c_hi - cell.c_lo) * (cell.p_hi - cell.p_lo);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double u = rule.nodes[i];
            const double r = cell.r_hi * std::pow(u, 1.0 / two_s);
            const double dr =
                cell.r_hi / two_s * std::pow(u, 1.0 / two_s - 1.0);
            const Vec3 y(r, 0.0, 0.0);
            acc += rule.weights[i] * kernel_.strength(Vec3::Zero(), y) *
                   angular * r * r * dr;
        }
        return acc;
    }

    static bool contains(const Vec3& x, const SphericalCell& cell) {
        const double r = x.norm();
        if (r < cell.r_lo || r > cell.r_hi) return false;
        const double c = r > 0.0 ? x.z() / r : 0.0;
        if (c < cell.c_lo || c > cell.c_hi) return false;
        double phi = std::atan2(x.y(), x.x());
        while (phi < cell.p_lo) phi += 2.0 * std::numbers::pi;
        while (phi >= cell.p_lo + 2.0 * std::numbers::pi)
            phi -= 2.0 * std::numbers::pi;
        return phi <= cell.p_hi;
    }

    double recurse(const Vec3& x, const SphericalCell& cell, int depth) const {
        const double diam = cell.diameter();
        const double dist = (x - cell.center()).norm();
        const double closest = std::max(0.0, dist - 0.5 * diam);
        // A box spanning a large angular range (the origin cell is a
        // full sphere) is never a valid leaf: the tensor rule cannot
        // track the integrand around the circle. Split it first.
        const bool wide = cell.p_hi - cell.p_lo >
                              0.5 * std::numbers::pi + 1e-12 ||
                          cell.c_hi - cell.c_lo > 1.0 + 1e-12;
        if (!wide && closest > 0.75 * diam) return leaf(x, cell);
        if (depth >= opts_.max_depth) {
            if (contains(x, cell)) return singular_leaf(x, cell);
            return leaf(x, cell);
        }
        const double rm = 0.5 * (cell.r_lo + cell.r_hi);
        const double cm = 0.5 * (cell.c_lo + cell.c_hi);
        const double pm = 0.5 * (cell.p_lo + cell.p_hi);
        double acc = 0.0;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int c = 0; c < 2; ++c) {
                    SphericalCell sub;
                    sub.r_lo = a ? rm : cell.r_lo;
                    sub.r_hi = a ? cell.r_hi : rm;
                    sub.c_lo = b ? cm : cell.c_lo;
                    sub.c_hi = b ? cell.c_hi : cm;
                    sub.p_lo = c ? pm : cell.p_lo;
                    sub.p_hi = c ? cell.p_hi : pm;
                    acc += recurse(x, sub, depth + 1);
                }
        return acc;
    }

    double leaf(const Vec3& x, const SphericalCell& cell) const {
        const int n = opts_.leaf_order;
        double acc = 0.0;
        for (int a = 0; a < n; ++a) {
            const double r = cell.r_lo + (cell.r_hi - cell.r_lo) * leaf_rule_.nodes[a];
            const double wr = (cell.r_hi - cell.r_lo) * leaf_rule_.weights[a];
            for (int b = 0; b < n; ++b) {
                const double c =
                    cell.c_lo + (cell.c_hi - cell.c_lo) * leaf_rule_.nodes[b];
                const double wc = (cell.c_hi - cell.c_lo) * leaf_rule_.weights[b];
                const double st = std::sqrt(std::max(1.0 - c * c, 0.0));
                for (int d = 0; d < n; ++d) {
                    const double p =
                        cell.p_lo + (cell.p_hi - cell.p_lo) * leaf_rule_.nodes[d];
                    const double wp =
                        (cell.p_hi - cell.p_lo) * leaf_rule_.weights[d];
                    const Vec3 y(r * st * std::cos(p), r * st * std::sin(p),
                                 r * c);
                    acc += wr * wc * wp * r * r * kernel_.strength(x, y);
                }
            }
        }
        return acc;
    }

    /// Leading Riesz term over the equivalent ball of a deepest-level
    /// box containing the singularity; the subleading part is bounded
    /// and its omission is far below the leaf volume scale.
    double singular_leaf(const Vec3& x, const SphericalCell& cell) const {
        const double two_s = 2.0 * kernel_.order_s();
        const double h =
            std::cbrt(3.0 * cell.volume() / (4.0 * std::numbers::pi));
        const double dx = 1.0 - x.norm();
        const double gamma = kernel_.boundary_gamma();
        // strength = G / (delta_x delta_y)^gamma; near y = x both
        // boundary factors equal delta_x^gamma
        return kernel_.free_space_constant() * 4.0 * std::numbers::pi *
               std::pow(h, two_s) / two_s / std::pow(dx, 2.0 * gamma);
    }

    const GreenKernel& kernel_;
    const AssemblyOptions& opts_;
    QuadratureRule leaf_rule_;
};

}  // namespace detail

/// Assembles the dense Green matrix. Rows are independent; the result
/// is immutable and safe for concurrent reads.
inline GreenMatrix assemble(const GreenKernel& kernel, const QuadGrid& grid,
                            const AssemblyOptions& opts = {}) {
    if (kernel.dim() != grid.dim)
        throw std::invalid_argument("assemble: kernel/grid dimension mismatch");
    if (kernel.dim() - 2.0 * kernel.order_s() <= 0.0)
        throw std::invalid_argument("assemble: requires n - 2s > 0");

    const auto n = static_cast<Eigen::Index>(grid.size());
    GreenMatrix m;
    m.entries.resize(n, n);
    m.diag_correction.resize(n);
    m.grid_hash = grid.hash;
    m.dim = kernel.dim();
    m.order_s = kernel.order_s();
    m.variant = kernel.variant();

    const double gamma = kernel.boundary_gamma();
    std::vector<double> dgamma(grid.size());
    std::vector<double> diam(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        dgamma[i] = std::pow(grid.boundary_dist[i], gamma);
        diam[i] = grid.cells[i].diameter();
    }

    detail::CellIntegrator integrator(kernel, opts);

    // Far field: strength at node pairs. Near field: symmetric pair
    // average of the strength over the two cells.
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double dist = (grid.nodes[i] - grid.nodes[j]).norm();
            double bar;
            if (dist < opts.near_window * std::max(diam[i], diam[j])) {
                const double a =
                    integrator.integrate(grid.nodes[i], grid.cells[j]) /
                    grid.cells[j].volume();
                const double b =
                    integrator.integrate(grid.nodes[j], grid.cells[i]) /
                    grid.cells[i].volume();
                bar = 0.5 * (a + b);
            } else {
                bar = kernel.strength(grid.nodes[i], grid.nodes[j]);
            }
            const double common = dgamma[i] * dgamma[j] * bar;
            m.entries(i, j) = common * grid.weights[j];
            m.entries(j, i) = common * grid.weights[i];
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const double self =
            integrator.integrate(grid.nodes[i], grid.cells[i]);
        const double bar = self / grid.cells[i].volume();
        m.entries(i, i) = dgamma[i] * dgamma[i] * bar * grid.weights[i];
        m.diag_correction(i) = dgamma[i] * dgamma[i] * self;
    }
    return m;
}

/// G(f): plain matrix-vector product against per-node values.
inline std::vector<double> apply_density(const GreenMatrix& m,
                                         const std::vector<double>& f) {
    if (static_cast<Eigen::Index>(f.size()) != m.size())
        throw std::invalid_argument("apply_density: size mismatch");
    for (double v : f)
        if (!std::isfinite(v))
            throw std::invalid_argument("apply_density: non-finite input");
    Eigen::VectorXd fv = Eigen::Map<const Eigen::VectorXd>(f.data(), m.size());
    Eigen::VectorXd out = m.entries * fv;
    return {out.data(), out.data() + out.size()};
}

/// G(mu) for a Radon measure: density part through the matrix, atoms
/// through exact kernel columns (atoms are never smeared onto the grid).
inline std::vector<double> apply_measure(const GreenKernel& kernel,
                                         const QuadGrid& grid,
                                         const GreenMatrix& m,
                                         const RadonMeasure& mu) {
    std::vector<double> out = apply_density(m, mu.density);
    for (const auto& atom : mu.atoms) {
        if (atom.location.norm() >= 1.0)
            throw std::domain_error("apply_measure: atom outside the domain");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double dist = (grid.nodes[i] - atom.location).norm();
            double column;
            if (dist < 1e-12) {
                column = m.diag_correction(static_cast<Eigen::Index>(i)) /
                         grid.weights[i];
            } else {
                column = kernel.eval(grid.nodes[i], atom.location);
            }
            out[i] += atom.mass * column;
        }
    }
    return out;
}

/// Discrete L^p norm with the grid weights; p = infinity as max.
inline double lp_norm(const QuadGrid& grid, const std::vector<double>& u,
                      double p) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : u) m = std::max(m, std::abs(v));
        return m;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        acc += grid.weights[i] * std::pow(std::abs(u[i]), p);
    return std::pow(acc, 1.0 / p);
}

/// lhs = int_A |G(f)|, rhs = C |A|^beta ||f||_L1 with beta = s/n.
/// C is calibrated once per matrix from ||G(1)||_Linf.
struct EquiintegrabilityProbe {
    double lhs = 0.0;
    double rhs_bound = 0.0;
};

inline EquiintegrabilityProbe equiintegrability_probe(
    const GreenMatrix& m, const QuadGrid& grid, const std::vector<double>& f,
    const std::vector<std::size_t>& subset) {
    if (subset.empty())
        throw std::invalid_argument("equiintegrability_probe: empty subset");
    const std::vector<double> gf = apply_density(m, f);
    EquiintegrabilityProbe probe;
    double subset_measure = 0.0;
    for (std::size_t i : subset) {
        probe.lhs += grid.weights[i] * std::abs(gf[i]);
        subset_measure += grid.weights[i];
    }
    const std::vector<double> ones(grid.size(), 1.0);
    const double g1_inf = lp_norm(grid, apply_density(m, ones),
                                  std::numeric_limits<double>::infinity());
    const double beta = m.order_s / m.dim;
    const double omega = std::accumulate(grid.weights.begin(),
                                         grid.weights.end(), 0.0);
    const double calib = 2.0 * g1_inf / std::pow(omega, beta);
    probe.rhs_bound = calib * std::pow(subset_measure, beta) *
                      lp_norm(grid, f, 1.0);
    return probe;
}

/// Ratio ||G(f)||_q / ||f||_p over random sign-changing data and over
/// the concentrating indicator family.
struct RegularizationProbe {
    double max_ratio = 0.0;
    std::vector<std::pair<double, double>> concentration_ladder;  // (rho, ratio)
};

inline RegularizationProbe regularization_probe(const GreenMatrix& m,
                                                const QuadGrid& grid, double p,
                                                double q, int trials,
                                                std::uint64_t seed = 0) {
    const double big_q = std::isinf(p)
                             ? std::numeric_limits<double>::infinity()
                             : m.dim / (m.dim - 2.0 * m.order_s) * p;
    if (q >= big_q && !(std::isinf(p) && std::isinf(q)))
        throw std::invalid_argument(
            "regularization_probe: q >= Q(p) = np/(n-2s); the bound is sharp "
            "and the ratio diverges under refinement at or above Q(p)");
    RegularizationProbe probe;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int t = 0; t < trials; ++t) {
        std::vector<double> f(grid.size());
        for (auto& v : f) v = gauss(rng);
        const double ratio =
            lp_norm(grid, apply_density(m, f), q) / lp_norm(grid, f, p);
        probe.max_ratio = std::max(probe.max_ratio, ratio);
    }
    const double rho_min = grid.min_probe_radius();
    // Start the ladder at rho = 0.25: the largest indicator balls see
    // the domain boundary and measure geometry rather than the local
    // scaling of the kernel.
    for (double rho = 0.25; rho >= rho_min; rho *= 0.5) {
        std::vector<double> f(grid.size(), 0.0);
        double captured = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (grid.nodes[i].norm() <= rho) {
                f[i] = 1.0;
                captured += grid.weights[i];
            }
        if (captured == 0.0) break;
        for (auto& v : f) v /= captured;  // normalized indicator, ||f||_1 = 1
        const double ratio =
            lp_norm(grid, apply_density(m, f), q) / lp_norm(grid, f, p);
        probe.concentration_ladder.emplace_back(rho, ratio);
        probe.max_ratio = std::max(probe.max_ratio, ratio);
    }
    return probe;
}

/// Per-rho record of the local scaling of G(1_{B_rho}(x0)).
struct IndicatorScalingRecord {
    double rho = 0.0;
    bool clamped = false;
    double value_at_x0 = 0.0;   // G(1_B)(x0) / rho^(2s)
    double l1_norm = 0.0;       // ||G(1_B)||_L1 / rho^(2s)
    double value_far = 0.0;     // G(1_B)(far point) / rho^(2s)
};

inline std::vector<IndicatorScalingRecord> indicator_scaling(
    const GreenKernel& kernel, const QuadGrid& grid, const GreenMatrix& m,
    const Vec3& x0, const std::vector<double>& rho_ladder) {
    // far probe point: 0.5 away from x0, toward the origin when possible
    Vec3 dir = x0.norm() > 1e-12 ? Vec3(-x0.normalized()) : Vec3(1.0, 0.0, 0.0);
    const Vec3 far_point = x0 + 0.5 * dir;
    std::size_t i_x0 = 0, i_far = 0;
    double best0 = 1e300, bestf = 1e300;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d0 = (grid.nodes[i] - x0).norm();
        const double df = (grid.nodes[i] - far_point).norm();
        if (d0 < best0) { best0 = d0; i_x0 = i; }
        if (df < bestf) { bestf = df; i_far = i; }
    }
    const double rho_min = grid.min_probe_radius();
    const double two_s = 2.0 * kernel.order_s();
    std::vector<IndicatorScalingRecord> records;
    for (double rho : rho_ladder) {
        IndicatorScalingRecord rec;
        rec.rho = std::max(rho, rho_min);
        rec.clamped = rho < rho_min;
        std::vector<double> f(grid.size(), 0.0);
        for (std::size_t i = 0; i < grid.size(); ++i)
            if ((grid.nodes[i] - x0).norm() <= rec.rho) f[i] = 1.0;
        const std::vector<double> gf = apply_density(m, f);
        const double scale = std::pow(rec.rho, two_s);
        rec.value_at_x0 = gf[i_x0] / scale;
        rec.l1_norm = lp_norm(grid, gf, 1.0) / scale;
        rec.value_far = gf[i_far] / scale;
        records.push_back(rec);
    }
    return records;
}

// ---------------------------------------------------------------------------
// Kernel cache file
//
// Header: magic "GRNK", version u32, dim u32, s f64, variant u8,
// grid hash 32 bytes, N u64; then N^2 little-endian f64 entries
// row-major, then N f64 diagonal corrections.
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kCacheVersion = 1;

inline void write_cache(const std::string& path, const GreenMatrix& m) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_cache: cannot open " + path);
    out.write("GRNK", 4);
    auto put = [&out](const void* p, std::size_t n) {
        out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    };
    const std::uint32_t version = kCacheVersion;
    const std::uint32_t dim = static_cast<std::uint32_t>(m.dim);
    const double s = m.order_s;
    const std::uint8_t variant = m.variant == KernelVariant::Classical ? 0 : 1;
    const std::uint64_t n = static_cast<std::uint64_t>(m.size());
    put(&version, 4);
    put(&dim, 4);
    put(&s, 8);
    put(&variant, 1);
    put(m.grid_hash.data(), 32);
    put(&n, 8);
    std::vector<double> row(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        for (std::uint64_t j = 0; j < n; ++j)
            row[j] = m.entries(static_cast<Eigen::Index>(i),
                               static_cast<Eigen::Index>(j));
        put(row.data(), sizeof(double) * n);
    }
    put(m.diag_correction.data(), sizeof(double) * n);
    if (!out) throw std::runtime_error("write_cache: write failed: " + path);
}

/// Returns the cached matrix when the header matches exactly, otherwise
/// std::nullopt (missing file, wrong version, or mismatched parameters).
inline std::optional<GreenMatrix> read_cache(const std::string& path,
                                             const GreenKernel& kernel,
                                             const QuadGrid& grid) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "GRNK") return std::nullopt;
    std::uint32_t version = 0, dim = 0;
    double s = 0;
    std::uint8_t variant = 0;
    std::array<std::uint8_t, 32> hash{};
    std::uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&dim), 4);
    in.read(reinterpret_cast<char*>(&s), 8);
    in.read(reinterpret_cast<char*>(&variant), 1);
    in.read(reinterpret_cast<char*>(hash.data()), 32);
    in.read(reinterpret_cast<char*>(&n), 8);
    if (!in) return std::nullopt;
    const std::uint8_t want_variant =
        kernel.variant() == KernelVariant::Classical ? 0 : 1;
    if (version != kCacheVersion || dim != static_cast<std::uint32_t>(kernel.dim()) ||
        s != kernel.order_s() || variant != want_variant || hash != grid.hash ||
        n != grid.size())
        return std::nullopt;
    GreenMatrix m;
    m.dim = static_cast<int>(dim);
    m.order_s = s;
    m.variant = kernel.variant();
    m.grid_hash = hash;
    m.entries.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::vector<double> row(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(sizeof(double) * n));
        for (std::uint64_t j = 0; j < n; ++j)
            m.entries(static_cast<Eigen::Index>(i),
                      static_cast<Eigen::Index>(j)) = row[j];
    }
    m.diag_correction.resize(static_cast<Eigen::Index>(n));
    in.read(reinterpret_cast<char*>(m.diag_correction.data()),
            static_cast<std::streamsize>(sizeof(double) * n));
    if (!in) return std::nullopt;
    return m;
}

}  // namespace greensolve
