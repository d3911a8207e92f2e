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

// Batch experiment runner: parses a declarative JSON config, assembles
// (or loads from cache) the Green matrix, runs the requested pipeline
// stage, and emits a JSON report plus plot-ready CSV tables.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "greensolve/config.hpp"
#include "greensolve/csola.hpp"
#include "greensolve/diagnostics.hpp"
#include "greensolve/green_matrix.hpp"
#include "greensolve/report.hpp"
#include "greensolve/solver.hpp"

namespace gs = greensolve;

namespace {

struct Session {
    gs::ExperimentConfig cfg;
    gs::QuadGrid grid;
    gs::GreenKernel kernel;
    gs::GreenMatrix matrix;
    bool from_cache = false;
    std::string cache_path;
};

std::string cache_file_name(const gs::ExperimentConfig& cfg,
                            const gs::QuadGrid& grid) {
    char sbuf[32];
    std::snprintf(sbuf, sizeof(sbuf), "%g", cfg.kernel.s);
    return cfg.cache_dir + "/" + cfg.kernel.variant + "_s" + sbuf + "_" +
           gs::hash_hex(grid.hash).substr(0, 16) + ".grnk";
}

Session open_session(const std::string& config_path,
                     const std::optional<std::uint64_t>& seed_override,
                     const std::string& cache_dir_override) {
    gs::ExperimentConfig cfg = gs::load_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (!cache_dir_override.empty()) cfg.cache_dir = cache_dir_override;

    gs::QuadGrid grid = cfg.make_grid();
    gs::GreenKernel kernel = cfg.make_kernel();

    Session s{std::move(cfg), std::move(grid), std::move(kernel), {}, false, ""};
    if (!s.cfg.cache_dir.empty()) {
        std::filesystem::create_directories(s.cfg.cache_dir);
        s.cache_path = cache_file_name(s.cfg, s.grid);
        if (auto cached = gs::read_cache(s.cache_path, s.kernel, s.grid)) {
            s.matrix = std::move(*cached);
            s.from_cache = true;
            return s;
        }
        if (std::filesystem::exists(s.cache_path))
            std::cerr << "warning: cache " << s.cache_path
                      << " does not match the config; rebuilding\n";
    }
    s.matrix = gs::assemble(s.kernel, s.grid);
    if (!s.cache_path.empty()) gs::write_cache(s.cache_path, s.matrix);
    return s;
}

gs::Report header_report(const Session& s, const std::string& subcommand) {
    gs::Report h = gs::Report::object();
    h.set("subcommand", subcommand);
    h.set("seed", static_cast<long long>(s.cfg.seed));
    gs::Report g = gs::Report::object();
    g.set("dim", s.grid.dim);
    g.set("radial_count", s.grid.radial_count);
    g.set("angular_count", s.grid.angular_count);
    g.set("nodes", s.grid.size());
    g.set("hash", gs::hash_hex(s.grid.hash));
    h.set("grid", std::move(g));
    gs::Report k = gs::Report::object();
    k.set("variant", s.cfg.kernel.variant);
    k.set("s", s.kernel.order_s());
    h.set("kernel", std::move(k));
    if (!s.cache_path.empty()) {
        h.set("cache_path", s.cache_path);
        h.set("matrix_from_cache", s.from_cache);
    }
    return h;
}

void emit(const Session& s, const gs::Report& report,
          const std::string& tables) {
    const std::string text = report.dump();
    if (s.cfg.outputs.report_path.empty()) {
        std::cout << text;
    } else {
        gs::atomic_write_file(s.cfg.outputs.report_path, text);
    }
    if (!tables.empty() && !s.cfg.outputs.tables_path.empty())
        gs::atomic_write_file(s.cfg.outputs.tables_path, tables);
}

gs::CsolaOptions csola_options(const gs::ExperimentConfig& cfg) {
    gs::CsolaOptions opts;
    opts.cutoffs = cfg.ladders.cutoffs;
    opts.rho_ladder = cfg.ladders.rho_ladder;
    opts.alpha_solution = cfg.tolerances.alpha_solution;
    opts.alpha_consensus = cfg.tolerances.alpha_consensus;
    return opts;
}

int run_assemble(const Session& s) {
    gs::Report report = header_report(s, "assemble");
    double min_entry = 1e300, max_entry = -1e300;
    for (Eigen::Index i = 0; i < s.matrix.size(); ++i)
        for (Eigen::Index j = 0; j < s.matrix.size(); ++j) {
            min_entry = std::min(min_entry, s.matrix.entries(i, j));
            max_entry = std::max(max_entry, s.matrix.entries(i, j));
        }
    report.set("min_entry", min_entry);
    report.set("max_entry", max_entry);
    emit(s, report, "");
    return 0;
}

int run_solve(const Session& s) {
    const gs::RadonMeasure mu = gs::make_measure(s.cfg, s.grid);
    gs::SolveReport sr;
    if (s.cfg.potential.bounded()) {
        const std::vector<double> vk =
            gs::truncate(s.cfg.potential, s.grid,
                         std::max(1.0, s.cfg.potential.background_sup()));
        sr = gs::solve_bounded_direct(s.kernel, s.grid, s.matrix, vk, mu);
    } else {
        if (!mu.atoms.empty())
            throw std::runtime_error(
                "solve: atoms with a singular potential need the csola "
                "subcommand");
        sr = gs::solve_l1(s.kernel, s.grid, s.matrix, s.cfg.potential,
                          mu.density, s.cfg.tolerances.solver_tol);
    }
    gs::Report report = header_report(s, "solve");
    report.set("u_l1", gs::lp_norm(s.grid, sr.u, 1.0));
    report.set("u_linf",
               gs::lp_norm(s.grid, sr.u,
                           std::numeric_limits<double>::infinity()));
    report.set("u_at_origin",
               gs::detail::interpolate_at(s.grid, sr.u, gs::Vec3::Zero()));
    report.set("residual", sr.residual);
    report.set("iterations", sr.iterations);
    report.set("u", sr.u);

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < s.grid.size(); ++i)
        rows.push_back({static_cast<double>(i), s.grid.nodes[i].norm(),
                        sr.u[i]});
    emit(s, report, gs::format_csv({"node", "radius", "u"}, rows));
    return 0;
}

int run_csola(const Session& s) {
    const gs::RadonMeasure mu = gs::make_measure(s.cfg, s.grid);
    const gs::CsolaReport cr = gs::csola(s.kernel, s.grid, s.matrix,
                                         s.cfg.potential, mu,
                                         csola_options(s.cfg));
    gs::Report report = header_report(s, "csola");
    report.set("is_solution", cr.is_solution);
    report.set("inconclusive", cr.inconclusive);
    report.set("vu_l1_running_max", cr.vu_l1_running_max);
    report.set("u_limit_l1", gs::lp_norm(s.grid, cr.u_limit, 1.0));

    gs::Report alphas = gs::Report::array();
    for (const auto& a : cr.alphas) {
        gs::Report row = gs::Report::object();
        row.set("point", a.point);
        row.set("mass_balance", a.mass_balance);
        row.set("scaling", a.scaling);
        row.set("consensus", a.consensus);
        row.set("agree", a.agree);
        row.set("calibration", a.calibration);
        alphas.push_back(std::move(row));
    }
    report.set("alphas", std::move(alphas));

    gs::Report reduced = gs::Report::object();
    gs::Report reduced_atoms = gs::Report::array();
    for (const auto& a : cr.mu_reduced.atoms) {
        gs::Report row = gs::Report::object();
        row.set("point", a.location);
        row.set("mass", a.mass);
        reduced_atoms.push_back(std::move(row));
    }
    reduced.set("atoms", std::move(reduced_atoms));
    reduced.set("density_l1",
                gs::lp_norm(s.grid, cr.mu_reduced.density, 1.0));
    report.set("mu_reduced", std::move(reduced));

    gs::Report ladder = gs::Report::array();
    std::vector<std::vector<double>> rows;
    for (const auto& pt : cr.ladder) {
        gs::Report row = gs::Report::object();
        row.set("cutoff", pt.cutoff);
        row.set("u_l1", pt.u_l1);
        row.set("delta_l1", pt.delta_l1);
        row.set("vu_l1", pt.vu_l1);
        ladder.push_back(std::move(row));
        rows.push_back({pt.cutoff, pt.u_l1, pt.delta_l1, pt.vu_l1});
    }
    report.set("ladder", std::move(ladder));
    report.set("u_limit", cr.u_limit);
    emit(s, report,
         gs::format_csv({"cutoff", "u_l1", "delta_l1", "vu_l1"}, rows));
    return 0;
}

int run_ztest(const Session& s) {
    gs::ZSuiteOptions opts;
    opts.csola = csola_options(s.cfg);
    opts.seed = s.cfg.seed;
    const gs::ZEquivalenceReport zr = gs::z_equivalence_suite(
        s.kernel, s.grid, s.matrix, s.cfg.potential, opts);
    gs::Report report = header_report(s, "ztest");
    report.set("all_agree", zr.all_agree);

    gs::Report z_points = gs::Report::array();
    for (const auto& p : zr.z_report().z_points()) z_points.push_back(p);
    report.set("z_points", std::move(z_points));

    gs::Report rows = gs::Report::array();
    std::vector<std::vector<double>> csv;
    for (const auto& r : zr.rows) {
        gs::Report row = gs::Report::object();
        row.set("point", r.point);
        row.set("beta", r.beta);
        row.set("borderline", r.borderline);
        row.set("in_z", r.in_z());
        row.set("agree", r.agree());
        gs::Report verdicts = gs::Report::object();
        verdicts.set("column", r.column);
        verdicts.set("transpose", r.transpose);
        verdicts.set("bounded_data", r.bounded_data);
        verdicts.set("gv_one", r.gv_one);
        verdicts.set("analytic", r.analytic);
        row.set("verdicts", std::move(verdicts));
        gs::Report ratios = gs::Report::object();
        ratios.set("column", r.column_ratio);
        ratios.set("transpose", r.transpose_ratio);
        ratios.set("bounded_data", r.bounded_ratio);
        ratios.set("gv_one", r.gv_one_ratio);
        row.set("ratios", std::move(ratios));
        rows.push_back(std::move(row));
        csv.push_back({r.beta, r.column_ratio, r.transpose_ratio,
                       r.bounded_ratio, r.gv_one_ratio,
                       r.in_z() ? 1.0 : 0.0});
    }
    report.set("evidence", std::move(rows));
    emit(s, report,
         gs::format_csv({"beta", "column_ratio", "transpose_ratio",
                         "bounded_ratio", "gv_one_ratio", "in_z"},
                        csv));
    return zr.all_agree ? 0 : 3;
}

int run_scaling(const Session& s) {
    const gs::Vec3 x0 = s.cfg.potential.singular.empty()
                            ? gs::Vec3::Zero()
                            : s.cfg.potential.singular.front().point;
    std::vector<double> rho_ladder = s.cfg.ladders.rho_ladder;
    if (rho_ladder.empty())
        for (double rho = 0.5; rho >= s.grid.min_probe_radius(); rho *= 0.5)
            rho_ladder.push_back(rho);

    const auto records =
        gs::indicator_scaling(s.kernel, s.grid, s.matrix, x0, rho_ladder);
    const std::vector<double> gdelta = gs::apply_measure(
        s.kernel, s.grid, s.matrix,
        gs::RadonMeasure::dirac(x0, 1.0, s.grid.size()));
    const double two_s = 2.0 * s.kernel.order_s();

    gs::Report report = header_report(s, "scaling");
    report.set("x0", x0);
    gs::Report rows = gs::Report::array();
    std::vector<std::vector<double>> csv;
    for (const auto& rec : records) {
        const double cal =
            gs::ball_integral(s.grid, gdelta, x0, rec.rho).value /
            std::pow(rec.rho, two_s);
        gs::Report row = gs::Report::object();
        row.set("rho", rec.rho);
        row.set("clamped", rec.clamped);
        row.set("indicator_value_at_x0", rec.value_at_x0);
        row.set("indicator_l1", rec.l1_norm);
        row.set("indicator_value_far", rec.value_far);
        row.set("point_mass_local_scale", cal);
        rows.push_back(std::move(row));
        csv.push_back({rec.rho, rec.value_at_x0, rec.l1_norm, rec.value_far,
                       cal});
    }
    report.set("ladder", std::move(rows));
    emit(s, report,
         gs::format_csv({"rho", "indicator_value_at_x0", "indicator_l1",
                         "indicator_value_far", "point_mass_local_scale"},
                        csv));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"greensolve: Green-operator laboratory on the unit ball"};
    app.require_subcommand(1);
    // let global options appear after the subcommand name
    app.fallthrough();

    std::string config_path, cache_dir;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "experiment config (JSON)")
        ->required();
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--cache-dir", cache_dir, "override the cache directory");

    auto* sub_assemble =
        app.add_subcommand("assemble", "build and cache the Green matrix");
    auto* sub_solve =
        app.add_subcommand("solve", "bounded or integrable-data solve");
    auto* sub_csola =
        app.add_subcommand("csola", "cutoff-ladder solve with concentration "
                                    "analysis and reduced measure");
    auto* sub_ztest =
        app.add_subcommand("ztest", "five-way incompatible-set equivalence "
                                    "suite");
    auto* sub_scaling =
        app.add_subcommand("scaling", "indicator and point-mass local "
                                      "scaling probes");

    CLI11_PARSE(app, argc, argv);

    try {
        const Session s = open_session(config_path, seed, cache_dir);
        if (sub_assemble->parsed()) return run_assemble(s);
        if (sub_solve->parsed()) return run_solve(s);
        if (sub_csola->parsed()) return run_csola(s);
        if (sub_ztest->parsed()) return run_ztest(s);
        if (sub_scaling->parsed()) return run_scaling(s);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
