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

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "greensolve/green_kernel.hpp"
#include "greensolve/measures.hpp"
#include "greensolve/quad_grid.hpp"

namespace greensolve {

/// Declarative description of one experiment, loaded from a JSON file.
/// Every run is reproducible from the file plus the seed.
struct ExperimentConfig {
    struct Grid {
        int dim = 3;
        int radial_count = 24;
        int angular_count = 48;
    } grid;

    struct Kernel {
        std::string variant = "classical";  // "classical" | "rfl"
        double s = 1.0;
    } kernel;

    struct DensitySpec {
        std::string type = "constant";  // "constant" | "file"
        double value = 0.0;
        std::string path;
    };

    Potential potential;
    DensitySpec density;
    std::vector<Atom> atoms;

    struct Ladders {
        std::vector<double> cutoffs;     // empty: module defaults
        std::vector<double> rho_ladder;  // empty: module defaults
    } ladders;

    struct Tolerances {
        double solver_tol = 1e-8;
        double alpha_solution = 0.05;
        double alpha_consensus = 0.1;
    } tolerances;

    struct Outputs {
        std::string report_path;
        std::string tables_path;
    } outputs;

    std::string cache_dir;
    std::uint64_t seed = 0;

    GreenKernel make_kernel() const {
        if (kernel.variant == "classical") return GreenKernel::classical(grid.dim);
        if (kernel.variant == "rfl") return GreenKernel::rfl(kernel.s, grid.dim);
        throw std::invalid_argument("config: kernel.variant must be "
                                    "\"classical\" or \"rfl\"");
    }

    QuadGrid make_grid() const {
        return build_ball_grid(grid.dim, grid.radial_count, grid.angular_count);
    }
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& field,
                                      const std::string& what) {
    throw std::runtime_error("config: field \"" + field + "\": " + what);
}

template <class T>
T get_or(const nlohmann::json& j, const std::string& key, const T& fallback,
         const std::string& path) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        config_error(path + "." + key, e.what());
    }
}

inline Vec3 parse_point(const nlohmann::json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3)
        config_error(path, "expected an array of 3 coordinates");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace detail

/// Parses an experiment config; errors name the offending field.
inline ExperimentConfig parse_config(const nlohmann::json& j) {
    ExperimentConfig cfg;
    using detail::config_error;
    using detail::get_or;

    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        cfg.grid.dim = get_or(g, "dim", 3, "grid");
        cfg.grid.radial_count = get_or(g, "radial_count", 24, "grid");
        cfg.grid.angular_count = get_or(g, "angular_count", 48, "grid");
    }
    if (j.contains("kernel")) {
        const auto& k = j.at("kernel");
        cfg.kernel.variant =
            get_or<std::string>(k, "variant", "classical", "kernel");
        if (cfg.kernel.variant != "classical" && cfg.kernel.variant != "rfl")
            config_error("kernel.variant",
                         "must be \"classical\" or \"rfl\"");
        cfg.kernel.s = get_or(k, "s", cfg.kernel.variant == "rfl" ? 0.5 : 1.0,
                              "kernel");
        if (cfg.kernel.variant == "classical" && cfg.kernel.s != 1.0)
            config_error("kernel.s", "classical kernel requires s = 1");
        if (cfg.kernel.variant == "rfl" &&
            !(cfg.kernel.s > 0.0 && cfg.kernel.s < 1.0))
            config_error("kernel.s", "rfl kernel requires 0 < s < 1");
    }
    if (j.contains("potential")) {
        const auto& p = j.at("potential");
        cfg.potential.c0 = get_or(p, "c0", 0.0, "potential");
        if (p.contains("singularities")) {
            if (!p.at("singularities").is_array())
                config_error("potential.singularities", "expected an array");
            std::size_t idx = 0;
            for (const auto& s : p.at("singularities")) {
                const std::string path =
                    "potential.singularities[" + std::to_string(idx++) + "]";
                Singularity sing;
                if (!s.contains("point")) config_error(path, "missing point");
                sing.point = detail::parse_point(s.at("point"), path + ".point");
                sing.beta = get_or(s, "beta", 0.0, path);
                sing.coeff = get_or(s, "coeff", 1.0, path);
                cfg.potential.singular.push_back(sing);
            }
        }
        try {
            cfg.potential.validate();
        } catch (const std::exception& e) {
            config_error("potential", e.what());
        }
    }
    if (j.contains("measure")) {
        const auto& mj = j.at("measure");
        if (mj.contains("density")) {
            const auto& d = mj.at("density");
            cfg.density.type =
                get_or<std::string>(d, "type", "constant", "measure.density");
            if (cfg.density.type == "constant") {
                cfg.density.value = get_or(d, "value", 0.0, "measure.density");
            } else if (cfg.density.type == "file") {
                cfg.density.path =
                    get_or<std::string>(d, "path", "", "measure.density");
                if (cfg.density.path.empty())
                    config_error("measure.density.path", "missing path");
            } else {
                config_error("measure.density.type",
                             "expected \"constant\" or \"file\"");
            }
        }
        if (mj.contains("atoms")) {
            std::size_t idx = 0;
            for (const auto& a : mj.at("atoms")) {
                const std::string path =
                    "measure.atoms[" + std::to_string(idx++) + "]";
                Atom atom;
                if (!a.contains("point")) config_error(path, "missing point");
                atom.location =
                    detail::parse_point(a.at("point"), path + ".point");
                atom.mass = get_or(a, "mass", 0.0, path);
                cfg.atoms.push_back(atom);
            }
        }
    }
    if (j.contains("ladders")) {
        const auto& l = j.at("ladders");
        cfg.ladders.cutoffs =
            get_or(l, "cutoffs", std::vector<double>{}, "ladders");
        cfg.ladders.rho_ladder =
            get_or(l, "rho_ladder", std::vector<double>{}, "ladders");
    }
    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        cfg.tolerances.solver_tol = get_or(t, "solver_tol", 1e-8, "tolerances");
        cfg.tolerances.alpha_solution =
            get_or(t, "alpha_solution", 0.05, "tolerances");
        cfg.tolerances.alpha_consensus =
            get_or(t, "alpha_consensus", 0.1, "tolerances");
    }
    if (j.contains("outputs")) {
        const auto& o = j.at("outputs");
        cfg.outputs.report_path =
            get_or<std::string>(o, "report_path", "", "outputs");
        cfg.outputs.tables_path =
            get_or<std::string>(o, "tables_path", "", "outputs");
    }
    cfg.cache_dir = get_or<std::string>(j, "cache_dir", "", "");
    cfg.seed = get_or<std::uint64_t>(j, "seed", 0, "");
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("config: " + path + ": " + e.what());
    }
    return parse_config(j);
}

inline std::string hash_hex(const std::array<std::uint8_t, 32>& hash) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (std::uint8_t b : hash) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

/// Node-value CSV keyed to a grid: first line "grid_hash,<hex>", then
/// one value per line in node order.
inline std::vector<double> load_density_csv(const std::string& path,
                                            const QuadGrid& grid) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("density csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("grid_hash,", 0) != 0)
        throw std::runtime_error("density csv: " + path +
                                 ": first line must be grid_hash,<hex>");
    const std::string hex = line.substr(10);
    if (hex != hash_hex(grid.hash))
        throw std::runtime_error("density csv: " + path +
                                 ": grid hash mismatch (file " + hex +
                                 ", grid " + hash_hex(grid.hash) + ")");
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        values.push_back(std::stod(line));
    }
    if (values.size() != grid.size())
        throw std::runtime_error("density csv: " + path + ": expected " +
                                 std::to_string(grid.size()) + " values, got " +
                                 std::to_string(values.size()));
    return values;
}

/// Materializes the measure of a config on a concrete grid.
inline RadonMeasure make_measure(const ExperimentConfig& cfg,
                                 const QuadGrid& grid) {
    RadonMeasure mu;
    if (cfg.density.type == "constant") {
        mu.density.assign(grid.size(), cfg.density.value);
    } else {
        mu.density = load_density_csv(cfg.density.path, grid);
    }
    mu.atoms = cfg.atoms;
    mu.validate(grid);
    return mu;
}

}  // namespace greensolve
