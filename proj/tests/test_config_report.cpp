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

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "fixtures.hpp"
#include "greensolve/config.hpp"
#include "greensolve/report.hpp"

using namespace greensolve;
namespace fs = std::filesystem;

namespace {

const char* kFullConfig = R"({
  "grid": {"radial_count": 8, "angular_count": 18},
  "kernel": {"variant": "rfl", "s": 0.5},
  "potential": {"c0": 0.5,
                "singularities": [{"point": [0, 0, 0], "beta": 1.5}]},
  "measure": {"density": {"type": "constant", "value": 1.0},
              "atoms": [{"point": [0, 0, 0], "mass": 1.0}]},
  "ladders": {"cutoffs": [1, 2, 4], "rho_ladder": [0.25, 0.125]},
  "tolerances": {"solver_tol": 1e-6, "alpha_solution": 0.04},
  "outputs": {"report_path": "r.json", "tables_path": "t.csv"},
  "cache_dir": "cache",
  "seed": 7
})";

std::string temp_file(const std::string& name) {
    return (fs::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("config parses every section", "[config]") {
    const ExperimentConfig cfg =
        parse_config(nlohmann::json::parse(kFullConfig));
    CHECK(cfg.grid.radial_count == 8);
    CHECK(cfg.kernel.variant == "rfl");
    CHECK(cfg.kernel.s == 0.5);
    CHECK(cfg.potential.c0 == 0.5);
    REQUIRE(cfg.potential.singular.size() == 1);
    CHECK(cfg.potential.singular[0].beta == 1.5);
    CHECK(cfg.density.type == "constant");
    REQUIRE(cfg.atoms.size() == 1);
    CHECK(cfg.atoms[0].mass == 1.0);
    CHECK(cfg.ladders.cutoffs.size() == 3);
    CHECK(cfg.tolerances.solver_tol == 1e-6);
    CHECK(cfg.tolerances.alpha_solution == 0.04);
    CHECK(cfg.outputs.report_path == "r.json");
    CHECK(cfg.cache_dir == "cache");
    CHECK(cfg.seed == 7);

    const QuadGrid grid = cfg.make_grid();
    const RadonMeasure mu = make_measure(cfg, grid);
    CHECK(mu.density.size() == grid.size());
    CHECK(mu.atoms.size() == 1);
}

TEST_CASE("config errors name the offending field", "[config]") {
    auto parse = [](const char* text) {
        return parse_config(nlohmann::json::parse(text));
    };
    CHECK_THROWS_WITH(parse(R"({"kernel": {"variant": "weird"}})"),
                      Catch::Matchers::ContainsSubstring("kernel.variant"));
    CHECK_THROWS_WITH(parse(R"({"kernel": {"variant": "rfl", "s": 2}})"),
                      Catch::Matchers::ContainsSubstring("kernel.s"));
    CHECK_THROWS_WITH(
        parse(R"({"potential": {"singularities": [{"beta": 1}]}})"),
        Catch::Matchers::ContainsSubstring("singularities[0]"));
    CHECK_THROWS_WITH(
        parse(R"({"measure": {"density": {"type": "file"}}})"),
        Catch::Matchers::ContainsSubstring("measure.density.path"));
    CHECK_THROWS_WITH(parse(R"({"grid": {"radial_count": "many"}})"),
                      Catch::Matchers::ContainsSubstring("grid.radial_count"));
}

TEST_CASE("density CSV is keyed to the grid hash", "[config]") {
    const QuadGrid& grid = fixtures::small_grid();
    const std::string path = temp_file("greensolve_density.csv");
    {
        std::ofstream out(path);
        out << "grid_hash," << hash_hex(grid.hash) << "\n";
        for (std::size_t i = 0; i < grid.size(); ++i)
            out << 0.5 + 0.001 * static_cast<double>(i) << "\n";
    }
    const std::vector<double> values = load_density_csv(path, grid);
    REQUIRE(values.size() == grid.size());
    CHECK(values[0] == 0.5);

    const QuadGrid other = build_ball_grid(3, 8, 32);
    CHECK_THROWS_WITH(load_density_csv(path, other),
                      Catch::Matchers::ContainsSubstring("hash mismatch"));
    fs::remove(path);
}

TEST_CASE("report output is deterministic and ordered", "[config]") {
    auto build = [] {
        Report r = Report::object();
        r.set("name", "probe");
        r.set("value", 0.1 + 0.2);  // prints with 17 significant digits
        r.set("count", 3);
        r.set("flag", true);
        Report arr = Report::array();
        arr.push_back(1.5);
        arr.push_back(Vec3(1.0, 2.0, 3.0));
        r.set("items", std::move(arr));
        return r.dump();
    };
    const std::string a = build();
    const std::string b = build();
    CHECK(a == b);
    CHECK(a.find("0.30000000000000004") != std::string::npos);
    // insertion order is preserved
    CHECK(a.find("name") < a.find("value"));
    CHECK(a.find("value") < a.find("count"));
}

TEST_CASE("atomic write leaves no temporary behind", "[config]") {
    const std::string path = temp_file("greensolve_report.json");
    atomic_write_file(path, "{\"ok\": true}\n");
    CHECK(fs::exists(path));
    CHECK_FALSE(fs::exists(path + ".tmp"));
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    CHECK(content == "{\"ok\": true}\n");
    fs::remove(path);
}

TEST_CASE("csv formatting", "[config]") {
    const std::string csv =
        format_csv({"rho", "value"}, {{0.5, 1.0}, {0.25, 2.0}});
    CHECK(csv == "rho,value\n0.5,1\n0.25,2\n");
    CHECK_THROWS_AS(format_csv({"one"}, {{1.0, 2.0}}), std::invalid_argument);
}

TEST_CASE("command-line pipeline produces a valid report", "[cli]") {
    const std::string dir = temp_file("greensolve_cli_test");
    fs::create_directories(dir);
    const std::string config_path = dir + "/config.json";
    const std::string report_path = dir + "/report.json";
    {
        std::ofstream out(config_path);
        out << R"({
  "grid": {"radial_count": 12, "angular_count": 24},
  "kernel": {"variant": "classical", "s": 1.0},
  "measure": {"density": {"type": "constant", "value": 1.0}},
  "outputs": {"report_path": ")" << report_path << R"("},
  "cache_dir": ")" << dir << R"(/cache"
})";
    }
    const std::string cmd = std::string(GREENSOLVE_CLI_PATH) +
                            " solve --config " + config_path;
    REQUIRE(std::system(cmd.c_str()) == 0);

    std::ifstream in(report_path);
    REQUIRE(in.good());
    const nlohmann::json report = nlohmann::json::parse(in);
    CHECK(report.at("subcommand") == "solve");
    // with no potential and unit data this is the torsion field:
    // u(0) = 1/6
    CHECK_THAT(report.at("u_at_origin").get<double>(),
               Catch::Matchers::WithinRel(1.0 / 6.0, 2e-2));

    // subsequent runs hit the cache and reproduce the report byte for
    // byte (the first run differs only in the matrix_from_cache field)
    REQUIRE(std::system(cmd.c_str()) == 0);
    std::ifstream first(report_path);
    const std::string text1((std::istreambuf_iterator<char>(first)),
                            std::istreambuf_iterator<char>());
    REQUIRE(std::system(cmd.c_str()) == 0);
    std::ifstream second(report_path);
    const std::string text2((std::istreambuf_iterator<char>(second)),
                            std::istreambuf_iterator<char>());
    CHECK(text1 == text2);

    nlohmann::json report2;
    {
        std::ifstream in2(report_path);
        report2 = nlohmann::json::parse(in2);
    }
    CHECK(report2.at("matrix_from_cache") == true);
    fs::remove_all(dir);
}
