// Run configuration: JSON schema, defaults, strict key checking, grids.

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include <json.hpp>
#include <omspec/config.hpp>

using namespace omspec;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

namespace {

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "omspec_config_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("empty configuration yields the reference defaults", "[config]") {
    const RunConfig c = config_from_json(nlohmann::json::object());
    REQUIRE(c.system.omega_m == 12.43e9);
    REQUIRE(c.system.gamma_m == 7.13e6);
    REQUIRE(c.system.kappa_s == 3.438e6);
    REQUIRE(c.system.kappa_p == 3.029e6);
    REQUIRE(c.system.g0 == 7.76);
    REQUIRE(c.system.amp_a == 1.0);
    REQUIRE(c.thermal.t_ref_c == 23.5);
    REQUIRE(c.thermal.slope_hz_per_k == -236e3);
    REQUIRE(c.plan.f_aom == 80e6);
    REQUIRE(c.plan.f_if == 1e9);
    REQUIRE(c.grid.center_hz == 12.43e9);
    REQUIRE(c.grid.span_hz == 50e6);
    REQUIRE(c.grid.points == 501);
    REQUIRE(c.delta_grid.min_hz == -20e6);
    REQUIRE(c.delta_grid.max_hz == 20e6);
    REQUIRE(c.delta_grid.points == 81);
    REQUIRE(c.noise.sigma == 0.0);
    REQUIRE(c.noise.sigma_floor == default_sigma_floor);
    REQUIRE(c.seed == 1);
    REQUIRE(c.out_dir == ".");
}

TEST_CASE("every field is settable from JSON", "[config]") {
    const auto j = nlohmann::json::parse(R"({
        "system": {"omega_m_hz": 10e9, "gamma_m_hz": 5e6, "kappa_s_hz": 2e6,
                   "kappa_p_hz": 3e6, "g0_hz": 8.5, "photon_calib_per_w": 1e12,
                   "amp_a": 0.8},
        "thermal": {"t_ref_c": 20.0, "slope_hz_per_k": -100e3},
        "plan": {"f_aom_hz": 50e6, "f_if_hz": 2e9},
        "grid": {"center_hz": 10e9, "span_hz": 80e6, "points": 301},
        "delta_grid": {"min_hz": -10e6, "max_hz": 10e6, "points": 11},
        "noise": {"sigma": 0.02, "sigma_floor": 1e-3},
        "seed": 99,
        "out_dir": "/tmp/runs"
    })");
    const RunConfig c = config_from_json(j);
    REQUIRE(c.system.omega_m == 10e9);
    REQUIRE(c.system.gamma_m == 5e6);
    REQUIRE(c.system.kappa_s == 2e6);
    REQUIRE(c.system.kappa_p == 3e6);
    REQUIRE(c.system.g0 == 8.5);
    REQUIRE(c.system.photon_calib == 1e12);
    REQUIRE(c.system.amp_a == 0.8);
    REQUIRE(c.thermal.t_ref_c == 20.0);
    REQUIRE(c.thermal.slope_hz_per_k == -100e3);
    REQUIRE(c.plan.f_aom == 50e6);
    REQUIRE(c.plan.f_if == 2e9);
    REQUIRE(c.grid.center_hz == 10e9);
    REQUIRE(c.grid.span_hz == 80e6);
    REQUIRE(c.grid.points == 301);
    REQUIRE(c.delta_grid.min_hz == -10e6);
    REQUIRE(c.delta_grid.max_hz == 10e6);
    REQUIRE(c.delta_grid.points == 11);
    REQUIRE(c.noise.sigma == 0.02);
    REQUIRE(c.noise.sigma_floor == 1e-3);
    REQUIRE(c.seed == 99);
    REQUIRE(c.out_dir == "/tmp/runs");
}

TEST_CASE("unknown keys are rejected at every level", "[config]") {
    const auto reject = [](const char* text, const char* needle) {
        REQUIRE_THROWS_MATCHES(config_from_json(nlohmann::json::parse(text)), parse_error,
                               Catch::Matchers::MessageMatches(ContainsSubstring(needle)));
    };
    reject(R"({"sytem": {}})", "sytem");
    reject(R"({"system": {"omega_hz": 1e9}})", "omega_hz");
    reject(R"({"thermal": {"tref": 23.0}})", "tref");
    reject(R"({"plan": {"aom": 1}})", "aom");
    reject(R"({"grid": {"start_hz": 1}})", "start_hz");
    reject(R"({"delta_grid": {"count": 3}})", "count");
    reject(R"({"noise": {"snr_db": 20}})", "snr_db");
}

TEST_CASE("type and invariant violations become parse or domain errors", "[config]") {
    REQUIRE_THROWS_AS(config_from_json(nlohmann::json::parse("[]")), parse_error);
    REQUIRE_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"seed": "x"})")),
                      parse_error);
    REQUIRE_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"out_dir": 3})")),
                      parse_error);
    REQUIRE_THROWS_AS(
        config_from_json(nlohmann::json::parse(R"({"grid": {"points": 2.5}})")),
        parse_error);
    REQUIRE_THROWS_AS(
        config_from_json(nlohmann::json::parse(R"({"system": {"omega_m_hz": "big"}})")),
        parse_error);
    // structurally valid JSON with a bad value trips the embedded validators
    REQUIRE_THROWS_AS(
        config_from_json(nlohmann::json::parse(R"({"system": {"gamma_m_hz": -1}})")),
        std::domain_error);
    REQUIRE_THROWS_AS(
        config_from_json(nlohmann::json::parse(R"({"grid": {"points": 1}})")),
        std::domain_error);
    REQUIRE_THROWS_AS(
        config_from_json(nlohmann::json::parse(R"({"noise": {"sigma": -0.5}})")),
        std::domain_error);
    REQUIRE_THROWS_AS(
        config_from_json(nlohmann::json::parse(R"({"plan": {"f_aom_hz": 5e9}})")),
        std::domain_error);
}

TEST_CASE("config files load through the same validation", "[config]") {
    const auto dir = temp_dir();

    const auto good = dir / "good.json";
    {
        std::ofstream out(good);
        out << R"({"grid": {"points": 101}, "seed": 7})";
    }
    const RunConfig c = load_config(good.string());
    REQUIRE(c.grid.points == 101);
    REQUIRE(c.seed == 7);
    REQUIRE(c.system.omega_m == 12.43e9); // untouched defaults remain

    REQUIRE_THROWS_AS(load_config((dir / "absent.json").string()), io_error);

    const auto broken = dir / "broken.json";
    {
        std::ofstream out(broken);
        out << "{ not json";
    }
    REQUIRE_THROWS_AS(load_config(broken.string()), parse_error);

    // domain violations surface as parse errors naming the file
    const auto invalid = dir / "invalid.json";
    {
        std::ofstream out(invalid);
        out << R"({"system": {"kappa_s_hz": 0}})";
    }
    REQUIRE_THROWS_MATCHES(load_config(invalid.string()), parse_error,
                           Catch::Matchers::MessageMatches(ContainsSubstring("invalid.json")));
}

TEST_CASE("grid specs expand to inclusive uniform grids", "[config]") {
    GridSpec g;
    g.center_hz = 1e9;
    g.span_hz = 10e6;
    g.points = 5;
    const auto grid = g.make();
    REQUIRE(grid.size() == 5);
    REQUIRE_THAT(grid.front(), WithinRel(995e6, 1e-15));
    REQUIRE_THAT(grid.back(), WithinRel(1005e6, 1e-15));
    for (std::size_t i = 1; i < grid.size(); ++i)
        REQUIRE(grid[i] > grid[i - 1]);

    GridSpec bad = g;
    bad.points = 1;
    REQUIRE_THROWS_AS(bad.make(), std::domain_error);
    bad = g;
    bad.span_hz = 0.0;
    REQUIRE_THROWS_AS(bad.make(), std::domain_error);

    DeltaGridSpec d;
    d.min_hz = -4e6;
    d.max_hz = 4e6;
    d.points = 9;
    const auto deltas = d.make();
    REQUIRE(deltas.size() == 9);
    REQUIRE(deltas.front() == -4e6);
    REQUIRE(deltas.back() == 4e6);
    REQUIRE(deltas[4] == 0.0);

    DeltaGridSpec flipped = d;
    flipped.max_hz = -5e6;
    REQUIRE_THROWS_AS(flipped.make(), std::domain_error);
}
