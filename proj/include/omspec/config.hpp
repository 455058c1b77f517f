#pragma once
// Run configuration: one JSON file covering the device parameters, the
// calibrations, the default grids, and the noise model.  Every key is
// optional (defaults below match the reference device); unknown keys are
// rejected so typos fail loudly instead of being ignored.

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "io.hpp"
#include "model.hpp"
#include "synthesis.hpp"

namespace omspec {

/// Uniform probe grid: `points` samples centered on `center_hz`.
struct GridSpec {
    double center_hz = 12.43e9;
    double span_hz = 50e6;
    int points = 501;

    void validate() const {
        if (points < 2)
            throw std::domain_error("grid: points must be >= 2");
        if (!(span_hz > 0.0))
            throw std::domain_error("grid: span_hz must be > 0");
    }

    std::vector<double> make() const {
        validate();
        std::vector<double> g(points);
        const double lo = center_hz - span_hz / 2.0;
        const double step = span_hz / (points - 1);
        for (int i = 0; i < points; ++i)
            g[i] = lo + step * i;
        return g;
    }
};

/// Uniform detuning grid for maps and crossing scans.
struct DeltaGridSpec {
    double min_hz = -20e6;
    double max_hz = 20e6;
    int points = 81;

    void validate() const {
        if (points < 2)
            throw std::domain_error("delta_grid: points must be >= 2");
        if (!(max_hz > min_hz))
            throw std::domain_error("delta_grid: max_hz must exceed min_hz");
    }

    std::vector<double> make() const {
        validate();
        std::vector<double> g(points);
        const double step = (max_hz - min_hz) / (points - 1);
        for (int i = 0; i < points; ++i)
            g[i] = min_hz + step * i;
        return g;
    }
};

struct NoiseSpec {
    double sigma = 0.0;
    double sigma_floor = default_sigma_floor;

    void validate() const {
        if (sigma < 0.0 || sigma_floor < 0.0)
            throw std::domain_error("noise: sigma and sigma_floor must be >= 0");
    }
};

struct RunConfig {
    SystemParams system;
    ThermalCalibration thermal;
    FrequencyPlan plan;
    GridSpec grid;
    DeltaGridSpec delta_grid;
    NoiseSpec noise;
    std::uint64_t seed = 1;
    std::string out_dir = ".";

    void validate() const {
        system.validate();
        plan.validate();
        grid.validate();
        delta_grid.validate();
        noise.validate();
    }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, const char* where,
                           std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                ok = true;
                break;
            }
        if (!ok)
            throw parse_error(std::string("config: unknown key '") + item.key() + "' in " + where);
    }
}

inline double num(const nlohmann::json& obj, const char* key, double fallback) {
    if (!obj.contains(key))
        return fallback;
    if (!obj[key].is_number())
        throw parse_error(std::string("config: '") + key + "' must be a number");
    return obj[key].get<double>();
}

inline int integer(const nlohmann::json& obj, const char* key, int fallback) {
    if (!obj.contains(key))
        return fallback;
    if (!obj[key].is_number_integer())
        throw parse_error(std::string("config: '") + key + "' must be an integer");
    return obj[key].get<int>();
}

} // namespace detail

/// Build a RunConfig from parsed JSON, validating keys and invariants.
inline RunConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object())
        throw parse_error("config: top level must be a JSON object");
    detail::reject_unknown(j, "the top level",
                           {"system", "thermal", "plan", "grid", "delta_grid", "noise", "seed",
                            "out_dir"});
    RunConfig c;

    if (j.contains("system")) {
        const auto& s = j["system"];
        detail::reject_unknown(s, "'system'",
                               {"omega_m_hz", "gamma_m_hz", "kappa_s_hz", "kappa_p_hz", "g0_hz",
                                "photon_calib_per_w", "amp_a"});
        c.system.omega_m = detail::num(s, "omega_m_hz", c.system.omega_m);
        c.system.gamma_m = detail::num(s, "gamma_m_hz", c.system.gamma_m);
        c.system.kappa_s = detail::num(s, "kappa_s_hz", c.system.kappa_s);
        c.system.kappa_p = detail::num(s, "kappa_p_hz", c.system.kappa_p);
        c.system.g0 = detail::num(s, "g0_hz", c.system.g0);
        c.system.photon_calib = detail::num(s, "photon_calib_per_w", c.system.photon_calib);
        c.system.amp_a = detail::num(s, "amp_a", c.system.amp_a);
    }
    if (j.contains("thermal")) {
        const auto& t = j["thermal"];
        detail::reject_unknown(t, "'thermal'", {"t_ref_c", "slope_hz_per_k"});
        c.thermal.t_ref_c = detail::num(t, "t_ref_c", c.thermal.t_ref_c);
        c.thermal.slope_hz_per_k = detail::num(t, "slope_hz_per_k", c.thermal.slope_hz_per_k);
    }
    if (j.contains("plan")) {
        const auto& p = j["plan"];
        detail::reject_unknown(p, "'plan'", {"f_aom_hz", "f_if_hz"});
        c.plan.f_aom = detail::num(p, "f_aom_hz", c.plan.f_aom);
        c.plan.f_if = detail::num(p, "f_if_hz", c.plan.f_if);
    }
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        detail::reject_unknown(g, "'grid'", {"center_hz", "span_hz", "points"});
        c.grid.center_hz = detail::num(g, "center_hz", c.grid.center_hz);
        c.grid.span_hz = detail::num(g, "span_hz", c.grid.span_hz);
        c.grid.points = detail::integer(g, "points", c.grid.points);
    }
    if (j.contains("delta_grid")) {
        const auto& g = j["delta_grid"];
        detail::reject_unknown(g, "'delta_grid'", {"min_hz", "max_hz", "points"});
        c.delta_grid.min_hz = detail::num(g, "min_hz", c.delta_grid.min_hz);
        c.delta_grid.max_hz = detail::num(g, "max_hz", c.delta_grid.max_hz);
        c.delta_grid.points = detail::integer(g, "points", c.delta_grid.points);
    }
    if (j.contains("noise")) {
        const auto& n = j["noise"];
        detail::reject_unknown(n, "'noise'", {"sigma", "sigma_floor"});
        c.noise.sigma = detail::num(n, "sigma", c.noise.sigma);
        c.noise.sigma_floor = detail::num(n, "sigma_floor", c.noise.sigma_floor);
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            throw parse_error("config: 'seed' must be an integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("out_dir")) {
        if (!j["out_dir"].is_string())
            throw parse_error("config: 'out_dir' must be a string");
        c.out_dir = j["out_dir"].get<std::string>();
    }

    c.validate();
    return c;
}

/// Load a RunConfig from a JSON file.  io_error if the file cannot be
/// opened; parse_error on bad JSON, unknown keys, or invariant violations.
inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error("config " + path + ": " + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const std::domain_error& e) {
        throw parse_error("config " + path + ": " + e.what());
    }
}

} // namespace omspec
