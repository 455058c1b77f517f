#pragma once
// Command-line front end.  Subcommands:
//   simulate   one spectrum at a given power and detuning (or temperature)
//   map        spectra over the configured detuning grid at one power
//   fit        joint parameter estimation over one or more spectrum files
//   classify   regime report for a power or coupling rate
//   report     power scan + mode branch tables for plotting
// Exit codes: 0 success, 2 bad usage/config/data, 3 filesystem failure.
// The config file comes from --config or the OMSPEC_CONFIG variable.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "fit.hpp"
#include "io.hpp"
#include "modes.hpp"
#include "units.hpp"

namespace omspec::cli {

namespace detail {

using omspec::detail::fmt_double;

/// Resolve the (delta, temperature) pair from whichever flag was given.
inline std::pair<double, double> resolve_detuning(const RunConfig& cfg,
                                                  const std::optional<std::string>& delta_flag,
                                                  const std::optional<double>& temperature_flag) {
    if (temperature_flag) {
        const double t = *temperature_flag;
        return {fsr_from_temperature(cfg.thermal, t), t};
    }
    const double delta = delta_flag ? parse_frequency(*delta_flag) : 0.0;
    const double t = cfg.thermal.slope_hz_per_k != 0.0
                         ? temperature_for_fsr(cfg.thermal, delta)
                         : cfg.thermal.t_ref_c;
    return {delta, t};
}

inline std::string join_path(const std::string& dir, const std::string& name) {
    if (dir.empty() || dir == ".")
        return name;
    return dir.back() == '/' ? dir + name : dir + "/" + name;
}

} // namespace detail

inline int cmd_simulate(const RunConfig& cfg, const std::string& power,
                        const std::optional<std::string>& delta_flag,
                        const std::optional<double>& temperature_flag,
                        std::uint64_t seed, const std::string& out) {
    const double p_w = parse_power(power);
    const auto [delta, temp_c] = detail::resolve_detuning(cfg, delta_flag, temperature_flag);
    const auto drive = drive_from_power(cfg.system, p_w, delta);
    Spectrum s = sample_spectrum(cfg.system, drive, cfg.grid.make(), cfg.noise.sigma, seed,
                                 cfg.noise.sigma_floor);
    s.meta.temperature_c = temp_c;
    write_spectrum_csv(out, s);
    std::printf("simulate: P = %s W, delta = %s Hz, g_m = %s Hz\n",
                detail::fmt_double(p_w).c_str(), detail::fmt_double(delta).c_str(),
                detail::fmt_double(drive.g_m).c_str());
    std::printf("wrote %s (%zu points)\n", out.c_str(), s.omega.size());
    return 0;
}

inline int cmd_map(const RunConfig& cfg, const std::string& power, std::uint64_t seed,
                   const std::string& out) {
    const double p_w = parse_power(power);
    DetuningMap m = detuning_map(cfg.system, p_w, cfg.delta_grid.make(), cfg.grid.make(),
                                 cfg.noise.sigma, seed, cfg.noise.sigma_floor);
    m.meta.temperature_c = cfg.thermal.t_ref_c;
    write_map_csv(out, m);
    std::printf("map: P = %s W, %zu detunings x %zu points\n", detail::fmt_double(p_w).c_str(),
                m.delta_grid.size(), m.omega_grid.size());
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

inline int cmd_fit(const RunConfig& cfg, const std::vector<std::string>& files,
                   const std::string& mode_name, const std::string& out_json) {
    FitProblem prob;
    for (const auto& f : files)
        prob.datasets.push_back(read_spectrum_csv(f));
    if (mode_name == "free")
        prob.mode = FitMode::free_coupling;
    else if (mode_name == "scaling")
        prob.mode = FitMode::scaling_constrained;
    else
        throw std::invalid_argument("fit: --mode must be 'free' or 'scaling'");
    prob.photon_calib = cfg.system.photon_calib;

    const ParameterVector init = initial_guess(prob);
    const FitResult res = lm_solve(prob, init);
    const auto lay = prob.layout();

    std::printf("fit: %zu datasets, %zu power groups, %zu parameters, mode = %s\n",
                prob.datasets.size(), lay.n_groups(), lay.n_params(), mode_name.c_str());
    for (std::size_t i = 0; i < lay.n_params(); ++i)
        std::printf("%s = %s +- %s\n", lay.name(i).c_str(),
                    detail::fmt_double(res.theta.values[i]).c_str(),
                    detail::fmt_double(res.std_err[i]).c_str());
    std::printf("residual_norm = %s\n", detail::fmt_double(res.residual_norm).c_str());
    std::printf("reduced_chisq = %s\n", detail::fmt_double(res.reduced_chisq).c_str());
    std::printf("iterations = %d\n", res.iterations);
    std::printf("status = %s (%s)\n", res.ok ? "ok" : "failed", res.reason.c_str());

    // vacuum coupling rate: direct in scaling mode, a power-law fit across
    // the per-group couplings otherwise
    std::optional<G0Estimate> g0;
    if (prob.mode == FitMode::scaling_constrained) {
        g0 = G0Estimate{res.theta.values[lay.i_g0()], res.std_err[lay.i_g0()]};
    } else if (lay.n_groups() >= 2) {
        std::vector<double> gs, es;
        bool usable = true;
        for (std::size_t grp = 0; grp < lay.n_groups(); ++grp) {
            gs.push_back(res.theta.values[lay.i_coupling(grp)]);
            const double e = res.std_err[lay.i_coupling(grp)];
            es.push_back(e);
            usable = usable && std::isfinite(e) && e > 0.0;
        }
        if (usable)
            g0 = estimate_g0(lay.group_powers, gs, es, prob.photon_calib);
    }
    if (g0)
        std::printf("g0_hz = %s +- %s\n", detail::fmt_double(g0->g0).c_str(),
                    detail::fmt_double(g0->std_err).c_str());

    if (!out_json.empty()) {
        nlohmann::json j;
        j["mode"] = mode_name;
        j["ok"] = res.ok;
        j["reason"] = res.reason;
        j["iterations"] = res.iterations;
        j["residual_norm"] = res.residual_norm;
        j["reduced_chisq"] = res.reduced_chisq;
        j["params"] = nlohmann::json::array();
        for (std::size_t i = 0; i < lay.n_params(); ++i)
            j["params"].push_back({{"name", lay.name(i)},
                                   {"value", res.theta.values[i]},
                                   {"std_err", res.std_err[i]}});
        if (g0)
            j["g0_estimate"] = {{"g0_hz", g0->g0}, {"std_err", g0->std_err}};
        omspec::detail::write_atomic(out_json, j.dump(2) + "\n");
        std::printf("wrote %s\n", out_json.c_str());
    }
    return res.ok ? 0 : 2;
}

inline int cmd_classify(const RunConfig& cfg, const std::optional<std::string>& power,
                        const std::optional<std::string>& gm_flag, double temperature_c) {
    DriveCondition drive;
    if (gm_flag)
        drive = drive_from_coupling(cfg.system, parse_frequency(*gm_flag), 0.0);
    else if (power)
        drive = drive_from_power(cfg.system, parse_power(*power), 0.0);
    else
        throw std::invalid_argument("classify: need --power or --gm");

    const double t_k = temperature_c + 273.15;
    const auto rc = classify_regime(cfg.system, drive, t_k);
    const double n_th = thermal_occupation(cfg.system.omega_m, t_k);

    std::printf("g_m_hz = %s\n", detail::fmt_double(drive.g_m).c_str());
    std::printf("splitting_onset_hz = %s\n",
                detail::fmt_double(std::abs(cfg.system.kappa_s - cfg.system.gamma_m) / 4.0).c_str());
    std::printf("strong_threshold_hz = %s\n",
                detail::fmt_double((cfg.system.kappa_s + cfg.system.gamma_m) / 2.0).c_str());
    std::printf("splitting_hz = %s\n",
                detail::fmt_double(splitting(cfg.system, drive.g_m)).c_str());
    std::printf("threshold_power_w = %s\n", detail::fmt_double(threshold_power(cfg.system)).c_str());
    std::printf("regime = %s\n", regime_name(rc.regime));
    std::printf("n_th = %s\n", detail::fmt_double(n_th).c_str());
    std::printf("gamma_m_n_th_hz = %s\n", detail::fmt_double(cfg.system.gamma_m * n_th).c_str());
    std::printf("quantum_coherent = %s\n", rc.quantum_coherent ? "true" : "false");
    return 0;
}

inline int cmd_report(const RunConfig& cfg, const std::string& out_dir) {
    const double p_max = 0.301;
    {
        std::string csv;
        csv += "# model_version = " + std::to_string(csv_model_version) + "\n";
        csv += "power_w,g_m_hz,splitting_hz,regime\n";
        for (int i = 0; i <= 301; ++i) {
            const double p_w = 1e-3 * i;
            const auto d = drive_from_power(cfg.system, p_w, 0.0);
            const auto rc = classify_regime(cfg.system, d, cfg.thermal.t_ref_c + 273.15);
            csv += detail::fmt_double(p_w) + "," + detail::fmt_double(d.g_m) + "," +
                   detail::fmt_double(splitting(cfg.system, d.g_m)) + "," +
                   regime_name(rc.regime) + "\n";
        }
        omspec::detail::write_atomic(detail::join_path(out_dir, "power_scan.csv"), csv);
    }
    {
        std::string csv;
        csv += "# power_w = " + detail::fmt_double(p_max) + "\n";
        csv += "# model_version = " + std::to_string(csv_model_version) + "\n";
        csv += "delta_hz,re_plus_hz,im_plus_hz,re_minus_hz,im_minus_hz\n";
        for (double delta : cfg.delta_grid.make()) {
            const auto m = hybrid_modes(cfg.system, drive_from_power(cfg.system, p_max, delta));
            csv += detail::fmt_double(delta) + "," + detail::fmt_double(m.freq_plus.real()) + "," +
                   detail::fmt_double(m.freq_plus.imag()) + "," +
                   detail::fmt_double(m.freq_minus.real()) + "," +
                   detail::fmt_double(m.freq_minus.imag()) + "\n";
        }
        omspec::detail::write_atomic(detail::join_path(out_dir, "mode_branches.csv"), csv);
    }
    const auto d = drive_from_power(cfg.system, p_max, 0.0);
    std::printf("report: wrote %s and %s\n",
                detail::join_path(out_dir, "power_scan.csv").c_str(),
                detail::join_path(out_dir, "mode_branches.csv").c_str());
    std::printf("at P = %s W: g_m = %s Hz, splitting = %s Hz, threshold_power = %s W\n",
                detail::fmt_double(p_max).c_str(), detail::fmt_double(d.g_m).c_str(),
                detail::fmt_double(splitting(cfg.system, d.g_m)).c_str(),
                detail::fmt_double(threshold_power(cfg.system)).c_str());
    return 0;
}

/// Parse and dispatch.  `args` is argv without the program name, in order.
inline int run(std::vector<std::string> args) {
    CLI::App app{"two-mode cavity spectra: simulate, map, fit, classify, report"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON run configuration")
        ->envname("OMSPEC_CONFIG");

    std::string power, delta_str, out_path, mode_name = "free", gm_str;
    double temperature_c = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::string> files;

    auto* sim = app.add_subcommand("simulate", "write one spectrum CSV");
    sim->add_option("--power", power, "pump power (W, mW, uW)")->required();
    auto* sim_delta = sim->add_option("--delta", delta_str, "two-mode detuning (Hz, kHz, MHz, GHz)");
    auto* sim_temp = sim->add_option("--temperature", temperature_c, "chip temperature [degC]");
    sim_delta->excludes(sim_temp);
    auto* sim_seed = sim->add_option("--seed", seed, "noise seed override");
    sim->add_option("--out", out_path, "output CSV path");

    auto* map = app.add_subcommand("map", "write a detuning-map CSV");
    map->add_option("--power", power, "pump power (W, mW, uW)")->required();
    auto* map_seed = map->add_option("--seed", seed, "noise seed override");
    map->add_option("--out", out_path, "output CSV path");

    auto* fit = app.add_subcommand("fit", "joint fit over spectrum CSVs");
    fit->add_option("files", files, "spectrum CSV files")->required()->expected(-1);
    fit->add_option("--mode", mode_name, "coupling model: free | scaling")
        ->check(CLI::IsMember({"free", "scaling"}));
    fit->add_option("--out", out_path, "write a JSON fit report here");

    auto* cls = app.add_subcommand("classify", "regime report for a power or coupling");
    auto* cls_power = cls->add_option("--power", power, "pump power (W, mW, uW)");
    auto* cls_gm = cls->add_option("--gm", gm_str, "coupling rate (Hz, kHz, MHz, GHz)");
    auto* cls_temp = cls->add_option("--temperature", temperature_c, "bath temperature [degC]");
    cls_power->excludes(cls_gm);

    auto* rep = app.add_subcommand("report", "write power-scan and mode-branch tables");
    rep->add_option("--out", out_path, "output directory");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (sim->parsed()) {
            if (sim_delta->count() + sim_temp->count() != 1)
                throw std::invalid_argument("simulate: give exactly one of --delta or --temperature");
            const std::uint64_t s = sim_seed->count() ? seed : cfg.seed;
            const std::string out =
                out_path.empty() ? detail::join_path(cfg.out_dir, "spectrum.csv") : out_path;
            return cmd_simulate(cfg, power,
                                sim_delta->count() ? std::optional<std::string>(delta_str)
                                                   : std::nullopt,
                                sim_temp->count() ? std::optional<double>(temperature_c)
                                                  : std::nullopt,
                                s, out);
        }
        if (map->parsed()) {
            const std::uint64_t s = map_seed->count() ? seed : cfg.seed;
            const std::string out =
                out_path.empty() ? detail::join_path(cfg.out_dir, "map.csv") : out_path;
            return cmd_map(cfg, power, s, out);
        }
        if (fit->parsed())
            return cmd_fit(cfg, files, mode_name, out_path);
        if (cls->parsed())
            return cmd_classify(cfg,
                                cls_power->count() ? std::optional<std::string>(power)
                                                   : std::nullopt,
                                cls_gm->count() ? std::optional<std::string>(gm_str) : std::nullopt,
                                cls_temp->count() ? temperature_c : cfg.thermal.t_ref_c);
        if (rep->parsed())
            return cmd_report(cfg, out_path.empty() ? cfg.out_dir : out_path);
        std::fprintf(stderr, "error: no subcommand\n");
        return 2;
    } catch (const io_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const parse_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

} // namespace omspec::cli
