// Acceptance gate: every release criterion checked at its stated tolerance.
// One PASS/FAIL line per criterion with the measured numbers; the process
// exit code is the number of failed criteria, so the suite stays red until
// every criterion holds.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <omspec/omspec.hpp>

namespace {

using namespace omspec;

int failures = 0;

void verdict(const char* id, bool ok, const char* fmt, ...) {
    char detail[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(detail, sizeof detail, fmt, ap);
    va_end(ap);
    std::printf("%s %s  %s\n", id, ok ? "PASS" : "FAIL", detail);
    if (!ok)
        ++failures;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = lo + step * static_cast<double>(i);
    return v;
}

/// Interior extrema (minima + maxima) of a sampled trace.
int count_extrema(const std::vector<double>& r) {
    int n = 0;
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        if (r[i] < r[i - 1] && r[i] <= r[i + 1])
            ++n;
        else if (r[i] > r[i - 1] && r[i] >= r[i + 1])
            ++n;
    }
    return n;
}

std::vector<double> reflectivity_trace(const SystemParams& p, double g_m, double delta,
                                       const std::vector<double>& grid) {
    DriveCondition d;
    d.g_m = g_m;
    d.delta = delta;
    std::vector<double> r(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        r[i] = reflectivity(p, d, grid[i]);
    return r;
}

/// Separation of the two reflectivity dips at one detuning; 0 when the
/// response shows a single dip.
double dip_gap(const SystemParams& p, double power_w, double delta,
               const std::vector<double>& grid) {
    Spectrum s;
    s.omega = grid;
    s.r = reflectivity_trace(p, drive_from_power(p, power_w, delta).g_m, delta, grid);
    s.sigma.assign(grid.size(), default_sigma_floor);
    const auto dips = omspec::detail::find_dips(s);
    return dips.size() == 2 ? dips[1].pos - dips[0].pos : 0.0;
}

struct uniform_source {
    std::uint64_t state;
    explicit uniform_source(std::uint64_t seed) : state(seed) {}
    double next() {
        const std::uint64_t x = omspec::detail::splitmix64(state);
        return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
    }
};

// --- criteria ---------------------------------------------------------------

void a1_mean_linewidth(const SystemParams& p) {
    const double mean = (p.kappa_s + p.gamma_m) / 2.0;
    verdict("A1", std::abs(mean - 5.284e6) <= 1e3,
            "mean linewidth (kappa_s+gamma_m)/2 = %.17g Hz (target 5.284e6 +- 1e3)",
            mean);
}

void a2_splitting_onset(const SystemParams& p) {
    const double onset = std::abs(p.kappa_s - p.gamma_m) / 4.0;
    const bool onset_ok = std::abs(onset - 0.923e6) <= 1e3;

    const auto grid = linspace(p.omega_m - 25e6, p.omega_m + 25e6, 40001);
    const int below = count_extrema(reflectivity_trace(p, 0.99 * onset, 0.0, grid));
    const int above = count_extrema(reflectivity_trace(p, 1.20 * onset, 0.0, grid));
    // the eigenvalues split at the onset, but the reflectivity keeps a single
    // dip until the splitting outgrows the linewidths, so the 3-extrema
    // expectation just above onset is not attainable from the line shape
    const bool counts_ok = below == 1 && above == 3;

    verdict("A2", onset_ok && counts_ok,
            "onset = %.17g Hz (target 0.923e6 +- 1e3); extrema just below/above onset = "
            "%d/%d (expected 1/3)",
            onset, below, above);
}

void a3_full_power_coupling(const SystemParams& p) {
    const double g = p.g0 * std::sqrt(6.1e11);
    const double rel = std::abs(g / 6.15e6 - 1.0);
    verdict("A3", rel <= 0.02,
            "g0*sqrt(N) at N = 6.1e11 photons = %.17g Hz (target 6.15e6 +- 2%%, off by %.3g%%)",
            g, 100.0 * rel);
}

void a4_threshold_power(const SystemParams& p) {
    const double thr_w = threshold_power(p);
    verdict("A4", thr_w >= 0.215 && thr_w <= 0.263,
            "strong-coupling threshold power = %.17g W (target within [0.215, 0.263])",
            thr_w);
}

void a5_joint_recovery(const SystemParams& defaults) {
    SystemParams truth = defaults;
    truth.amp_a = 0.9;
    const std::vector<double> powers{0.00524, 0.0758, 0.2778};
    const std::vector<double> deltas{-5e6, 0.0, 5e6};
    // the tool's default probe grid: 501 points across 50 MHz
    const auto grid = linspace(truth.omega_m - 25e6, truth.omega_m + 25e6, 501);
    const double sigma = 0.01; // 20 dB SNR against an O(1) dip depth

    const int trials = 100;
    int good = 0;
    for (int t = 0; t < trials; ++t) {
        FitProblem prob;
        std::size_t idx = 0;
        for (double p_w : powers)
            for (double de : deltas)
                prob.datasets.push_back(sample_spectrum(
                    truth, drive_from_power(truth, p_w, de), grid, sigma,
                    omspec::detail::derive_seed(static_cast<std::uint64_t>(t + 1), idx++)));

        const auto res = lm_solve(prob, initial_guess(prob));
        if (!res.ok)
            continue;
        const auto lay = prob.layout();
        const bool globals_ok =
            std::abs(res.theta.values[lay.i_omega()] / truth.omega_m - 1.0) <= 0.01 &&
            std::abs(res.theta.values[lay.i_gamma()] / truth.gamma_m - 1.0) <= 0.01 &&
            std::abs(res.theta.values[lay.i_kappa()] / truth.kappa_s - 1.0) <= 0.01;

        std::vector<double> gs, es;
        bool usable = true;
        for (std::size_t grp = 0; grp < lay.n_groups(); ++grp) {
            gs.push_back(res.theta.values[lay.i_coupling(grp)]);
            es.push_back(res.std_err[lay.i_coupling(grp)]);
            usable = usable && std::isfinite(es.back()) && es.back() > 0.0;
        }
        if (!globals_ok || !usable)
            continue;
        const auto g0 = estimate_g0(lay.group_powers, gs, es, prob.photon_calib);
        if (std::abs(g0.g0 / truth.g0 - 1.0) <= 0.02)
            ++good;
    }
    verdict("A5", good >= 95,
            "joint fits at 20 dB SNR recovered omega_m/gamma_m/kappa_s to 1%% and g0 to "
            "2%% in %d/%d seeded trials (need >= 95)",
            good, trials);
}

void a6_mode_invariants(const SystemParams& defaults) {
    const int draws = 10000;
    uniform_source rng(20240614);
    int bad = 0;
    double worst = 0.0;
    for (int t = 0; t < draws; ++t) {
        SystemParams p = defaults;
        p.kappa_s = 1e8 * rng.next();
        p.gamma_m = 1e8 * rng.next();
        DriveCondition d;
        d.g_m = 1e8 * rng.next();
        d.delta = 1e8 * rng.next();

        const auto m = hybrid_modes(p, d);
        const std::complex<double> u1 = m.freq_plus - p.omega_m;
        const std::complex<double> u2 = m.freq_minus - p.omega_m;
        const std::complex<double> i(0.0, 1.0);
        const std::complex<double> b = i * (p.kappa_s + p.gamma_m) / 2.0 - d.delta;
        const std::complex<double> c =
            -(p.kappa_s * p.gamma_m / 4.0 + d.g_m * d.g_m + i * d.delta * p.gamma_m / 2.0);
        const double scale = std::max({p.kappa_s / 2.0, p.gamma_m / 2.0, d.g_m,
                                       std::abs(d.delta), std::abs(u1), std::abs(u2)});

        double err = 0.0;
        for (const auto& u : {u1, u2}) {
            const double res = std::abs(u * u + b * u + c) /
                               (std::norm(u) + std::abs(b * u) + std::abs(c) +
                                scale * scale);
            err = std::max(err, res);
        }
        err = std::max(err, std::abs(u1 + u2 + b) / std::max(std::abs(b), scale));
        err = std::max(err, std::abs(u1 * u2 - c) / (std::abs(c) + scale * scale));
        err = std::max(err,
                       std::abs(u1.imag() + u2.imag() + (p.kappa_s + p.gamma_m) / 2.0) /
                           scale);
        worst = std::max(worst, err);
        if (err > 1e-9)
            ++bad;
    }
    verdict("A6", bad == 0,
            "characteristic-polynomial, Vieta, and trace invariants held for %d/%d random "
            "draws (worst normalized error %.3g, limit 1e-9)",
            draws - bad, draws, worst);
}

void a7_avoided_crossing(const SystemParams& p) {
    const auto grid = linspace(p.omega_m - 25e6, p.omega_m + 25e6, 801);
    const double resolution = grid[1] - grid[0];
    const auto deltas = linspace(-20e6, 20e6, 41);

    double weak_min = 1e300;
    for (double de : deltas)
        weak_min = std::min(weak_min, dip_gap(p, 0.00524, de, grid));
    const bool weak_ok = weak_min < resolution;

    double strong_min = 1e300, delta_at_min = 0.0;
    for (double de : deltas) {
        const double gap = dip_gap(p, 0.2778, de, grid);
        if (gap > 0.0 && gap < strong_min) {
            strong_min = gap;
            delta_at_min = de;
        }
    }
    const double expect = splitting(p, drive_from_power(p, 0.2778, 0.0).g_m);
    // the minimum dip gap does sit at zero detuning, but overlapping split
    // lines pull the reflectivity dips inward, so the gap undershoots the
    // eigenvalue splitting by more than the stated 2%
    const bool strong_ok = delta_at_min == 0.0 &&
                           std::abs(strong_min / expect - 1.0) <= 0.02;

    verdict("A7", weak_ok && strong_ok,
            "5.24 mW ridge gap min = %.6g Hz (< %.6g resolution: %s); 277.8 mW gap min = "
            "%.17g Hz at delta = %.6g vs splitting %.17g (off by %.3g%%, limit 2%%)",
            weak_min, resolution, weak_ok ? "yes" : "no", strong_min, delta_at_min,
            expect, 100.0 * std::abs(strong_min / expect - 1.0));
}

void a8_model_sanity(const SystemParams& defaults) {
    bool bounds_ok = true, far_ok = true, sym_ok = true, lorentz_ok = true;
    double r_min = 2.0, r_max = -1.0;

    for (double amp : {0.0, 0.3, 1.0}) {
        for (double g : {0.0, 0.923e6, 3.5e6, 6.15e6, 40e6}) {
            SystemParams p = defaults;
            p.amp_a = amp;
            DriveCondition d;
            d.g_m = g;
            const double span = 50.0 * std::max({p.kappa_s, p.gamma_m, g});
            for (double w : linspace(p.omega_m - span, p.omega_m + span, 4001)) {
                const double r = reflectivity(p, d, w);
                r_min = std::min(r_min, r);
                r_max = std::max(r_max, r);
                bounds_ok = bounds_ok && r >= 0.0 && r <= 1.0;
            }
        }
    }

    {
        SystemParams p = defaults;
        DriveCondition d;
        d.g_m = 6.15e6;
        const double far = 1e4 * p.kappa_s;
        far_ok = std::abs(reflectivity(p, d, p.omega_m + far) - 1.0) < 1e-4 &&
                 std::abs(reflectivity(p, d, p.omega_m - far) - 1.0) < 1e-4;

        for (int k = 1; k <= 200; ++k) {
            const double x = 125e3 * k;
            const double diff = std::abs(reflectivity(p, d, p.omega_m + x) -
                                         reflectivity(p, d, p.omega_m - x));
            sym_ok = sym_ok && diff <= 1e-12;
        }

        DriveCondition off;
        off.g_m = 0.0;
        off.delta = 1.5e6;
        for (double w : linspace(p.omega_m - 20e6, p.omega_m + 20e6, 2001)) {
            const double ds = w - p.omega_m - off.delta;
            const double u = 2.0 * ds / p.kappa_s;
            const double closed = 1.0 - p.amp_a * (2.0 - p.amp_a) / (1.0 + u * u);
            lorentz_ok = lorentz_ok &&
                         std::abs(reflectivity(p, off, w) - closed) <= 1e-14;
        }
    }

    verdict("A8", bounds_ok && far_ok && sym_ok && lorentz_ok,
            "R within [%.3g, %.3g] on all grids (need [0,1]); far-detuned -> 1: %s; "
            "zero-detuning symmetry: %s; g = 0 Lorentzian reduction: %s",
            r_min, r_max, far_ok ? "yes" : "no", sym_ok ? "yes" : "no",
            lorentz_ok ? "yes" : "no");
}

void a9_thermal_occupation(const SystemParams& p) {
    const double n_th = thermal_occupation(p.omega_m, 296.0);
    const bool n_ok = std::abs(n_th - 496.0) <= 1.0;

    bool coherent_seen = false;
    for (double g = 0.0; g <= 6.15e6; g += 50e3) {
        const auto rc = classify_regime(p, drive_from_coupling(p, g, 0.0), 296.0);
        coherent_seen = coherent_seen || rc.quantum_coherent;
    }
    verdict("A9", n_ok && !coherent_seen,
            "n_th(296 K) = %.17g (target 496 +- 1); quantum-coherent flag over the full "
            "coupling ladder at 296 K: %s (expected never)",
            n_th, coherent_seen ? "raised" : "never");
}

} // namespace

int main() {
    const SystemParams p; // reference device parameters
    a1_mean_linewidth(p);
    a2_splitting_onset(p);
    a3_full_power_coupling(p);
    a4_threshold_power(p);
    a5_joint_recovery(p);
    a6_mode_invariants(p);
    a7_avoided_crossing(p);
    a8_model_sanity(p);
    a9_thermal_occupation(p);
    std::printf("acceptance: %d of 9 criteria failed\n", failures);
    return failures;
}
