#pragma once
// Synthetic measurement generation: noisy reflectivity spectra on a probe
// grid, detuning maps, and the two instrument calibrations (temperature ->
// two-mode detuning, modulation frequency -> analyzer frequency).
//
// Determinism contract: a (inputs, seed) pair fully determines every sample
// on every platform.  The generator below is hand-rolled (splitmix64 +
// Box-Muller) because the distributions in <random> are allowed to differ
// between standard library implementations.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "model.hpp"

namespace omspec {

namespace detail {

/// splitmix64 step: advances state and returns the next 64-bit word.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Stable per-row seed for multi-row products (detuning maps): mixes the
/// master seed with the row index through one splitmix64 step.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master ^ (0x9E3779B97F4A7C15ull * (index + 1));
    return splitmix64(s);
}

/// Deterministic stream of standard normal deviates (Box-Muller on
/// splitmix64 uniforms).  Uniforms are drawn in (0, 1], so the log is safe.
class gaussian_stream {
public:
    explicit gaussian_stream(std::uint64_t seed) : state_(seed) {}

    double next() {
        if (have_) {
            have_ = false;
            return cached_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double m = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        cached_ = m * std::sin(a);
        have_ = true;
        return m * std::cos(a);
    }

private:
    double uniform() {
        const std::uint64_t x = splitmix64(state_);
        return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
    }

    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_ = false;
};

inline void require_increasing(const std::vector<double>& grid, const char* who) {
    if (grid.empty())
        throw std::domain_error(std::string(who) + ": empty frequency grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::domain_error(std::string(who) + ": grid must be strictly increasing");
}

} // namespace detail

/// Provenance carried by every synthetic product and round-tripped through
/// the CSV layer.
struct SpectrumMeta {
    double power_w = 0.0;
    double delta_hz = 0.0;
    double temperature_c = 23.5;
    std::uint64_t seed = 0;
    std::int64_t timestamp = 0; ///< fixed at 0 so identical runs write identical bytes
};

/// One reflectivity spectrum: R(omega) samples with per-point sigma.
struct Spectrum {
    std::vector<double> omega; ///< probe frequencies [Hz], strictly increasing
    std::vector<double> r;     ///< reflectivity samples, clamped to >= 0
    std::vector<double> sigma; ///< per-point noise scale used as fit weight
    SpectrumMeta meta;
};

/// Reflectivity on a (delta, omega) grid: r[k][j] is row delta_grid[k].
struct DetuningMap {
    std::vector<double> delta_grid;
    std::vector<double> omega_grid;
    std::vector<std::vector<double>> r;
    double sigma = 1e-4; ///< shared noise scale of all samples
    SpectrumMeta meta;
};

/// Linear map from chip temperature to the two-mode detuning delta.
struct ThermalCalibration {
    double t_ref_c = 23.5;          ///< temperature at which delta = 0 [degC]
    double slope_hz_per_k = -236e3; ///< d(delta)/dT [Hz/K]
};

/// RF chain of the measurement: probe modulation is offset by an AOM and
/// mixed down against a fixed intermediate frequency before the analyzer.
struct FrequencyPlan {
    double f_aom = 80e6; ///< acousto-optic offset [Hz]
    double f_if = 1e9;   ///< mix-down intermediate frequency [Hz]

    void validate() const {
        if (!(f_aom >= 0.0) || !(f_if > 0.0) || !(f_aom < f_if))
            throw std::domain_error("FrequencyPlan: need 0 <= f_aom < f_if");
    }
};

/// Default noise floor used for fit weights when sigma would otherwise be 0.
inline constexpr double default_sigma_floor = 1e-4;

/// Sample a noisy reflectivity spectrum.  noise_sigma = 0 reproduces the
/// forward model exactly; otherwise i.i.d. Gaussian noise is added and the
/// samples are clamped at 0 (reflectivity is a power).  sigma[i] is the
/// weight actually stored: max(noise_sigma, sigma_floor).
inline Spectrum sample_spectrum(const SystemParams& p, const DriveCondition& d,
                                const std::vector<double>& omega_grid,
                                double noise_sigma, std::uint64_t seed,
                                double sigma_floor = default_sigma_floor) {
    detail::require_increasing(omega_grid, "sample_spectrum");
    if (noise_sigma < 0.0)
        throw std::domain_error("sample_spectrum: noise_sigma must be >= 0");
    if (sigma_floor < 0.0)
        throw std::domain_error("sample_spectrum: sigma_floor must be >= 0");

    Spectrum s;
    s.omega = omega_grid;
    s.r.resize(omega_grid.size());
    s.sigma.assign(omega_grid.size(), std::max(noise_sigma, sigma_floor));
    s.meta.power_w = d.power_in;
    s.meta.delta_hz = d.delta;
    s.meta.seed = seed;

    detail::gaussian_stream gauss(seed);
    for (std::size_t i = 0; i < omega_grid.size(); ++i) {
        double v = reflectivity(p, d, omega_grid[i]);
        if (noise_sigma > 0.0)
            v = std::max(0.0, v + noise_sigma * gauss.next());
        s.r[i] = v;
    }
    return s;
}

/// Sample one spectrum per detuning at fixed power.  Row k uses the seed
/// derive_seed(seed, k), so each row equals the single-spectrum product for
/// that derived seed, and rows are independent of the grid ordering choice.
inline DetuningMap detuning_map(const SystemParams& p, double power_in,
                                const std::vector<double>& delta_grid,
                                const std::vector<double>& omega_grid,
                                double noise_sigma, std::uint64_t seed,
                                double sigma_floor = default_sigma_floor) {
    detail::require_increasing(delta_grid, "detuning_map (delta grid)");
    detail::require_increasing(omega_grid, "detuning_map (omega grid)");

    DetuningMap m;
    m.delta_grid = delta_grid;
    m.omega_grid = omega_grid;
    m.r.reserve(delta_grid.size());
    m.sigma = std::max(noise_sigma, sigma_floor);
    m.meta.power_w = power_in;
    m.meta.seed = seed;
    for (std::size_t k = 0; k < delta_grid.size(); ++k) {
        const auto d = drive_from_power(p, power_in, delta_grid[k]);
        m.r.push_back(sample_spectrum(p, d, omega_grid, noise_sigma,
                                      detail::derive_seed(seed, k), sigma_floor).r);
    }
    return m;
}

/// Two-mode detuning produced by a chip temperature [degC].
inline double fsr_from_temperature(const ThermalCalibration& c, double temperature_c) {
    if (!std::isfinite(temperature_c))
        throw std::domain_error("fsr_from_temperature: temperature must be finite");
    return c.slope_hz_per_k * (temperature_c - c.t_ref_c) + 0.0; // + 0.0 folds -0 into +0
}

/// Inverse of fsr_from_temperature; needs a nonzero slope.
inline double temperature_for_fsr(const ThermalCalibration& c, double delta_hz) {
    if (c.slope_hz_per_k == 0.0)
        throw std::domain_error("temperature_for_fsr: calibration slope is 0");
    return c.t_ref_c + delta_hz / c.slope_hz_per_k;
}

/// Frequency the spectrum analyzer sees for a probe modulated at
/// modulation_hz, given the acoustic resonance omega_m the chain is tuned
/// around.  Only modulation within +-f_if of omega_m lands in band.
inline double analyzer_frequency(const FrequencyPlan& plan, double modulation_hz,
                                 double omega_m) {
    plan.validate();
    if (std::abs(modulation_hz - omega_m) > plan.f_if)
        throw std::domain_error("analyzer_frequency: modulation frequency out of band");
    return plan.f_if - plan.f_aom + (modulation_hz - omega_m);
}

/// Inverse of analyzer_frequency: recover the modulation frequency from an
/// analyzer reading.
inline double modulation_frequency(const FrequencyPlan& plan, double analyzer_hz,
                                   double omega_m) {
    plan.validate();
    return omega_m + analyzer_hz - (plan.f_if - plan.f_aom);
}

/// Map a whole grid through analyzer_frequency.
inline std::vector<double> analyzer_frequency_map(const FrequencyPlan& plan,
                                                  const std::vector<double>& modulation_hz,
                                                  double omega_m) {
    std::vector<double> out;
    out.reserve(modulation_hz.size());
    for (double f : modulation_hz)
        out.push_back(analyzer_frequency(plan, f, omega_m));
    return out;
}

} // namespace omspec
