#pragma once
// Linearized two-mode response of a pumped cavity coupled to an acoustic
// resonance.  Everything here works on cyclic rates: omega_m, gamma_m,
// kappa_s, g0, delta and the probe offset are all X/2pi values in Hz.
// The physics is homogeneous in that convention as long as it is applied
// consistently, so no 2pi shows up in the formulas below.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>

namespace omspec {

inline constexpr double planck_h = 6.62607015e-34;   // J s
inline constexpr double boltzmann_kb = 1.380649e-23; // J/K

/// Fixed properties of one device: mechanical resonance, linewidths,
/// vacuum coupling rate, and the photon-number calibration of the pump path.
struct SystemParams {
    double omega_m = 12.43e9;      ///< acoustic resonance [Hz]
    double gamma_m = 7.13e6;       ///< acoustic energy decay rate [Hz]
    double kappa_s = 3.438e6;      ///< Stokes cavity linewidth [Hz]
    double kappa_p = 3.029e6;      ///< pump cavity linewidth [Hz]
    double g0 = 7.76;              ///< single-photon coupling rate [Hz]
    double photon_calib = 6.1e11 / 0.301; ///< intracavity photons per watt of input
    double amp_a = 1.0;            ///< probe coupling contrast A in [0, 1]

    void validate() const {
        if (!(omega_m > 0.0))
            throw std::domain_error("SystemParams: omega_m must be > 0");
        if (!(gamma_m > 0.0) || !(kappa_s > 0.0) || !(kappa_p > 0.0))
            throw std::domain_error("SystemParams: linewidths must be > 0");
        if (g0 < 0.0 || photon_calib < 0.0)
            throw std::domain_error("SystemParams: g0 and photon_calib must be >= 0");
        if (!(amp_a >= 0.0 && amp_a <= 1.0))
            throw std::domain_error("SystemParams: amp_a must lie in [0, 1]");
    }
};

/// One pump operating point.  Build these through drive_from_power or
/// drive_from_coupling so that photons, g_m and power_in stay consistent.
struct DriveCondition {
    double power_in = 0.0; ///< pump power at the device [W]
    double delta = 0.0;    ///< two-mode detuning FSR - omega_m [Hz]
    double photons = 0.0;  ///< intracavity pump photon number
    double g_m = 0.0;      ///< pump-enhanced coupling rate g0*sqrt(photons) [Hz]
};

/// Intracavity photon number for a given input power.
inline double photon_number(const SystemParams& p, double power_in) {
    if (power_in < 0.0)
        throw std::domain_error("photon_number: power_in must be >= 0");
    return p.photon_calib * power_in;
}

/// Pump-enhanced coupling rate g_m = g0 * sqrt(N).
inline double coupling_rate(const SystemParams& p, double photons) {
    if (photons < 0.0)
        throw std::domain_error("coupling_rate: photons must be >= 0");
    return p.g0 * std::sqrt(photons);
}

/// Drive at a given input power; photon number and g_m follow from the
/// calibration.
inline DriveCondition drive_from_power(const SystemParams& p, double power_in,
                                       double delta) {
    DriveCondition d;
    d.power_in = power_in;
    d.delta = delta;
    d.photons = photon_number(p, power_in);
    d.g_m = coupling_rate(p, d.photons);
    return d;
}

/// Drive at a given coupling rate; photon number and power are back-filled
/// from the calibration where that is defined, otherwise left at zero.
inline DriveCondition drive_from_coupling(const SystemParams& p, double g_m,
                                          double delta) {
    if (g_m < 0.0)
        throw std::domain_error("drive_from_coupling: g_m must be >= 0");
    DriveCondition d;
    d.delta = delta;
    d.g_m = g_m;
    if (p.g0 > 0.0) {
        d.photons = (g_m / p.g0) * (g_m / p.g0);
        if (p.photon_calib > 0.0)
            d.power_in = d.photons / p.photon_calib;
    }
    return d;
}

/// Steady-state intracavity amplitudes per unit probe drive, evaluated at
/// probe frequency omega.  With dm = omega - omega_m and ds = dm - delta:
///   a_s = 1 / (kappa_s/2 - i*ds + g_m^2/(gamma_m/2 - i*dm))   [s]
///   b_m = i*g_m / (gamma_m/2 - i*dm) * a_s                    [s]
/// Denominators are formed in the frame offset by omega_m, so the result
/// stays accurate even though omega itself is ~1e10 Hz.
inline std::pair<std::complex<double>, std::complex<double>>
steady_state_fields(const SystemParams& p, const DriveCondition& d,
                    double omega) {
    const double dm = omega - p.omega_m; // offset from the acoustic line
    const std::complex<double> i(0.0, 1.0);
    const std::complex<double> chi_s = p.kappa_s / 2.0 - i * (dm - d.delta);
    const std::complex<double> chi_m = p.gamma_m / 2.0 - i * dm;
    const std::complex<double> a_s = 1.0 / (chi_s + (d.g_m * d.g_m) / chi_m);
    const std::complex<double> b_m = i * d.g_m / chi_m * a_s;
    return {a_s, b_m};
}

/// Power reflectivity of the probe, R = |1 - A*(kappa_s/2)*a_s|^2.
inline double reflectivity(const SystemParams& p, const DriveCondition& d,
                           double omega) {
    const auto [a_s, b_m] = steady_state_fields(p, d, omega);
    return std::norm(1.0 - p.amp_a * (p.kappa_s / 2.0) * a_s);
}

/// Bose-Einstein occupation of a mode at omega_m [Hz] and temperature [K].
inline double thermal_occupation(double omega_m, double temperature_k) {
    if (!(omega_m > 0.0))
        throw std::domain_error("thermal_occupation: omega_m must be > 0");
    if (temperature_k < 0.0)
        throw std::domain_error("thermal_occupation: temperature must be >= 0");
    if (temperature_k == 0.0)
        return 0.0;
    const double x = planck_h * omega_m / (boltzmann_kb * temperature_k);
    return 1.0 / std::expm1(x);
}

} // namespace omspec
