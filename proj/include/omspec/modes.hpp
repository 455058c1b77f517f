#pragma once
// Hybrid (normal) modes of the coupled Stokes/acoustic system and the
// regime bookkeeping built on top of them: splitting, strong-coupling
// threshold, avoided-crossing minimum, quantum-coherent check.

#include <algorithm>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "model.hpp"

namespace omspec {

/// Complex eigenfrequencies of the two hybrid modes, in the same frame as
/// the probe offset omega (real part: line center [Hz]; imaginary part:
/// -linewidth/2 [Hz]).  freq_plus is the branch with the larger real part.
struct HybridModes {
    std::complex<double> freq_plus;
    std::complex<double> freq_minus;
};

enum class Regime {
    weak,             ///< no eigenvalue splitting: g_m <= |kappa_s - gamma_m| / 4
    split_unresolved, ///< split but not resolved: splitting below the mean linewidth
    strong            ///< resolved: g_m > (kappa_s + gamma_m) / 2
};

struct RegimeClass {
    Regime regime = Regime::weak;
    bool quantum_coherent = false; ///< g_m > gamma_m * n_th at the given temperature
};

/// Result of scanning the mode gap over a detuning grid.
struct CrossingScan {
    double delta_at_min = 0.0; ///< detuning where the gap is smallest [Hz]
    double separation = 0.0;   ///< smallest real-part gap found [Hz]
};

/// Hybrid-mode eigenfrequencies for one drive condition.  Solved as a
/// complex quadratic in the offset u = Omega - omega_m:
///   u^2 + u*(i*(kappa_s + gamma_m)/2 - delta)
///       - (kappa_s*gamma_m/4 + g_m^2 + i*delta*gamma_m/2) = 0
/// using the numerically stable larger-root-first form.  Ordering: larger
/// real part first; on a real-part tie, smaller imaginary part first.
inline HybridModes hybrid_modes(const SystemParams& p, const DriveCondition& d) {
    const std::complex<double> i(0.0, 1.0);
    const std::complex<double> b = i * (p.kappa_s + p.gamma_m) / 2.0 - d.delta;
    const std::complex<double> c =
        -(p.kappa_s * p.gamma_m / 4.0 + d.g_m * d.g_m + i * d.delta * p.gamma_m / 2.0);

    std::complex<double> u1, u2;
    const std::complex<double> disc = b * b - 4.0 * c;
    std::complex<double> s = std::sqrt(disc);
    // pick the sign that avoids cancellation in b + s
    if (b.real() * s.real() + b.imag() * s.imag() < 0.0)
        s = -s;
    u1 = -(b + s) / 2.0;
    u2 = (u1 != std::complex<double>(0.0)) ? c / u1 : u1; // double root at 0 when b=c=0

    std::complex<double> hi = u1, lo = u2;
    if (hi.real() < lo.real() ||
        (hi.real() == lo.real() && hi.imag() > lo.imag()))
        std::swap(hi, lo);
    return {p.omega_m + hi, p.omega_m + lo};
}

/// Real-part eigenvalue splitting at delta = 0 in closed form:
/// 2*sqrt(g^2 - ((kappa_s - gamma_m)/4)^2) above onset, 0 at or below it.
inline double splitting(const SystemParams& p, double g_m) {
    if (g_m < 0.0)
        throw std::domain_error("splitting: g_m must be >= 0");
    const double onset = std::abs(p.kappa_s - p.gamma_m) / 4.0;
    if (g_m <= onset)
        return 0.0;
    return 2.0 * std::sqrt((g_m - onset) * (g_m + onset));
}

/// Pump power at which g_m reaches the strong-coupling threshold
/// (kappa_s + gamma_m)/2.  Returns 0 when the threshold itself is 0.
inline double threshold_power(const SystemParams& p) {
    const double thr = (p.kappa_s + p.gamma_m) / 2.0;
    if (thr == 0.0)
        return 0.0;
    if (p.g0 <= 0.0 || p.photon_calib <= 0.0)
        throw std::domain_error("threshold_power: no finite threshold for g0 = 0 or photon_calib = 0");
    const double r = thr / p.g0;
    return r * r / p.photon_calib;
}

/// Classify the drive against the splitting onset and the strong-coupling
/// threshold, and check quantum coherence g_m > gamma_m * n_th.
inline RegimeClass classify_regime(const SystemParams& p, const DriveCondition& d,
                                   double temperature_k) {
    const double onset = std::abs(p.kappa_s - p.gamma_m) / 4.0;
    const double thr = (p.kappa_s + p.gamma_m) / 2.0;
    RegimeClass rc;
    if (d.g_m > thr)
        rc.regime = Regime::strong;
    else if (d.g_m > onset)
        rc.regime = Regime::split_unresolved;
    else
        rc.regime = Regime::weak;
    const double n_th = thermal_occupation(p.omega_m, temperature_k);
    rc.quantum_coherent = d.g_m > p.gamma_m * n_th;
    return rc;
}

inline const char* regime_name(Regime r) {
    switch (r) {
    case Regime::weak: return "weak";
    case Regime::split_unresolved: return "split_unresolved";
    case Regime::strong: return "strong";
    }
    return "unknown";
}

/// Scan the real-part gap between the two branches over a detuning grid and
/// report where it is smallest.  The grid must be non-empty.
inline CrossingScan min_separation_over_detuning(const SystemParams& p, double g_m,
                                                 std::span<const double> delta_grid) {
    if (delta_grid.empty())
        throw std::domain_error("min_separation_over_detuning: empty detuning grid");
    CrossingScan best;
    bool first = true;
    for (double delta : delta_grid) {
        const auto m = hybrid_modes(p, drive_from_coupling(p, g_m, delta));
        const double sep = m.freq_plus.real() - m.freq_minus.real();
        if (first || sep < best.separation) {
            best.delta_at_min = delta;
            best.separation = sep;
            first = false;
        }
    }
    return best;
}

} // namespace omspec
