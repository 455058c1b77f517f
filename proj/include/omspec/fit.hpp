#pragma once
// Joint weighted least-squares estimation over one or more spectra.
//
// Parameter packing (fixed and documented; tests rely on it):
//   [0] omega_m   [1] gamma_m   [2] kappa_s
//   then the coupling block:
//     free_coupling:        one g_m per power group, groups sorted by
//                           ascending power (datasets sharing a power share a g_m)
//     scaling_constrained:  a single g0; dataset k uses g0*sqrt(calib*P_k)
//   then one delta per dataset (problem order),
//   then the contrast block: one amp per dataset, or a single shared amp.
// A parameter is held fixed by setting bounds lo == hi (freeze_coupling pins
// the whole coupling block at 0 for background prefits).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "model.hpp"
#include "synthesis.hpp"

namespace omspec {

enum class FitMode {
    free_coupling,      ///< one independent g_m per power group
    scaling_constrained ///< g_m tied to g0*sqrt(photon_calib*P) across groups
};

/// Packed parameter values; the layout lives in the owning FitProblem.
struct ParameterVector {
    std::vector<double> values;
};

/// Index map for the packing described at the top of this header.
struct FitLayout {
    FitMode mode = FitMode::free_coupling;
    bool share_amp = false;
    std::vector<double> group_powers;   ///< ascending, one entry per power group
    std::vector<std::size_t> group_of;  ///< dataset -> power group

    std::size_t n_datasets() const { return group_of.size(); }
    std::size_t n_groups() const { return group_powers.size(); }
    std::size_t n_coupling() const {
        return mode == FitMode::free_coupling ? n_groups() : 1;
    }

    std::size_t i_omega() const { return 0; }
    std::size_t i_gamma() const { return 1; }
    std::size_t i_kappa() const { return 2; }
    std::size_t i_coupling(std::size_t group) const {
        return 3 + (mode == FitMode::free_coupling ? group : 0);
    }
    std::size_t i_g0() const { return 3; } // scaling_constrained only
    std::size_t i_delta(std::size_t k) const { return 3 + n_coupling() + k; }
    std::size_t i_amp(std::size_t k) const {
        return 3 + n_coupling() + n_datasets() + (share_amp ? 0 : k);
    }
    std::size_t n_params() const {
        return 3 + n_coupling() + n_datasets() + (share_amp ? 1 : n_datasets());
    }

    /// Coupling rate dataset k sees under theta.
    double coupling_for(const ParameterVector& theta, std::size_t k,
                        double photon_calib) const {
        if (mode == FitMode::free_coupling)
            return theta.values[i_coupling(group_of[k])];
        return theta.values[i_g0()] * std::sqrt(photon_calib * group_powers[group_of[k]]);
    }

    /// Human-readable parameter name for reports.
    std::string name(std::size_t i) const {
        if (i == i_omega()) return "omega_m_hz";
        if (i == i_gamma()) return "gamma_m_hz";
        if (i == i_kappa()) return "kappa_s_hz";
        if (mode == FitMode::scaling_constrained && i == i_g0()) return "g0_hz";
        if (i >= 3 && i < 3 + n_coupling())
            return "g_hz[P=" + std::to_string(group_powers[i - 3]) + "]";
        if (i >= i_delta(0) && i < i_delta(0) + n_datasets())
            return "delta_hz[" + std::to_string(i - i_delta(0)) + "]";
        if (share_amp) return "amp_a";
        return "amp_a[" + std::to_string(i - i_amp(0)) + "]";
    }
};

/// One joint fit: datasets, mode, and box bounds (lo == hi fixes a value).
struct FitProblem {
    std::vector<Spectrum> datasets;
    FitMode mode = FitMode::free_coupling;
    bool share_amp = false;
    bool freeze_coupling = false; ///< pin the coupling block at 0 (background prefit)
    double photon_calib = 6.1e11 / 0.301;
    std::vector<std::pair<double, double>> bounds;

    FitLayout layout() const {
        FitLayout lay;
        lay.mode = mode;
        lay.share_amp = share_amp;
        // power groups: ascending unique powers; equality is exact (synthetic
        // datasets carry the exact double they were generated with)
        std::vector<double> powers;
        for (const auto& d : datasets)
            powers.push_back(d.meta.power_w);
        std::vector<double> uniq = powers;
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        lay.group_powers = uniq;
        lay.group_of.resize(powers.size());
        for (std::size_t k = 0; k < powers.size(); ++k)
            lay.group_of[k] = static_cast<std::size_t>(
                std::lower_bound(uniq.begin(), uniq.end(), powers[k]) - uniq.begin());
        return lay;
    }

    void validate() const {
        if (datasets.empty())
            throw std::domain_error("FitProblem: need at least one dataset");
        for (const auto& d : datasets) {
            if (d.omega.size() != d.r.size() || d.omega.size() != d.sigma.size())
                throw std::domain_error("FitProblem: column length mismatch in a dataset");
            if (d.omega.empty())
                throw std::domain_error("FitProblem: empty dataset");
            for (double s : d.sigma)
                if (!(s > 0.0))
                    throw std::domain_error("FitProblem: sigma values must be > 0");
        }
        if (!bounds.empty() && bounds.size() != layout().n_params())
            throw std::domain_error("FitProblem: bounds size does not match the layout");
    }

    std::size_t n_points() const {
        std::size_t n = 0;
        for (const auto& d : datasets)
            n += d.omega.size();
        return n;
    }
};

namespace detail {

/// Default box bounds for the packing; generous but finite.
inline std::vector<std::pair<double, double>> default_bounds(const FitProblem& prob) {
    const auto lay = prob.layout();
    double grid_lo = std::numeric_limits<double>::infinity();
    double grid_hi = -grid_lo;
    double span = 0.0;
    for (const auto& d : prob.datasets) {
        grid_lo = std::min(grid_lo, d.omega.front());
        grid_hi = std::max(grid_hi, d.omega.back());
        span = std::max(span, d.omega.back() - d.omega.front());
    }
    std::vector<std::pair<double, double>> b(lay.n_params());
    b[lay.i_omega()] = {grid_lo - span, grid_hi + span};
    b[lay.i_gamma()] = {1.0, 1e9};
    b[lay.i_kappa()] = {1.0, 1e9};
    for (std::size_t i = 3; i < 3 + lay.n_coupling(); ++i)
        b[i] = prob.freeze_coupling ? std::pair<double, double>{0.0, 0.0}
                                    : std::pair<double, double>{0.0, 1e9};
    if (prob.mode == FitMode::scaling_constrained && !prob.freeze_coupling)
        b[lay.i_g0()] = {0.0, 1e5};
    for (std::size_t k = 0; k < lay.n_datasets(); ++k)
        b[lay.i_delta(k)] = {-1e8, 1e8};
    for (std::size_t k = 0; k < lay.n_datasets(); ++k)
        b[lay.i_amp(k)] = {0.0, 1.0};
    return b;
}

inline void check_bounds(const FitProblem& prob, const ParameterVector& theta,
                         const std::vector<std::pair<double, double>>& b) {
    if (theta.values.size() != b.size())
        throw std::domain_error("fit: parameter vector size does not match the layout");
    for (std::size_t i = 0; i < b.size(); ++i)
        if (theta.values[i] < b[i].first || theta.values[i] > b[i].second)
            throw std::domain_error("fit: parameter " + prob.layout().name(i) +
                                    " outside its bounds");
}

/// Weighted residuals without the bounds check (the Jacobian stencil may
/// step slightly outside the box).
inline Eigen::VectorXd residuals_unchecked(const FitProblem& prob, const FitLayout& lay,
                                           const ParameterVector& theta) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(prob.n_points()));
    SystemParams sp;
    sp.omega_m = theta.values[lay.i_omega()];
    sp.gamma_m = theta.values[lay.i_gamma()];
    sp.kappa_s = theta.values[lay.i_kappa()];
    Eigen::Index row = 0;
    for (std::size_t k = 0; k < prob.datasets.size(); ++k) {
        const auto& d = prob.datasets[k];
        DriveCondition drv;
        drv.delta = theta.values[lay.i_delta(k)];
        drv.g_m = lay.coupling_for(theta, k, prob.photon_calib);
        sp.amp_a = theta.values[lay.i_amp(k)];
        for (std::size_t j = 0; j < d.omega.size(); ++j, ++row)
            r[row] = (reflectivity(sp, drv, d.omega[j]) - d.r[j]) / d.sigma[j];
    }
    return r;
}

} // namespace detail

/// Bounds used by a problem: the explicit ones if set, else the defaults.
inline std::vector<std::pair<double, double>> effective_bounds(const FitProblem& prob) {
    return prob.bounds.empty() ? detail::default_bounds(prob) : prob.bounds;
}

/// Weighted residual vector (model - data)/sigma, datasets in problem order.
/// theta must lie within the problem bounds.
inline Eigen::VectorXd residuals(const FitProblem& prob, const ParameterVector& theta) {
    prob.validate();
    const auto b = effective_bounds(prob);
    detail::check_bounds(prob, theta, b);
    return detail::residuals_unchecked(prob, prob.layout(), theta);
}

/// Central-difference Jacobian of the weighted residuals.  Steps are
/// rel_step*|theta_j| with an absolute floor: 1e-3 Hz for frequency-like
/// parameters, rel_step for the unit-scale contrasts.  Columns of fixed
/// parameters (lo == hi) are zero.
inline Eigen::MatrixXd numeric_jacobian(const FitProblem& prob, const ParameterVector& theta,
                                        double rel_step = 1e-6) {
    prob.validate();
    if (!(rel_step > 0.0))
        throw std::domain_error("numeric_jacobian: rel_step must be > 0");
    const auto lay = prob.layout();
    const auto b = effective_bounds(prob);
    detail::check_bounds(prob, theta, b);

    const std::size_t n = prob.n_points();
    const std::size_t p = lay.n_params();
    Eigen::MatrixXd J(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    ParameterVector work = theta;
    const std::size_t first_amp = lay.i_amp(0);
    for (std::size_t j = 0; j < p; ++j) {
        if (b[j].first == b[j].second) {
            J.col(static_cast<Eigen::Index>(j)).setZero();
            continue;
        }
        const double floor = j >= first_amp ? rel_step : 1e-3;
        const double h = std::max(rel_step * std::abs(theta.values[j]), floor);
        if (theta.values[j] + h == theta.values[j])
            throw std::domain_error("numeric_jacobian: step underflow on " + lay.name(j));
        work.values[j] = theta.values[j] + h;
        const Eigen::VectorXd hi = detail::residuals_unchecked(prob, lay, work);
        work.values[j] = theta.values[j] - h;
        const Eigen::VectorXd lo = detail::residuals_unchecked(prob, lay, work);
        work.values[j] = theta.values[j];
        J.col(static_cast<Eigen::Index>(j)) = (hi - lo) / (2.0 * h);
    }
    return J;
}

struct FitOptions {
    int max_iterations = 500;
    double cost_tol = 1e-12;     ///< relative cost decrease that counts as converged
    double grad_tol = 1e-10;     ///< infinity norm of J^T r at convergence
    double lambda0 = 1e-3;
    double lambda_up = 5.0;      ///< rejection multiplier
    double lambda_down = 3.0;    ///< acceptance divisor
    double lambda_cap = 1e12;
    double jac_rel_step = 1e-6;
};

struct FitResult {
    ParameterVector theta;
    std::vector<double> std_err;      ///< per parameter; 0 for fixed, inf if unidentifiable
    Eigen::MatrixXd covariance;       ///< full matrix, fixed rows/cols zeroed
    double residual_norm = 0.0;       ///< sqrt(final weighted cost)
    double reduced_chisq = 0.0;
    int iterations = 0;
    std::string reason;               ///< cost_change | gradient | max_iterations | stalled | singular_normal_equations
    bool ok = true;                   ///< false only for the singular failure report
    std::vector<double> cost_history; ///< accepted costs, starting at the init
};

/// Levenberg-Marquardt with bound projection.
/// Steps solve (J^T J + lambda diag(J^T J)) d = -J^T r on the active set;
/// an accepted step divides lambda by lambda_down, a rejected one multiplies
/// by lambda_up.  Stops on relative cost change < cost_tol, gradient norm
/// < grad_tol, the iteration cap, or lambda reaching lambda_cap.
inline FitResult lm_solve(const FitProblem& prob, const ParameterVector& init,
                          const FitOptions& opts = {}) {
    prob.validate();
    const auto lay = prob.layout();
    const auto b = effective_bounds(prob);
    detail::check_bounds(prob, init, b);

    const std::size_t p = lay.n_params();
    const auto clamp = [&](ParameterVector& t) {
        for (std::size_t i = 0; i < p; ++i)
            t.values[i] = std::clamp(t.values[i], b[i].first, b[i].second);
    };

    FitResult res;
    res.theta = init;
    Eigen::VectorXd r = detail::residuals_unchecked(prob, lay, res.theta);
    double cost = r.squaredNorm();
    if (!std::isfinite(cost))
        throw std::domain_error("lm_solve: initial residuals are not finite");
    res.cost_history.push_back(cost);

    Eigen::MatrixXd J = numeric_jacobian(prob, res.theta, opts.jac_rel_step);
    Eigen::MatrixXd A = J.transpose() * J;
    Eigen::VectorXd grad = J.transpose() * r;

    double lambda = opts.lambda0;
    res.reason = "max_iterations";

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        res.iterations = iter + 1;
        if (grad.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
            res.reason = "gradient";
            res.iterations = iter;
            break;
        }

        // active set: free parameters the residuals actually respond to
        std::vector<Eigen::Index> act;
        for (std::size_t i = 0; i < p; ++i)
            if (b[i].first < b[i].second && A(i, i) > 0.0 && std::isfinite(A(i, i)))
                act.push_back(static_cast<Eigen::Index>(i));
        if (act.empty()) {
            res.reason = "gradient";
            break;
        }

        const Eigen::Index na = static_cast<Eigen::Index>(act.size());
        Eigen::MatrixXd Aa(na, na);
        Eigen::VectorXd ga(na);
        for (Eigen::Index ii = 0; ii < na; ++ii) {
            ga[ii] = grad[act[ii]];
            for (Eigen::Index jj = 0; jj < na; ++jj)
                Aa(ii, jj) = A(act[ii], act[jj]);
        }
        Eigen::MatrixXd M = Aa;
        for (Eigen::Index ii = 0; ii < na; ++ii)
            M(ii, ii) += lambda * Aa(ii, ii);
        const Eigen::VectorXd step = M.ldlt().solve(-ga);

        bool reject = !step.allFinite();
        ParameterVector trial = res.theta;
        double cost_try = std::numeric_limits<double>::infinity();
        Eigen::VectorXd r_try;
        if (!reject) {
            for (Eigen::Index ii = 0; ii < na; ++ii)
                trial.values[static_cast<std::size_t>(act[ii])] += step[ii];
            clamp(trial);
            r_try = detail::residuals_unchecked(prob, lay, trial);
            cost_try = r_try.squaredNorm();
            reject = !(cost_try < cost);
        }

        if (reject) {
            lambda *= opts.lambda_up;
            if (lambda > opts.lambda_cap) {
                if (!step.allFinite()) {
                    res.reason = "singular_normal_equations";
                    res.ok = false;
                } else {
                    res.reason = "stalled"; // no descent direction left at the cap
                }
                break;
            }
            continue;
        }

        const double rel = (cost - cost_try) / std::max(cost, std::numeric_limits<double>::min());
        res.theta = trial;
        r = r_try;
        cost = cost_try;
        res.cost_history.push_back(cost);
        lambda = std::max(lambda / opts.lambda_down, 1e-15);
        J = numeric_jacobian(prob, res.theta, opts.jac_rel_step);
        A = J.transpose() * J;
        grad = J.transpose() * r;
        if (rel < opts.cost_tol) {
            res.reason = "cost_change";
            break;
        }
    }

    // covariance = (J^T J)^-1 * reduced chi-square on the free parameters
    res.residual_norm = std::sqrt(cost);
    std::vector<Eigen::Index> free_idx;
    for (std::size_t i = 0; i < p; ++i)
        if (b[i].first < b[i].second)
            free_idx.push_back(static_cast<Eigen::Index>(i));
    const std::size_t n = prob.n_points();
    const std::size_t dof = n > free_idx.size() ? n - free_idx.size() : 1;
    const double s2 = cost / static_cast<double>(dof);
    res.reduced_chisq = s2;

    res.covariance = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p),
                                           static_cast<Eigen::Index>(p));
    res.std_err.assign(p, 0.0);
    // a free parameter with an exactly zero Jacobian column carries no
    // information; report it as infinite instead of letting the factorization
    // pseudo-invert the singular direction into a fabricated finite number
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<Eigen::Index> ident;
    for (Eigen::Index i : free_idx) {
        if (A(i, i) > 0.0 && std::isfinite(A(i, i))) {
            ident.push_back(i);
        } else {
            res.std_err[static_cast<std::size_t>(i)] = inf;
            res.covariance(i, i) = inf;
        }
    }
    if (!ident.empty()) {
        const Eigen::Index nf = static_cast<Eigen::Index>(ident.size());
        Eigen::MatrixXd Af(nf, nf);
        for (Eigen::Index ii = 0; ii < nf; ++ii)
            for (Eigen::Index jj = 0; jj < nf; ++jj)
                Af(ii, jj) = A(ident[ii], ident[jj]);
        Eigen::MatrixXd Cf = Af.ldlt().solve(Eigen::MatrixXd::Identity(nf, nf)) * s2;
        Cf = 0.5 * (Cf + Cf.transpose()).eval(); // solve() is symmetric only up to roundoff
        for (Eigen::Index ii = 0; ii < nf; ++ii) {
            const double var = Cf(ii, ii);
            res.std_err[static_cast<std::size_t>(ident[ii])] =
                (std::isfinite(var) && var >= 0.0) ? std::sqrt(var) : inf;
            for (Eigen::Index jj = 0; jj < nf; ++jj)
                res.covariance(ident[ii], ident[jj]) =
                    std::isfinite(Cf(ii, jj)) ? Cf(ii, jj) : inf;
        }
    }
    return res;
}

namespace detail {

struct dip_feature {
    double pos = 0.0;       ///< refined dip center [Hz]
    double depth = 0.0;     ///< baseline minus dip floor
    double halfwidth = 0.0; ///< full width at half depth [Hz]
    double floor_r = 0.0;   ///< smoothed reflectivity at the dip
};

/// Locate up to two dips in a spectrum: box-smooth, take interior minima,
/// keep prominent ones, refine by a 3-point parabola.  Deterministic.
inline std::vector<dip_feature> find_dips(const Spectrum& s) {
    const std::size_t n = s.omega.size();
    std::size_t w = std::max<std::size_t>(3, n / 64);
    if (w % 2 == 0)
        ++w;
    const std::size_t hw = w / 2;

    std::vector<double> sm(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i > hw ? i - hw : 0;
        const std::size_t hi = std::min(n - 1, i + hw);
        double acc = 0.0;
        for (std::size_t j = lo; j <= hi; ++j)
            acc += s.r[j];
        sm[i] = acc / static_cast<double>(hi - lo + 1);
    }

    std::vector<double> tmp = sm;
    std::nth_element(tmp.begin(), tmp.begin() + tmp.size() / 2, tmp.end());
    const double baseline = tmp[tmp.size() / 2];

    std::vector<double> sig = s.sigma;
    std::nth_element(sig.begin(), sig.begin() + sig.size() / 2, sig.end());
    const double noise = sig[sig.size() / 2] / std::sqrt(static_cast<double>(w));

    struct cand {
        std::size_t idx;
        double depth;
    };
    std::vector<cand> cands;
    for (std::size_t i = 1; i + 1 < n; ++i)
        if (sm[i] < sm[i - 1] && sm[i] <= sm[i + 1]) {
            const double depth = baseline - sm[i];
            if (depth > 0.0)
                cands.push_back({i, depth});
        }
    if (cands.empty())
        return {};

    std::sort(cands.begin(), cands.end(), [](const cand& a, const cand& b) {
        if (a.depth != b.depth)
            return a.depth > b.depth;
        return a.idx < b.idx;
    });
    const double min_depth = std::max(0.35 * cands.front().depth, 5.0 * noise);

    std::vector<cand> picked;
    for (const auto& c : cands) {
        if (c.depth < min_depth)
            break;
        bool clash = false;
        for (const auto& q : picked)
            if ((c.idx > q.idx ? c.idx - q.idx : q.idx - c.idx) <= 2 * w)
                clash = true;
        if (!clash)
            picked.push_back(c);
        if (picked.size() == 2)
            break;
    }

    std::vector<dip_feature> dips;
    for (const auto& c : picked) {
        dip_feature f;
        const std::size_t i = c.idx;
        f.depth = c.depth;
        f.floor_r = sm[i];
        // parabolic refinement on the local grid spacing
        const double denom = sm[i - 1] - 2.0 * sm[i] + sm[i + 1];
        double shift = 0.0;
        if (denom > 0.0)
            shift = std::clamp(0.5 * (sm[i - 1] - sm[i + 1]) / denom, -1.0, 1.0);
        const double step = (s.omega[i + 1] - s.omega[i - 1]) / 2.0;
        f.pos = s.omega[i] + shift * step;
        // full width at half depth from the smoothed trace
        const double half = baseline - c.depth / 2.0;
        std::size_t l = i, rgt = i;
        while (l > 0 && sm[l] < half)
            --l;
        while (rgt + 1 < n && sm[rgt] < half)
            ++rgt;
        f.halfwidth = s.omega[rgt] - s.omega[l];
        dips.push_back(f);
    }
    std::sort(dips.begin(), dips.end(),
              [](const dip_feature& a, const dip_feature& b) { return a.pos < b.pos; });
    return dips;
}

/// Order-independent mean: sorts a copy before summing so dataset
/// permutations produce bit-identical seeds.
inline double stable_mean(std::vector<double> v, double fallback) {
    if (v.empty())
        return fallback;
    std::sort(v.begin(), v.end());
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

} // namespace detail

/// Data-driven starting point for lm_solve.  Every spectrum needs at least
/// 16 points.  Split spectra seed omega_m from the dip midpoint and g from
/// the half-separation; single dips seed kappa_s from the dip width; the
/// acoustic linewidth starts at the device-class scale and is refined by
/// the optimizer.
inline ParameterVector initial_guess(const FitProblem& prob) {
    prob.validate();
    for (const auto& d : prob.datasets)
        if (d.omega.size() < 16)
            throw std::domain_error("initial_guess: every spectrum needs >= 16 points");

    const auto lay = prob.layout();
    const auto b = effective_bounds(prob);
    const double gamma_seed = 7e6; // acoustic linewidth scale of this device class

    std::vector<std::vector<detail::dip_feature>> dips(prob.datasets.size());
    for (std::size_t k = 0; k < prob.datasets.size(); ++k)
        dips[k] = detail::find_dips(prob.datasets[k]);

    // omega_m: midpoints of the split spectra in the highest-power group.
    // An unsplit dip only pins omega_m + delta, so when nothing is split the
    // seed falls back to the grid center and the dip offset goes into delta.
    std::vector<double> centers;
    const std::size_t top_group = lay.n_groups() - 1;
    for (std::size_t k = 0; k < prob.datasets.size(); ++k)
        if (lay.group_of[k] == top_group && dips[k].size() == 2)
            centers.push_back((dips[k][0].pos + dips[k][1].pos) / 2.0);
    if (centers.empty())
        for (std::size_t k = 0; k < prob.datasets.size(); ++k)
            if (dips[k].size() == 2)
                centers.push_back((dips[k][0].pos + dips[k][1].pos) / 2.0);
    std::vector<double> grid_mids;
    for (const auto& d : prob.datasets)
        grid_mids.push_back((d.omega.front() + d.omega.back()) / 2.0);
    const double omega_seed =
        detail::stable_mean(centers, detail::stable_mean(grid_mids, 0.0));

    // kappa_s: single-dip widths directly; otherwise back it out of the
    // hybrid width, each split line being ~(kappa_s + gamma_m)/2 wide
    std::vector<double> kappa_direct, kappa_split;
    for (std::size_t k = 0; k < prob.datasets.size(); ++k) {
        if (dips[k].size() == 1 && dips[k][0].halfwidth > 0.0)
            kappa_direct.push_back(dips[k][0].halfwidth);
        if (dips[k].size() == 2) {
            // when the dips overlap at half depth the measured width spans
            // the whole doublet; the single-line width is what remains after
            // the separation is taken out
            const double sep = dips[k][1].pos - dips[k][0].pos;
            for (const auto& f : dips[k])
                if (f.halfwidth > 0.0) {
                    const double line =
                        f.halfwidth > sep ? f.halfwidth - sep : f.halfwidth;
                    kappa_split.push_back(std::max(2.0 * line - gamma_seed,
                                                   line / 4.0));
                }
        }
    }
    double kappa_seed = !kappa_direct.empty()
                            ? detail::stable_mean(kappa_direct, 3.5e6)
                            : detail::stable_mean(kappa_split, 3.5e6);

    // per-group coupling: mean half-separation of that group's split spectra;
    // unsplit groups start at a fraction of the mean linewidth (never 0: the
    // residuals are flat in g at g = 0)
    std::vector<double> g_seeds(lay.n_groups(), 0.0);
    for (std::size_t grp = 0; grp < lay.n_groups(); ++grp) {
        std::vector<double> seps;
        for (std::size_t k = 0; k < prob.datasets.size(); ++k)
            if (lay.group_of[k] == grp && dips[k].size() == 2)
                seps.push_back((dips[k][1].pos - dips[k][0].pos) / 2.0);
        const double weak = 0.25 * (kappa_seed + gamma_seed) / 2.0;
        g_seeds[grp] = detail::stable_mean(seps, weak);
        if (g_seeds[grp] <= 0.0)
            g_seeds[grp] = weak;
    }

    ParameterVector theta;
    theta.values.assign(lay.n_params(), 0.0);
    theta.values[lay.i_omega()] = omega_seed;
    theta.values[lay.i_gamma()] = gamma_seed;
    theta.values[lay.i_kappa()] = kappa_seed;
    if (prob.mode == FitMode::free_coupling) {
        for (std::size_t grp = 0; grp < lay.n_groups(); ++grp)
            theta.values[lay.i_coupling(grp)] = g_seeds[grp];
    } else {
        std::vector<double> g0s;
        for (std::size_t grp = 0; grp < lay.n_groups(); ++grp) {
            const double x = std::sqrt(prob.photon_calib * lay.group_powers[grp]);
            if (x > 0.0)
                g0s.push_back(g_seeds[grp] / x);
        }
        theta.values[lay.i_g0()] = detail::stable_mean(g0s, 1.0);
    }

    std::vector<double> amp_seeds;
    for (std::size_t k = 0; k < prob.datasets.size(); ++k) {
        double delta_seed = 0.0;
        double amp = 0.5;
        if (dips[k].size() == 2)
            delta_seed = 2.0 * ((dips[k][0].pos + dips[k][1].pos) / 2.0 - omega_seed);
        else if (dips[k].size() == 1)
            delta_seed = dips[k][0].pos - omega_seed;
        if (!dips[k].empty()) {
            double fmin = dips[k][0].floor_r;
            for (const auto& f : dips[k])
                fmin = std::min(fmin, f.floor_r);
            amp = std::clamp(1.0 - std::sqrt(std::clamp(fmin, 0.0, 1.0)), 0.05, 1.0);
        }
        theta.values[lay.i_delta(k)] =
            std::clamp(delta_seed, b[lay.i_delta(k)].first, b[lay.i_delta(k)].second);
        if (prob.share_amp)
            amp_seeds.push_back(amp);
        else
            theta.values[lay.i_amp(k)] = amp;
    }
    if (prob.share_amp)
        theta.values[lay.i_amp(0)] = detail::stable_mean(amp_seeds, 0.5);

    // keep the seed inside the box (freeze_coupling pins the g block at 0)
    for (std::size_t i = 0; i < lay.n_params(); ++i)
        theta.values[i] = std::clamp(theta.values[i], b[i].first, b[i].second);
    return theta;
}

/// Weighted straight-line fit of coupling rates against sqrt(photon number),
/// through the origin: g = g0 * sqrt(photon_calib * P).
struct G0Estimate {
    double g0 = 0.0;
    double std_err = 0.0;
};

inline G0Estimate estimate_g0(const std::vector<double>& powers_w,
                              const std::vector<double>& g_values,
                              const std::vector<double>& g_errors,
                              double photon_calib) {
    const std::size_t m = powers_w.size();
    if (m == 0 || g_values.size() != m || g_errors.size() != m)
        throw std::domain_error("estimate_g0: need equal-length, non-empty inputs");
    for (double e : g_errors)
        if (!(e > 0.0))
            throw std::domain_error("estimate_g0: g errors must be > 0");
    if (m >= 2) {
        bool all_equal = true;
        for (std::size_t j = 1; j < m; ++j)
            all_equal = all_equal && powers_w[j] == powers_w[0];
        if (all_equal)
            throw std::domain_error("estimate_g0: all powers equal; slope is unconstrained");
    }

    double sxx = 0.0, sxg = 0.0;
    std::vector<double> x(m);
    for (std::size_t j = 0; j < m; ++j) {
        if (powers_w[j] < 0.0)
            throw std::domain_error("estimate_g0: powers must be >= 0");
        x[j] = std::sqrt(photon_calib * powers_w[j]);
        const double w = 1.0 / (g_errors[j] * g_errors[j]);
        sxx += w * x[j] * x[j];
        sxg += w * x[j] * g_values[j];
    }
    if (!(sxx > 0.0))
        throw std::domain_error("estimate_g0: all powers are zero; slope is unconstrained");

    G0Estimate est;
    est.g0 = sxg / sxx;
    double chi2 = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double resid = (g_values[j] - est.g0 * x[j]) / g_errors[j];
        chi2 += resid * resid;
    }
    const double s2 = m >= 2 ? chi2 / static_cast<double>(m - 1) : 0.0;
    est.std_err = std::sqrt(s2 / sxx);
    return est;
}

} // namespace omspec
