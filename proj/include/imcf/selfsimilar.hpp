#pragma once

/**
 * @file selfsimilar.hpp
 * @brief Rotationally symmetric self-similar profiles u(x,t) = e^{lambda t} ubar(e^{-lambda t} x).
 *
 * The profile solves
 *
 *     u_rr = (1/lambda) (1+u_r^2)^2 / (r u_r - u) - (n-1)(1+u_r^2) u_r / r,
 *     u(0) = kappa < 0,  u_r(0) = 0,
 *
 * an initial-value problem (no shooting parameter). The removable singularity
 * at r = 0 is bypassed with the two-term series u = kappa + u2 r^2 / 2,
 * u2 = 1 / (n lambda |kappa|). The equation turns stiff as r grows, so the
 * integration uses GSL's variable-order BDF stepper with the analytic Jacobian.
 */

#include <gsl/gsl_errno.h>
#include <gsl/gsl_odeiv2.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "imcf/errors.hpp"
#include "imcf/grid.hpp"
#include "imcf/radial_solver.hpp"

namespace imcf {

struct ProfileSample {
    double r, u, ur;
};

struct SelfSimilarProfile {
    double lambda = 1.0;
    double kappa = -1.0;
    int n = 3;
    double r_max = 0.0;
    double q_target = 0.0;
    std::vector<ProfileSample> samples;  ///< accepted integration points, r = 0 first

    /// Cubic Hermite interpolation of u on the accepted points (u_r are exact derivatives).
    double u_at(double r) const {
        if (r <= 0.0) return kappa;
        if (r >= samples.back().r) {
            if (r > samples.back().r * (1 + 1e-12)) throw DomainError("radius beyond the computed profile");
            return samples.back().u;
        }
        auto it = std::upper_bound(samples.begin(), samples.end(), r,
                                   [](double x, const ProfileSample& s) { return x < s.r; });
        const ProfileSample& b = *it;
        const ProfileSample& a = *(it - 1);
        const double h = b.r - a.r;
        const double s = (r - a.r) / h;
        const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
        const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
        return h00 * a.u + h10 * h * a.ur + h01 * b.u + h11 * h * b.ur;
    }
};

inline double flux_exponent_target(int n, double lambda) {
    if (n < 2) throw DomainError("dimension n must be >= 2");
    if (!(lambda > 1.0 / (n - 1))) throw DomainError("lambda must exceed 1/(n-1)");
    return lambda * (n - 1) / ((n - 1) * lambda - 1.0);
}

struct ShootOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.0;        ///< <= 0: unlimited
    double slope_guard = 1e60;    ///< BlowUp once |u_r| exceeds this
    double series_factor = 1e-4;  ///< r_series = series_factor * |kappa|
};

namespace detail {

struct ProfileParams {
    double lambda;
    int n;
};

inline int profile_rhs(double r, const double x[], double dxdr[], void* params) {
    const auto* P = static_cast<const ProfileParams*>(params);
    const double u = x[0], p = x[1];
    const double W2 = 1.0 + p * p;
    dxdr[0] = p;
    dxdr[1] = W2 * W2 / (P->lambda * (r * p - u)) - (P->n - 1) * W2 * p / r;
    return std::isfinite(dxdr[1]) ? GSL_SUCCESS : GSL_EBADFUNC;
}

inline int profile_jacobian(double r, const double x[], double* J, double dfdr[], void* params) {
    const auto* P = static_cast<const ProfileParams*>(params);
    const double u = x[0], p = x[1];
    const double W2 = 1.0 + p * p;
    const double D = r * p - u;
    const double g = W2 * W2 / (P->lambda * D);
    J[0] = 0.0;
    J[1] = 1.0;
    J[2] = g / D;
    J[3] = 4.0 * p * W2 / (P->lambda * D) - g * r / D - (P->n - 1) * (1.0 + 3.0 * p * p) / r;
    dfdr[0] = 0.0;
    dfdr[1] = -g * p / D + (P->n - 1) * W2 * p / (r * r);
    return GSL_SUCCESS;
}

inline double series_u2(int n, double lambda, double kappa) { return 1.0 / (n * lambda * std::abs(kappa)); }

/// GSL's multistep steppers need a driver; the driver owns step, control and evolve.
struct GslDriver {
    gsl_odeiv2_driver* d;
    GslDriver(const gsl_odeiv2_system* sys, double h0, double abs_tol, double rel_tol)
        : d(gsl_odeiv2_driver_alloc_y_new(sys, gsl_odeiv2_step_msbdf, h0, abs_tol, rel_tol)) {}
    ~GslDriver() { gsl_odeiv2_driver_free(d); }
    GslDriver(const GslDriver&) = delete;
    GslDriver& operator=(const GslDriver&) = delete;
};

/// Integrates from the series start to r_max. Accepted points go to `samples`;
/// the integrator lands exactly on every radius of the sorted list `probes`,
/// whose states are returned.
inline std::vector<ProfileSample> integrate_profile(double lambda, double kappa, int n, double r_max,
                                                    const ShootOptions& opt, std::vector<ProfileSample>& samples,
                                                    const std::vector<double>& probes = {}) {
    const double u2 = series_u2(n, lambda, kappa);
    const double rs = opt.series_factor * std::abs(kappa);
    if (!(rs < r_max)) throw DomainError("r_max must exceed the series start radius");
    samples.clear();
    samples.push_back({0.0, kappa, 0.0});
    double x[2] = {kappa + 0.5 * u2 * rs * rs, u2 * rs};
    samples.push_back({rs, x[0], x[1]});

    gsl_set_error_handler_off();
    ProfileParams params{lambda, n};
    gsl_odeiv2_system sys{profile_rhs, profile_jacobian, 2, &params};
    double h = 1e-3 * rs;
    GslDriver drv(&sys, h, opt.abs_tol, opt.rel_tol);

    std::vector<ProfileSample> probe_out;
    std::size_t next_probe = 0;
    while (next_probe < probes.size() && probes[next_probe] < rs) ++next_probe;
    double r = rs;
    while (r < r_max) {
        double target = r_max;
        if (next_probe < probes.size()) target = std::min(target, probes[next_probe]);
        if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
        const int status = gsl_odeiv2_evolve_apply(drv.d->e, drv.d->c, drv.d->s, &sys, &r, target, &h, x);
        if (status != GSL_SUCCESS || !std::isfinite(x[0]) || !std::isfinite(x[1]) ||
            std::abs(x[1]) > opt.slope_guard) {
            const ProfileSample& last = samples.back();
            throw BlowUp(last.r, last.r * last.ur / last.u);
        }
        if (!(r * x[1] - x[0] > 0.0))
            throw SeriesStartInvalid("denominator r u_r - u lost positivity at r = " + std::to_string(r));
        samples.push_back({r, x[0], x[1]});
        while (next_probe < probes.size() && probes[next_probe] <= r) {
            if (probes[next_probe] == r) probe_out.push_back({r, x[0], x[1]});
            ++next_probe;
        }
    }
    return probe_out;
}

}  // namespace detail

/// Integrates the profile on [0, r_max]. Throws SeriesStartInvalid if r u_r - u
/// stops being positive and BlowUp once |u_r| passes the overflow guard.
inline SelfSimilarProfile shoot_profile(double lambda, double kappa, int n, double r_max,
                                        const ShootOptions& opt = {}) {
    SelfSimilarProfile prof;
    prof.q_target = flux_exponent_target(n, lambda);
    if (!(kappa < 0.0)) throw DomainError("kappa must be negative");
    if (!(r_max > 0.0)) throw DomainError("r_max must be positive");
    prof.lambda = lambda;
    prof.kappa = kappa;
    prof.n = n;
    prof.r_max = r_max;
    detail::integrate_profile(lambda, kappa, n, r_max, opt, prof.samples);
    return prof;
}

/// Profile states at the requested radii, by dense output of a fresh integration.
inline std::vector<ProfileSample> profile_states(const SelfSimilarProfile& prof, std::vector<double> radii,
                                                 const ShootOptions& opt = {}) {
    std::sort(radii.begin(), radii.end());
    std::vector<ProfileSample> tmp;
    return detail::integrate_profile(prof.lambda, prof.kappa, prof.n, radii.back() * (1 + 1e-9), opt, tmp, radii);
}

/// Largest scaled residual of the elliptic equation at the given radii, with
/// u_rr from a fourth-order central difference of the dense solution. The
/// scale is the sum of the magnitudes of the three terms.
inline double elliptic_residual(const SelfSimilarProfile& prof, const std::vector<double>& radii,
                                const ShootOptions& opt = {}, double rel_step = 1e-3) {
    std::vector<double> pts;
    for (double r : radii) {
        const double d = rel_step * r;
        pts.insert(pts.end(), {r - 2 * d, r - d, r, r + d, r + 2 * d});
    }
    const auto st = profile_states(prof, pts, opt);
    double worst = 0.0;
    for (std::size_t k = 0; k + 4 < st.size(); k += 5) {
        const double r = st[k + 2].r, u = st[k + 2].u, p = st[k + 2].ur;
        const double d = st[k + 3].r - r;
        const double urr = (8.0 * (st[k + 3].ur - st[k + 1].ur) - (st[k + 4].ur - st[k].ur)) / (12.0 * d);
        const double W2 = 1.0 + p * p;
        const double a = urr, b = (prof.n - 1) * W2 * p / r, c = W2 * W2 / (prof.lambda * (r * p - u));
        worst = std::max(worst, std::abs(a + b - c) / (std::abs(a) + std::abs(b) + std::abs(c)));
    }
    return worst;
}

struct FluxEstimate {
    double q_est = 0.0;
    double ratios[3] = {0, 0, 0};  ///< r u_r / u at r_max/4, r_max/2, r_max
    double decade_variation = 0.0;  ///< relative change over [r_max/10, r_max]
};

inline double flux_ratio(const ProfileSample& s) { return s.r * s.ur / s.u; }

/**
 * Limit of r u_r / u from the dyadic triple at r_max/4, r_max/2, r_max by
 * Aitken extrapolation (geometric error decay), falling back to the last
 * ratio when the differences do not contract. Throws NotConverged if the
 * ratio still moves by 0.5% or more over the last decade.
 */
inline FluxEstimate flux_exponent(const SelfSimilarProfile& prof, const ShootOptions& opt = {}) {
    const double R = prof.r_max;
    const auto st = profile_states(prof, {0.1 * R, 0.25 * R, 0.5 * R, R}, opt);
    FluxEstimate est;
    const double f0 = flux_ratio(st[0]);
    for (int k = 0; k < 3; ++k) est.ratios[k] = flux_ratio(st[static_cast<std::size_t>(k) + 1]);
    est.decade_variation = std::abs(est.ratios[2] - f0) / std::abs(est.ratios[2]);
    if (!(est.decade_variation < 5e-3))
        throw NotConverged("flux ratio r u_r / u still varies by " + std::to_string(100 * est.decade_variation) +
                               "% over the last decade; increase r_max",
                           est.decade_variation);
    const double d1 = est.ratios[1] - est.ratios[0];
    const double d2 = est.ratios[2] - est.ratios[1];
    const double den = d2 - d1;
    if (den != 0.0 && std::abs(d2) < std::abs(d1))
        est.q_est = est.ratios[2] - d2 * d2 / den;
    else
        est.q_est = est.ratios[2];
    return est;
}

// ---------------------------------------------------------------------------
// Round trip through the time-dependent solver

struct RoundtripReport {
    double discrepancy = 0.0;  ///< max node-wise |u_num - u_exact|
    double h_max = 0.0;
    double dt = 0.0;
    std::size_t steps = 0;
};

/// Exact evolution e^{lambda t} ubar(e^{-lambda t} r).
inline double selfsimilar_height(const SelfSimilarProfile& prof, double r, double t) {
    const double s = std::exp(prof.lambda * t);
    return s * prof.u_at(r / s);
}

/**
 * Evolves the profile sampled on `grid` for dt_total with the radial solver
 * (Dirichlet trace from the exact ansatz at r = R) and compares with the
 * exact self-similar evolution at every node. The profile must cover R.
 */
inline RoundtripReport selfsimilar_roundtrip(const SelfSimilarProfile& prof, const RadialGrid& grid, double dt_total,
                                             SolverConfig config) {
    if (!(dt_total >= 0.0)) throw DomainError("dt_total must be >= 0");
    if (grid.n() != prof.n) throw DomainError("grid dimension differs from the profile dimension");
    RoundtripReport rep;
    rep.h_max = grid.max_spacing();
    rep.dt = config.dt;
    if (dt_total == 0.0) return rep;
    const double R = grid.R();
    auto u0 = grid.sample([&](double r) { return prof.u_at(r); });
    RadialSim sim = make_radial_sim(RadialProfile{grid, u0, 0.0}, ConeFamily{prof.n, 1.0, 0.0}, config,
                                    [&prof, R](double t) { return selfsimilar_height(prof, R, t); });
    while (sim.t() < dt_total * (1.0 - 1e-12)) {
        const double dt = std::min(config.dt, dt_total - sim.t());
        advance(sim, dt);
    }
    rep.steps = sim.steps;
    for (std::size_t i = 0; i < grid.size(); ++i)
        rep.discrepancy = std::max(rep.discrepancy, std::abs(sim.u()[i] - selfsimilar_height(prof, grid[i], sim.t())));
    return rep;
}

}  // namespace imcf
