#pragma once

/**
 * @file radial_solver.hpp
 * @brief Implicit time integration of the rotationally symmetric graph flow
 *
 *     u_t = -(1+u_r^2)^2 / (u_rr + (n-1)(1+u_r^2) u_r / r)
 *
 * on [0, R]. The effective diffusivity grows like r^2, so every stage is
 * implicit: a Newton solve of  y - base - c dt f(y) = 0  with a tridiagonal
 * Jacobian. Two schemes share that stage solver: backward Euler (one stage)
 * and the two-stage, L-stable, stiffly accurate SDIRK of order 2.
 *
 * Axis: u_r(0) = 0 by reflection. Far field: either u_r(R) = alpha(t) from the
 * sandwiching cone (ghost node), u(R) = u(R,0) + (alpha(t) - alpha0) R, or a
 * caller-supplied Dirichlet trace.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "imcf/errors.hpp"
#include "imcf/exact_solutions.hpp"
#include "imcf/geometry.hpp"
#include "imcf/grid.hpp"
#include "imcf/report.hpp"
#include "imcf/stencil.hpp"

namespace imcf {

enum class FarFieldKind { NeumannConeSlope, DirichletShift };
enum class TimeScheme { BackwardEuler, Sdirk2 };

struct SolverConfig {
    double dt = 1e-3;
    double newton_tol = 1e-10;
    int newton_max_iter = 30;
    double H_min = 1e-9;
    FarFieldKind bc = FarFieldKind::NeumannConeSlope;
    double flat_eps = 1e-2;
    TimeScheme scheme = TimeScheme::Sdirk2;
    std::size_t sample_every = 1;  ///< diagnostics row every k steps

    void validate() const {
        if (!(dt > 0.0)) throw DomainError("solver.dt must be positive");
        if (!(newton_tol > 0.0)) throw DomainError("solver.newton_tol must be positive");
        if (newton_max_iter < 1) throw DomainError("solver.newton_max_iter must be >= 1");
        if (!(H_min > 0.0)) throw DomainError("solver.H_min must be positive");
        if (!(flat_eps > 0.0)) throw DomainError("solver.flat_eps must be positive");
        if (sample_every < 1) throw DomainError("solver.sample_every must be >= 1");
    }
};

/// Boundary condition at r = R for one stage time.
struct FarFieldData {
    bool dirichlet = false;
    double value = 0.0;  ///< slope u_r(R) or height u(R)
};

enum class StopReason { None, ReachedEnd, Flattened, CurvatureFloor };

inline std::string_view stop_reason_name(StopReason s) {
    switch (s) {
        case StopReason::None: return "none";
        case StopReason::ReachedEnd: return "reached_end";
        case StopReason::Flattened: return "flattened";
        case StopReason::CurvatureFloor: return "curvature_floor";
    }
    return "?";
}

struct RadialSim {
    RadialProfile profile;
    ConeFamily cone;
    SolverConfig config;
    DiagnosticsSettings diag;
    double u_far0 = 0.0;  ///< u(R, 0), anchor of the DirichletShift trace
    /// Optional Dirichlet trace u(R, t) replacing the cone-driven far-field data.
    std::function<double(double)> far_trace;
    double c0 = 0.0;  ///< min H*u of the initial datum
    double C0 = 0.0;  ///< max H*u of the initial datum
    std::size_t steps = 0;
    std::vector<DiagnosticsRow> history;
    /// (t, sup_{r <= R/2} |u_r|) after every step, for extinction-time estimates.
    std::vector<std::array<double, 2>> flat_track;
    StopReason stop = StopReason::None;

    double t() const { return profile.t; }
    const RadialGrid& grid() const { return profile.grid; }
    const std::vector<double>& u() const { return profile.u; }
    /// Far-field data are only defined strictly before this time.
    double data_lifetime() const {
        return far_trace ? std::numeric_limits<double>::infinity() : cone_lifetime(cone);
    }
};

namespace detail {

/// Nodal speed f(u) and its tridiagonal Jacobian (lower, diag, upper).
struct RadialOperator {
    std::vector<double> f, lower, diag, upper, H;
};

/// Evaluates the discrete speed. Returns false if the denominator (W^3 H) is
/// not positive somewhere, i.e. the state left the mean-convex regime.
inline bool evaluate_radial(const RadialGrid& g, std::span<const double> u, const FarFieldData& bc,
                            RadialOperator& op) {
    const std::size_t N = g.size();
    const int n = g.n();
    const auto& r = g.nodes();
    op.f.assign(N, 0.0);
    op.lower.assign(N, 0.0);
    op.diag.assign(N, 0.0);
    op.upper.assign(N, 0.0);
    op.H.assign(N, 0.0);

    // axis: u_r = 0, u_r/r -> u_rr, D = n u_rr
    {
        const double s = 2.0 * (u[1] - u[0]) / (r[1] * r[1]);
        const double D = n * s;
        if (!(D > 0.0) || !std::isfinite(D)) return false;
        op.f[0] = -1.0 / D;
        const double dfdD = 1.0 / (D * D);
        op.diag[0] = dfdD * n * (-2.0 / (r[1] * r[1]));
        op.upper[0] = dfdD * n * (2.0 / (r[1] * r[1]));
        op.H[0] = D;
    }
    auto node = [&](std::size_t i, double p, double s, double dp_m, double dp_0, double dp_p, double ds_m,
                    double ds_0, double ds_p) {
        const double W2 = 1.0 + p * p;
        const double D = s + (n - 1) * W2 * p / r[i];
        if (!(D > 0.0) || !std::isfinite(D)) return false;
        const double W4 = W2 * W2;
        op.f[i] = -W4 / D;
        const double dDdp = (n - 1) * (1.0 + 3.0 * p * p) / r[i];
        const double dfdp = -(4.0 * p * W2 * D - W4 * dDdp) / (D * D);
        const double dfds = W4 / (D * D);
        op.lower[i] = dfdp * dp_m + dfds * ds_m;
        op.diag[i] = dfdp * dp_0 + dfds * ds_0;
        op.upper[i] = dfdp * dp_p + dfds * ds_p;
        op.H[i] = D / (W2 * std::sqrt(W2));
        return true;
    };
    for (std::size_t i = 1; i + 1 < N; ++i) {
        const ThreePoint w = three_point(r[i] - r[i - 1], r[i + 1] - r[i]);
        const double p = w.d1[0] * u[i - 1] + w.d1[1] * u[i] + w.d1[2] * u[i + 1];
        const double s = w.d2[0] * u[i - 1] + w.d2[1] * u[i] + w.d2[2] * u[i + 1];
        if (!node(i, p, s, w.d1[0], w.d1[1], w.d1[2], w.d2[0], w.d2[1], w.d2[2])) return false;
    }
    const std::size_t M = N - 1;
    if (bc.dirichlet) {
        // algebraic row; the stage solver pins u_M directly
        op.f[M] = 0.0;
        op.H[M] = op.H[M - 1];
    } else {
        // ghost node u_{M+1} = u_{M-1} + 2 h alpha mirrors the last spacing
        const double h = r[M] - r[M - 1];
        const double p = bc.value;
        const double s = 2.0 * (u[M - 1] - u[M] + h * p) / (h * h);
        if (!node(M, p, s, 0.0, 0.0, 0.0, 2.0 / (h * h), -2.0 / (h * h), 0.0)) return false;
    }
    return true;
}

/// Thomas algorithm for a(i) x(i-1) + b(i) x(i) + c(i) x(i+1) = d(i).
inline void solve_tridiagonal(std::span<const double> a, std::span<const double> b, std::span<const double> c,
                              std::vector<double>& d) {
    const std::size_t N = b.size();
    std::vector<double> cp(N), dp(N);
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for (std::size_t i = 1; i < N; ++i) {
        const double m = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / m;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / m;
    }
    d[N - 1] = dp[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) d[i] = dp[i] - cp[i] * d[i + 1];
}

inline double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// Solve y - base - c f(y) = 0 by damped Newton, starting from the first
/// admissible (mean-convex) candidate iterate.
inline std::vector<double> stage_solve(const RadialGrid& g, const std::vector<double>& base, double c,
                                       const FarFieldData& bc, std::vector<std::vector<double>> candidates,
                                       const SolverConfig& cfg, double t_stage) {
    const std::size_t N = g.size();
    const std::size_t M = N - 1;
    const double scale = 1.0 + max_abs(base);
    const double tol = cfg.newton_tol * scale;

    RadialOperator op;
    std::vector<double> G(N), trialG(N);
    auto residual = [&](const std::vector<double>& y, std::vector<double>& out) -> std::optional<double> {
        if (!evaluate_radial(g, y, bc, op)) return std::nullopt;
        for (std::size_t i = 0; i < N; ++i) out[i] = y[i] - base[i] - c * op.f[i];
        if (bc.dirichlet) out[M] = y[M] - bc.value;
        const double nrm = max_abs(out);
        if (!std::isfinite(nrm)) return std::nullopt;
        return nrm;
    };

    std::vector<double> y;
    std::optional<double> norm;
    for (auto& cand : candidates) {
        if (bc.dirichlet) cand[M] = bc.value;
        norm = residual(cand, G);
        if (norm) {
            y = std::move(cand);
            break;
        }
    }
    if (!norm) throw NewtonDiverged(std::numeric_limits<double>::infinity(), 0, t_stage);
    std::vector<double> a(N), b(N), cc(N), delta(N), trial(N);
    for (int it = 0; it < cfg.newton_max_iter; ++it) {
        if (*norm <= tol) return y;
        // Jacobian of G at y (op holds the evaluation at y)
        evaluate_radial(g, y, bc, op);
        for (std::size_t i = 0; i < N; ++i) {
            a[i] = -c * op.lower[i];
            b[i] = 1.0 - c * op.diag[i];
            cc[i] = -c * op.upper[i];
            delta[i] = -G[i];
        }
        if (bc.dirichlet) {
            a[M] = 0.0;
            b[M] = 1.0;
            cc[M] = 0.0;
        }
        solve_tridiagonal(a, b, cc, delta);

        double theta = 1.0;
        bool accepted = false;
        for (int halving = 0; halving <= 20; ++halving) {
            for (std::size_t i = 0; i < N; ++i) trial[i] = y[i] + theta * delta[i];
            const auto tn = residual(trial, trialG);
            if (tn && *tn < *norm) {
                y.swap(trial);
                G.swap(trialG);
                norm = tn;
                accepted = true;
                break;
            }
            theta *= 0.5;
        }
        if (!accepted) {
            // stagnation at roundoff is convergence
            if (*norm <= 100.0 * tol) return y;
            throw NewtonDiverged(*norm, it + 1, t_stage);
        }
    }
    if (*norm <= tol) return y;
    throw NewtonDiverged(*norm, cfg.newton_max_iter, t_stage);
}

}  // namespace detail

/// Far-field data of a simulation at time t.
inline FarFieldData far_field(const RadialSim& sim, double t) {
    if (sim.far_trace) return {true, sim.far_trace(t)};
    const double a = slope_or_zero(sim.cone, std::min(t, cone_lifetime(sim.cone)));
    if (sim.config.bc == FarFieldKind::NeumannConeSlope) return {false, a};
    return {true, sim.u_far0 + (a - sim.cone.alpha0) * sim.grid().R()};
}

/// Discrete speed f(u) of the radial flow; the far-field node is zero under
/// Dirichlet data. Throws CurvatureFloor if the state is not mean convex.
inline std::vector<double> radial_speed(const RadialGrid& g, const std::vector<double>& u, const FarFieldData& bc,
                                        double t = 0.0) {
    detail::RadialOperator op;
    if (!detail::evaluate_radial(g, u, bc, op)) {
        std::size_t worst = 0;
        for (std::size_t i = 0; i < op.H.size(); ++i)
            if (op.H[i] <= 0.0) { worst = i; break; }
        throw CurvatureFloor(worst, 0.0, t);
    }
    return op.f;
}

/// Discrete mean curvature used by the solver (H = D / W^3).
inline std::vector<double> radial_curvature(const RadialGrid& g, const std::vector<double>& u,
                                            const FarFieldData& bc) {
    detail::RadialOperator op;
    detail::evaluate_radial(g, u, bc, op);
    return op.H;
}

inline double flat_sup_radial(const RadialProfile& p) {
    const auto f = compute_fields_radial(p);
    const double half = 0.5 * p.grid.R();
    double s = 0.0;
    for (std::size_t i = 0; i < f.size() && f.x[i][0] <= half * (1 + 1e-12); ++i) s = std::max(s, std::abs(f.du[i][0]));
    return s;
}

/// Simulation without cone-sandwich validation (regularised or self-similar
/// data). Still requires a strictly mean-convex datum.
inline RadialSim make_radial_sim(RadialProfile profile, const ConeFamily& cone, const SolverConfig& config,
                                 std::function<double(double)> far_trace = {}) {
    config.validate();
    if (!far_trace) validate(cone);
    if (profile.u.size() != profile.grid.size()) throw DomainError("initial datum size does not match the grid");
    for (double x : profile.u)
        if (!std::isfinite(x)) throw DomainError("initial datum has non-finite values");
    RadialSim sim;
    sim.profile = std::move(profile);
    sim.cone = cone;
    sim.config = config;
    sim.u_far0 = sim.profile.u.back();
    sim.far_trace = std::move(far_trace);

    const auto f = compute_fields_radial(sim.profile);
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!(f.H[i] > 0.0)) throw MeanConvexityViolation(i, f.H[i]);
    // a resolved smooth datum has continuous u_rr across the axis
    const double jump = std::abs(f.hess[0][0] - f.hess[1][0]);
    if (jump > 0.5 * std::abs(f.hess[0][0])) throw MeanConvexityViolation(0, f.H[0]);

    sim.c0 = std::numeric_limits<double>::infinity();
    sim.C0 = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.size(); ++i) {
        sim.c0 = std::min(sim.c0, f.H[i] * f.u[i]);
        sim.C0 = std::max(sim.C0, f.H[i] * f.u[i]);
    }
    if (!sim.far_trace) sim.history.push_back(diagnostics_row(f, sim.cone, sim.grid().R(), sim.diag));
    sim.flat_track.push_back({sim.t(), flat_sup_radial(sim.profile)});
    return sim;
}

/**
 * Validated start of a sandwiched run: alpha0 r <= u0 <= alpha0 r + kappa
 * node-wise, H > 0, and c0 <= H u <= C0 with c0 > 0. The measured bounds are
 * stored in the simulation.
 */
inline RadialSim init_radial(const std::vector<double>& u0, const ConeFamily& cone, const RadialGrid& grid,
                             const SolverConfig& config) {
    validate(cone);
    if (u0.size() != grid.size()) throw DomainError("initial datum size does not match the grid");
    const double tol = 1e-12 * (1.0 + cone.alpha0 * grid.R() + cone.kappa);
    std::size_t worst = 0;
    double worst_mag = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double viol = sandwich_violation(cone, 0.0, grid[i], u0[i]);
        if (viol > worst_mag) {
            worst_mag = viol;
            worst = i;
        }
    }
    if (worst_mag > tol) throw SandwichViolation(worst, worst_mag);
    RadialSim sim = make_radial_sim(RadialProfile{grid, u0, 0.0}, cone, config);
    if (!(sim.c0 > 0.0)) {
        const auto f = compute_fields_radial(sim.profile);
        std::size_t k = 0;
        for (std::size_t i = 0; i < f.size(); ++i)
            if (f.H[i] * f.u[i] <= 0.0) { k = i; break; }
        throw MeanConvexityViolation(k, f.H[k]);
    }
    return sim;
}

inline constexpr double kSdirkGamma = 1.0 - 0.70710678118654752440;

/// Advance in place by dt. Throws CurvatureFloor if min H <= H_min before or
/// after the step; the simulation is left untouched when anything throws.
inline void advance(RadialSim& sim, double dt) {
    if (!(dt > 0.0)) throw DomainError("time step must be positive");
    const RadialGrid& g = sim.grid();
    const double t0 = sim.t();
    const auto& u = sim.profile.u;
    const SolverConfig& cfg = sim.config;

    {
        const auto H = radial_curvature(g, u, far_field(sim, t0));
        for (std::size_t i = 0; i < H.size(); ++i)
            if (!(H[i] > cfg.H_min)) throw CurvatureFloor(i, H[i], t0);
    }

    std::vector<double> next;
    auto predictor = [&](const std::vector<double>& from, double c, const FarFieldData& bc) {
        detail::RadialOperator op;
        std::vector<double> y = from;
        if (detail::evaluate_radial(g, from, bc, op))
            for (std::size_t i = 0; i < y.size(); ++i) y[i] += c * op.f[i];
        return y;
    };
    if (cfg.scheme == TimeScheme::BackwardEuler) {
        const auto bc = far_field(sim, t0 + dt);
        next = detail::stage_solve(g, u, dt, bc, {predictor(u, dt, far_field(sim, t0)), u}, cfg, t0 + dt);
    } else {
        const double gam = kSdirkGamma;
        const auto bc1 = far_field(sim, t0 + gam * dt);
        const auto y1 =
            detail::stage_solve(g, u, gam * dt, bc1, {predictor(u, gam * dt, far_field(sim, t0)), u}, cfg, t0 + gam * dt);
        // k1 = (y1 - u)/(gam dt); base of stage 2 is u + (1-gam) dt k1
        std::vector<double> base(u.size()), guess(u.size());
        const double w = (1.0 - gam) / gam;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double k1dt = (y1[i] - u[i]) / gam;
            base[i] = u[i] + w * (y1[i] - u[i]);
            guess[i] = u[i] + k1dt;
        }
        const auto bc2 = far_field(sim, t0 + dt);
        next = detail::stage_solve(g, base, gam * dt, bc2, {std::move(guess), y1, base}, cfg, t0 + dt);
    }

    double descent = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < u.size(); ++i) descent = std::max(descent, next[i] - u[i]);

    {
        const auto H = radial_curvature(g, next, far_field(sim, t0 + dt));
        for (std::size_t i = 0; i < H.size(); ++i)
            if (!(H[i] > cfg.H_min)) throw CurvatureFloor(i, H[i], t0 + dt);
    }
    sim.profile.u = std::move(next);
    sim.profile.t = t0 + dt;
    ++sim.steps;
    sim.flat_track.push_back({sim.t(), flat_sup_radial(sim.profile)});
    if (sim.steps % cfg.sample_every == 0 && !sim.far_trace) {
        auto row = diagnostics_row(compute_fields_radial(sim.profile), sim.cone, g.R(), sim.diag);
        row.max_descent = descent;
        sim.history.push_back(row);
    } else if (!sim.history.empty()) {
        sim.history.back().max_descent = std::max(sim.history.back().max_descent, descent);
    }
}

inline RadialSim step(RadialSim sim, double dt) {
    advance(sim, dt);
    return sim;
}

inline RadialSim step(RadialSim sim) {
    advance(sim, sim.config.dt);
    return sim;
}

/// Step size used by run_until from time t: config.dt, clipped to t_end, and
/// halving the remaining lifetime of the far-field data near extinction.
inline double next_step_size(const RadialSim& sim, double t_end) {
    const double t = sim.t();
    double dt = std::min(sim.config.dt, t_end - t);
    const double life = sim.data_lifetime();
    if (t + dt >= life * (1.0 - 1e-12)) dt = 0.5 * (life - t);
    return dt;
}

inline constexpr int kMaxStepHalvings = 6;

/// One step of size dt, retried with dt/2, dt/4, ... when a stage fails.
/// Returns false if the curvature floor persists at the smallest step;
/// NewtonDiverged at the smallest step propagates.
inline bool advance_with_retries(RadialSim& sim, double dt) {
    for (int k = 0;; ++k) {
        try {
            advance(sim, dt);
            return true;
        } catch (const CurvatureFloor&) {
            if (k == kMaxStepHalvings) return false;
        } catch (const NewtonDiverged&) {
            if (k == kMaxStepHalvings) throw;
        }
        dt *= 0.5;
    }
}

struct RunResult {
    RadialSim sim;
    DiagnosticsReport report;
};

/**
 * March until t_end, a flattened profile (sup_{r <= R/2} |u_r| < flat_eps) or
 * the curvature floor, whichever comes first. NewtonDiverged propagates.
 * on_sample sees the initial state, every sample_every-th step and the final state.
 */
inline RunResult run_until(RadialSim sim, double t_end,
                           const std::function<void(const RadialSim&)>& on_sample = {}) {
    sim.stop = StopReason::None;
    const double min_dt = 1e-14 * std::max(1.0, std::abs(sim.t()));
    double observed = std::numeric_limits<double>::quiet_NaN();
    auto observe = [&] {
        if (on_sample && sim.t() != observed) {
            on_sample(sim);
            observed = sim.t();
        }
    };
    observe();
    while (true) {
        if (!sim.far_trace && sim.flat_track.back()[1] < sim.config.flat_eps) {
            sim.stop = StopReason::Flattened;
            break;
        }
        if (sim.t() >= t_end * (1.0 - 1e-14)) {
            sim.stop = StopReason::ReachedEnd;
            break;
        }
        const double dt = next_step_size(sim, t_end);
        if (!(dt > min_dt)) {
            sim.stop = StopReason::CurvatureFloor;
            break;
        }
        if (!advance_with_retries(sim, dt)) {
            sim.stop = StopReason::CurvatureFloor;
            break;
        }
        if (sim.steps % sim.config.sample_every == 0) observe();
    }
    observe();
    // the final state is always sampled
    if (!sim.far_trace && (sim.history.empty() || sim.history.back().t != sim.t())) {
        double descent = sim.history.empty() ? 0.0 : sim.history.back().max_descent;
        auto row = diagnostics_row(compute_fields_radial(sim.profile), sim.cone, sim.grid().R(), sim.diag);
        row.max_descent = descent;
        sim.history.push_back(row);
    }
    DiagnosticsReport report;
    report.rows = sim.history;
    return {std::move(sim), std::move(report)};
}

inline double mean_height(const RadialProfile& p, double r_max) {
    // trapezoidal line average of u over [0, r_max]
    const auto& r = p.grid.nodes();
    double area = 0.0, len = 0.0;
    for (std::size_t i = 0; i + 1 < r.size() && r[i] < r_max; ++i) {
        const double b = std::min(r[i + 1], r_max);
        const double ub = p.grid.interpolate(p.u, b);
        area += 0.5 * (p.u[i] + ub) * (b - r[i]);
        len += b - r[i];
    }
    return area / len;
}

struct ExtinctionEstimate {
    double T_est = 0.0;
    double t_eps = 0.0;       ///< first time sup|u_r| < flat_eps
    double t_eps_half = 0.0;  ///< first time sup|u_r| < flat_eps/2
    double h_eps = 0.0;       ///< mean height over r <= R/4 at t_eps
    double h_eps_half = 0.0;
    double h_extrapolated = 0.0;
    bool extrapolated = false;  ///< false if the run could not reach flat_eps/2
};

namespace detail {
inline std::optional<double> first_crossing(const std::vector<std::array<double, 2>>& track, double level) {
    for (std::size_t k = 0; k < track.size(); ++k) {
        if (track[k][1] < level) {
            if (k == 0) return track[0][0];
            const auto& a = track[k - 1];
            const auto& b = track[k];
            const double w = (a[1] - level) / (a[1] - b[1]);
            return a[0] + w * (b[0] - a[0]);
        }
    }
    return std::nullopt;
}
}  // namespace detail

/**
 * Extinction time from the first crossings of flat_eps and flat_eps/2,
 * extrapolated linearly to zero slope: T = 2 t(eps/2) - t(eps). Continues the
 * run past the flattening point when needed.
 */
inline ExtinctionEstimate estimate_extinction(const RadialSim& sim) {
    if (sim.stop != StopReason::Flattened && sim.stop != StopReason::CurvatureFloor)
        throw NotFlattened("extinction estimate needs a run that flattened or reached the curvature floor");
    const double eps = sim.config.flat_eps;
    const auto t1 = detail::first_crossing(sim.flat_track, eps);
    if (!t1) throw NotFlattened("run never reached sup|u_r| < flat_eps");
    ExtinctionEstimate est;
    est.t_eps = *t1;
    est.h_eps = mean_height(sim.profile, 0.25 * sim.grid().R());

    RadialSim cont = sim;
    cont.config.flat_eps = 0.5 * eps;
    RunResult res = run_until(std::move(cont), std::numeric_limits<double>::infinity());
    const auto t2 = detail::first_crossing(res.sim.flat_track, 0.5 * eps);
    if (!t2) {
        est.T_est = est.t_eps;
        est.h_extrapolated = est.h_eps;
        return est;
    }
    est.t_eps_half = *t2;
    est.h_eps_half = mean_height(res.sim.profile, 0.25 * sim.grid().R());
    est.T_est = 2.0 * est.t_eps_half - est.t_eps;
    est.h_extrapolated = 2.0 * est.h_eps_half - est.h_eps;
    est.extrapolated = true;
    return est;
}

// ---------------------------------------------------------------------------
// Initial data

inline std::vector<double> hyperboloid_datum(const RadialGrid& g, double alpha0, double kappa) {
    return g.sample([&](double r) { return std::sqrt(alpha0 * alpha0 * r * r + kappa * kappa); });
}

/// Upper cone alpha0 r + kappa rounded off at the vertex over the width
/// kappa/(2 alpha0); sits inside the sandwich with far-field offset kappa/2.
inline std::vector<double> smooth_cone_datum(const RadialGrid& g, double alpha0, double kappa) {
    const double d = kappa / (2.0 * alpha0);
    return g.sample([&](double r) { return kappa + alpha0 * (std::sqrt(r * r + d * d) - d); });
}

// ---------------------------------------------------------------------------
// epsilon-regularisation family u0 + eps (r^2 + 1)

struct RegularizedTrajectory {
    double eps;
    std::vector<RadialProfile> snapshots;  ///< at the common sample times
};

struct RegularizationStudy {
    std::vector<double> times;
    std::vector<RegularizedTrajectory> family;  ///< ordered as eps_list
    double worst_order_defect = 0.0;  ///< max over times and nodes of u_{eps small} - u_{eps large}
    bool monotone = true;             ///< no defect beyond 1e-8
};

/**
 * Evolves u0 + eps (r^2 + 1) for each eps with Dirichlet data u_eps(R, 0)
 * shifted by the cone, (alpha(t) - alpha0) R, and compares the trajectories
 * node-wise at common times. eps_list must be strictly decreasing and
 * non-negative (0 gives the base run).
 */
inline RegularizationStudy epsilon_regularization_study(const std::vector<double>& u0, const ConeFamily& cone,
                                                        const RadialGrid& grid, SolverConfig config,
                                                        const std::vector<double>& eps_list,
                                                        const std::vector<double>& sample_times) {
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        if (!(eps_list[k] >= 0.0)) throw DomainError("regularisation parameters must be >= 0");
        if (k > 0 && !(eps_list[k] < eps_list[k - 1]))
            throw DomainError("regularisation parameters must be strictly decreasing");
    }
    config.bc = FarFieldKind::DirichletShift;
    RegularizationStudy study;
    study.times = sample_times;
    for (double eps : eps_list) {
        std::vector<double> ue(u0.size());
        for (std::size_t i = 0; i < u0.size(); ++i) ue[i] = u0[i] + eps * (grid[i] * grid[i] + 1.0);
        RadialSim sim = make_radial_sim(RadialProfile{grid, ue, 0.0}, cone, config);
        RegularizedTrajectory traj{eps, {}};
        for (double ts : sample_times) {
            auto res = run_until(std::move(sim), ts);
            sim = std::move(res.sim);
            traj.snapshots.push_back(sim.profile);
        }
        study.family.push_back(std::move(traj));
    }
    for (std::size_t k = 1; k < study.family.size(); ++k) {
        for (std::size_t s = 0; s < sample_times.size(); ++s) {
            const auto& small = study.family[k].snapshots[s].u;
            const auto& large = study.family[k - 1].snapshots[s].u;
            for (std::size_t i = 0; i < small.size(); ++i)
                study.worst_order_defect = std::max(study.worst_order_defect, small[i] - large[i]);
        }
    }
    study.monotone = study.worst_order_defect <= 1e-8;
    return study;
}

}  // namespace imcf
