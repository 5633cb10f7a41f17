#pragma once

/**
 * @file cartesian_solver.hpp
 * @brief The graph flow u_t = -W^4 / N for n = 2 on the lattice of [-L, L]^2,
 *
 *     N = (1 + u_2^2) u_11 - 2 u_1 u_2 u_12 + (1 + u_1^2) u_22  ( = W^3 H ).
 *
 * Centred differences everywhere. Edge nodes see ghost values reflected across
 * the edge, u_ghost = u_mirror + 2 h g, where g = alpha(t) L / |x_edge| is the
 * outward normal slope of the sandwiching cone; corner ghosts reflect twice.
 * Stages are solved by damped Newton with BiCGSTAB + incomplete LU on the
 * sparse Jacobian. Time stepping reuses the radial schemes.
 */

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "imcf/errors.hpp"
#include "imcf/exact_solutions.hpp"
#include "imcf/geometry.hpp"
#include "imcf/grid.hpp"
#include "imcf/radial_solver.hpp"
#include "imcf/report.hpp"

namespace imcf {

struct Sim2D {
    GraphState2D state;
    ConeFamily cone;
    SolverConfig config;
    DiagnosticsSettings diag;
    double c0 = 0.0;
    double C0 = 0.0;
    std::size_t steps = 0;
    std::vector<DiagnosticsRow> history;
    std::vector<std::array<double, 2>> flat_track;
    StopReason stop = StopReason::None;
    double linear_tol = 1e-12;

    double t() const { return state.t; }
};

namespace detail {

/// A lattice value expressed through the unknowns: u[idx] + ghost * 2 h alpha.
struct LatticeRef {
    std::size_t idx;
    double ghost;
};

/// Outward cone slope factor L / |x| on the edge through (x_edge, x_other).
inline double edge_factor(double L, double other) { return L / std::sqrt(L * L + other * other); }

inline LatticeRef resolve(const GraphState2D& s, long i, long j) {
    const long last = static_cast<long>(s.side()) - 1;
    double ghost = 0.0;
    // reflect in i, then in j; each reflection adds the normal slope at the edge
    if (i > last) {
        ghost += edge_factor(s.L, -s.L + static_cast<double>(j) * s.h());
        i = 2 * last - i;
    } else if (i < 0) {
        ghost += edge_factor(s.L, -s.L + static_cast<double>(j) * s.h());
        i = -i;
    }
    if (j > last) {
        ghost += edge_factor(s.L, -s.L + static_cast<double>(i) * s.h());
        j = 2 * last - j;
    } else if (j < 0) {
        ghost += edge_factor(s.L, -s.L + static_cast<double>(i) * s.h());
        j = -j;
    }
    return {s.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j)), ghost};
}

/// Precomputed 9-point neighbourhoods (offsets -1..1 in each direction).
struct LatticeStencils {
    std::vector<std::array<LatticeRef, 9>> refs;  ///< (di+1)*3 + (dj+1)
};

inline LatticeStencils lattice_stencils(const GraphState2D& s) {
    LatticeStencils st;
    const std::size_t side = s.side();
    st.refs.resize(side * side);
    for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j)
            for (int di = -1; di <= 1; ++di)
                for (int dj = -1; dj <= 1; ++dj)
                    st.refs[s.index(i, j)][static_cast<std::size_t>((di + 1) * 3 + dj + 1)] =
                        resolve(s, static_cast<long>(i) + di, static_cast<long>(j) + dj);
    return st;
}

struct LatticeOperator {
    std::vector<double> f;
    std::vector<std::array<double, 9>> jac;  ///< df_k / d(value at stencil slot)
};

/// Discrete speed at every node; false if N <= 0 somewhere.
inline bool evaluate_2d(const GraphState2D& s, const LatticeStencils& st, std::span<const double> u, double alpha,
                        LatticeOperator& op, bool with_jacobian) {
    const std::size_t K = u.size();
    const double h = s.h();
    const double gh = 2.0 * h * alpha;
    op.f.assign(K, 0.0);
    if (with_jacobian) op.jac.assign(K, {});
    for (std::size_t k = 0; k < K; ++k) {
        const auto& R = st.refs[k];
        double v[9];
        for (int a = 0; a < 9; ++a) v[a] = u[R[a].idx] + gh * R[a].ghost;
        // slots: 0 (-1,-1) 1 (-1,0) 2 (-1,1) 3 (0,-1) 4 (0,0) 5 (0,1) 6 (1,-1) 7 (1,0) 8 (1,1)
        const double p1 = (v[7] - v[1]) / (2 * h);
        const double p2 = (v[5] - v[3]) / (2 * h);
        const double s11 = (v[7] - 2 * v[4] + v[1]) / (h * h);
        const double s22 = (v[5] - 2 * v[4] + v[3]) / (h * h);
        const double s12 = (v[8] - v[6] - v[2] + v[0]) / (4 * h * h);
        const double W2 = 1.0 + p1 * p1 + p2 * p2;
        const double N = (1 + p2 * p2) * s11 - 2 * p1 * p2 * s12 + (1 + p1 * p1) * s22;
        if (!(N > 0.0) || !std::isfinite(N)) return false;
        const double W4 = W2 * W2;
        op.f[k] = -W4 / N;
        if (!with_jacobian) continue;
        const double N2 = N * N;
        const double dfdp1 = -(4 * p1 * W2 * N - W4 * (-2 * p2 * s12 + 2 * p1 * s22)) / N2;
        const double dfdp2 = -(4 * p2 * W2 * N - W4 * (2 * p2 * s11 - 2 * p1 * s12)) / N2;
        const double dfds11 = W4 * (1 + p2 * p2) / N2;
        const double dfds22 = W4 * (1 + p1 * p1) / N2;
        const double dfds12 = -2 * p1 * p2 * W4 / N2;
        auto& J = op.jac[k];
        const double i2h = 1.0 / (2 * h), ih2 = 1.0 / (h * h), i4h2 = 1.0 / (4 * h * h);
        J[7] += dfdp1 * i2h + dfds11 * ih2;
        J[1] += -dfdp1 * i2h + dfds11 * ih2;
        J[5] += dfdp2 * i2h + dfds22 * ih2;
        J[3] += -dfdp2 * i2h + dfds22 * ih2;
        J[4] += -2 * dfds11 * ih2 - 2 * dfds22 * ih2;
        J[8] += dfds12 * i4h2;
        J[0] += dfds12 * i4h2;
        J[6] += -dfds12 * i4h2;
        J[2] += -dfds12 * i4h2;
    }
    return true;
}

inline std::vector<double> stage_solve_2d(const GraphState2D& s, const LatticeStencils& st,
                                          const std::vector<double>& base, double c, double alpha,
                                          std::vector<std::vector<double>> candidates, const SolverConfig& cfg,
                                          double linear_tol, double t_stage) {
    const std::size_t K = base.size();
    const double tol = cfg.newton_tol * (1.0 + max_abs(base));
    LatticeOperator op;
    std::vector<double> G(K), trialG(K);
    auto residual = [&](const std::vector<double>& y, std::vector<double>& out) -> std::optional<double> {
        if (!evaluate_2d(s, st, y, alpha, op, false)) return std::nullopt;
        for (std::size_t k = 0; k < K; ++k) out[k] = y[k] - base[k] - c * op.f[k];
        const double nrm = max_abs(out);
        if (!std::isfinite(nrm)) return std::nullopt;
        return nrm;
    };
    std::vector<double> y;
    std::optional<double> norm;
    for (auto& cand : candidates) {
        norm = residual(cand, G);
        if (norm) {
            y = std::move(cand);
            break;
        }
    }
    if (!norm) throw NewtonDiverged(std::numeric_limits<double>::infinity(), 0, t_stage);

    Eigen::SparseMatrix<double, Eigen::RowMajor> A(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K));
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(10 * K);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(K));
    std::vector<double> trial(K);
    for (int it = 0; it < cfg.newton_max_iter; ++it) {
        if (*norm <= tol) return y;
        evaluate_2d(s, st, y, alpha, op, true);
        trip.clear();
        for (std::size_t k = 0; k < K; ++k) {
            trip.emplace_back(k, k, 1.0);
            for (int a = 0; a < 9; ++a)
                if (op.jac[k][a] != 0.0) trip.emplace_back(k, st.refs[k][a].idx, -c * op.jac[k][a]);
            rhs[static_cast<Eigen::Index>(k)] = -G[k];
        }
        A.setFromTriplets(trip.begin(), trip.end());
        Eigen::BiCGSTAB<Eigen::SparseMatrix<double, Eigen::RowMajor>, Eigen::IncompleteLUT<double>> solver;
        solver.preconditioner().setDroptol(1e-6);
        solver.setTolerance(linear_tol);
        solver.setMaxIterations(1000);
        solver.compute(A);
        if (solver.info() != Eigen::Success) throw NewtonDiverged(*norm, it + 1, t_stage);
        const Eigen::VectorXd delta = solver.solve(rhs);
        if (!delta.allFinite()) throw NewtonDiverged(*norm, it + 1, t_stage);

        double theta = 1.0;
        bool accepted = false;
        for (int halving = 0; halving <= 20; ++halving) {
            for (std::size_t k = 0; k < K; ++k) trial[k] = y[k] + theta * delta[static_cast<Eigen::Index>(k)];
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
            if (*norm <= 100.0 * tol) return y;
            throw NewtonDiverged(*norm, it + 1, t_stage);
        }
    }
    if (*norm <= tol) return y;
    throw NewtonDiverged(*norm, cfg.newton_max_iter, t_stage);
}

}  // namespace detail

/// Discrete speed u_t on the lattice with the ghost-node boundary data for slope alpha.
inline std::vector<double> lattice_speed(const GraphState2D& s, double alpha) {
    detail::LatticeOperator op;
    if (!detail::evaluate_2d(s, detail::lattice_stencils(s), s.u, alpha, op, false))
        throw CurvatureFloor(0, 0.0, s.t);
    return op.f;
}

inline double flat_sup_2d(const GraphState2D& s) {
    const auto f = compute_fields_2d(s);
    double sup = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k)
        if (f.radius(k) <= 0.5 * s.L * (1 + 1e-12)) sup = std::max(sup, std::hypot(f.du[k][0], f.du[k][1]));
    return sup;
}

/// Validated start: node-wise sandwich in |x|, H > 0 everywhere, c0 = min H u > 0.
inline Sim2D init_2d(const std::vector<double>& u0, const ConeFamily& cone, double L, std::size_t m,
                     const SolverConfig& config) {
    validate(cone);
    config.validate();
    if (m < 4) throw DomainError("Cartesian lattice needs m >= 4");
    if (!(L > 0.0)) throw DomainError("lattice half-width must be positive");
    Sim2D sim;
    sim.state.L = L;
    sim.state.m = m;
    if (u0.size() != sim.state.side() * sim.state.side()) throw DomainError("initial datum size does not match the lattice");
    sim.state.u = u0;
    sim.cone = cone;
    sim.config = config;

    const double tol = 1e-12 * (1.0 + cone.alpha0 * L * std::sqrt(2.0) + cone.kappa);
    std::size_t worst = 0;
    double worst_mag = 0.0;
    for (std::size_t i = 0; i < sim.state.side(); ++i)
        for (std::size_t j = 0; j < sim.state.side(); ++j) {
            const std::size_t k = sim.state.index(i, j);
            const double viol =
                sandwich_violation(cone, 0.0, std::hypot(sim.state.coord(i), sim.state.coord(j)), u0[k]);
            if (viol > worst_mag) {
                worst_mag = viol;
                worst = k;
            }
        }
    if (worst_mag > tol) throw SandwichViolation(worst, worst_mag);

    const auto f = compute_fields_2d(sim.state);
    sim.c0 = std::numeric_limits<double>::infinity();
    sim.C0 = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (!(f.H[k] > 0.0)) throw MeanConvexityViolation(k, f.H[k]);
        sim.c0 = std::min(sim.c0, f.H[k] * f.u[k]);
        sim.C0 = std::max(sim.C0, f.H[k] * f.u[k]);
    }
    if (!(sim.c0 > 0.0)) throw MeanConvexityViolation(0, f.H[0]);
    sim.history.push_back(diagnostics_row(f, cone, L, sim.diag));
    sim.flat_track.push_back({0.0, flat_sup_2d(sim.state)});
    return sim;
}

/// Advance in place by dt; untouched on failure.
inline void advance_2d(Sim2D& sim, double dt) {
    if (!(dt > 0.0)) throw DomainError("time step must be positive");
    const GraphState2D& s = sim.state;
    const auto st = detail::lattice_stencils(s);
    const double t0 = s.t;
    const SolverConfig& cfg = sim.config;
    auto alpha = [&](double t) { return slope_or_zero(sim.cone, std::min(t, cone_lifetime(sim.cone))); };
    const auto& u = s.u;

    detail::LatticeOperator op;
    if (!detail::evaluate_2d(s, st, u, alpha(t0), op, false)) throw CurvatureFloor(0, 0.0, t0);
    auto predictor = [&](double c) {
        std::vector<double> y = u;
        for (std::size_t k = 0; k < y.size(); ++k) y[k] += c * op.f[k];
        return y;
    };

    std::vector<double> next;
    if (cfg.scheme == TimeScheme::BackwardEuler) {
        next = detail::stage_solve_2d(s, st, u, dt, alpha(t0 + dt), {predictor(dt), u}, cfg, sim.linear_tol, t0 + dt);
    } else {
        const double gam = kSdirkGamma;
        const auto y1 = detail::stage_solve_2d(s, st, u, gam * dt, alpha(t0 + gam * dt), {predictor(gam * dt), u}, cfg,
                                               sim.linear_tol, t0 + gam * dt);
        std::vector<double> base(u.size()), guess(u.size());
        const double w = (1.0 - gam) / gam;
        for (std::size_t k = 0; k < u.size(); ++k) {
            base[k] = u[k] + w * (y1[k] - u[k]);
            guess[k] = u[k] + (y1[k] - u[k]) / gam;
        }
        next = detail::stage_solve_2d(s, st, base, gam * dt, alpha(t0 + dt), {std::move(guess), y1, base}, cfg,
                                      sim.linear_tol, t0 + dt);
    }

    GraphState2D trial = s;
    trial.u = std::move(next);
    trial.t = t0 + dt;
    const auto f = compute_fields_2d(trial);
    for (std::size_t k = 0; k < f.size(); ++k)
        if (!(f.H[k] > cfg.H_min)) throw CurvatureFloor(k, f.H[k], trial.t);

    double descent = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < u.size(); ++k) descent = std::max(descent, trial.u[k] - u[k]);
    sim.state = std::move(trial);
    ++sim.steps;
    sim.flat_track.push_back({sim.t(), flat_sup_2d(sim.state)});
    if (sim.steps % cfg.sample_every == 0) {
        auto row = diagnostics_row(f, sim.cone, sim.state.L, sim.diag);
        row.max_descent = descent;
        sim.history.push_back(row);
    } else if (!sim.history.empty()) {
        sim.history.back().max_descent = std::max(sim.history.back().max_descent, descent);
    }
}

inline Sim2D step_2d(Sim2D sim) {
    advance_2d(sim, sim.config.dt);
    return sim;
}

struct Run2DResult {
    Sim2D sim;
    DiagnosticsReport report;
};

/// March to t_end with the same stopping rules and step control as run_until.
inline Run2DResult run_2d(Sim2D sim, double t_end, const std::function<void(const Sim2D&)>& on_sample = {}) {
    sim.stop = StopReason::None;
    const double life = cone_lifetime(sim.cone);
    double observed = std::numeric_limits<double>::quiet_NaN();
    auto observe = [&] {
        if (on_sample && sim.t() != observed) {
            on_sample(sim);
            observed = sim.t();
        }
    };
    observe();
    while (true) {
        if (sim.flat_track.back()[1] < sim.config.flat_eps) {
            sim.stop = StopReason::Flattened;
            break;
        }
        if (sim.t() >= t_end * (1.0 - 1e-14)) {
            sim.stop = StopReason::ReachedEnd;
            break;
        }
        double dt = std::min(sim.config.dt, t_end - sim.t());
        if (sim.t() + dt >= life * (1.0 - 1e-12)) dt = 0.5 * (life - sim.t());
        if (!(dt > 1e-14 * std::max(1.0, sim.t()))) {
            sim.stop = StopReason::CurvatureFloor;
            break;
        }
        bool ok = false;
        for (int k = 0; k <= kMaxStepHalvings && !ok; ++k, dt *= 0.5) {
            try {
                advance_2d(sim, dt);
                ok = true;
            } catch (const CurvatureFloor&) {
            } catch (const NewtonDiverged&) {
                if (k == kMaxStepHalvings) throw;
            }
        }
        if (!ok) {
            sim.stop = StopReason::CurvatureFloor;
            break;
        }
        if (sim.steps % sim.config.sample_every == 0) observe();
    }
    observe();
    if (sim.history.empty() || sim.history.back().t != sim.t()) {
        const double descent = sim.history.empty() ? 0.0 : sim.history.back().max_descent;
        auto row = diagnostics_row(compute_fields_2d(sim.state), sim.cone, sim.state.L, sim.diag);
        row.max_descent = descent;
        sim.history.push_back(row);
    }
    DiagnosticsReport report;
    report.rows = sim.history;
    return {std::move(sim), std::move(report)};
}

/// Largest spread max u - min u over lattice rings |x| in [rho - h/2, rho + h/2).
inline double azimuthal_variation(const GraphState2D& s, double rho) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    const double h = s.h();
    for (std::size_t i = 0; i < s.side(); ++i)
        for (std::size_t j = 0; j < s.side(); ++j) {
            const double r = std::hypot(s.coord(i), s.coord(j));
            if (r >= rho - 0.5 * h && r < rho + 0.5 * h) {
                lo = std::min(lo, s.at(i, j));
                hi = std::max(hi, s.at(i, j));
            }
        }
    return hi >= lo ? hi - lo : 0.0;
}

/// Radial hyperboloid sqrt(alpha0^2 |x|^2 + k^2) on the lattice.
inline GraphState2D hyperboloid_lattice(double L, std::size_t m, double alpha0, double k) {
    return GraphState2D::sample(L, m, [&](double x1, double x2) {
        return std::sqrt(alpha0 * alpha0 * (x1 * x1 + x2 * x2) + k * k);
    });
}

/// Non-radial datum sqrt(alpha0^2 |x|^2 + k^2 + e (x1^2 - x2^2) / (1 + |x|^2)).
/// The perturbation is bounded by e and its slope decays like |x|^-3, so the
/// datum is compatible with the cone-slope edge data; needs e < k^2.
inline GraphState2D anisotropic_lattice(double L, std::size_t m, double alpha0, double k, double e) {
    if (!(std::abs(e) < k * k)) throw DomainError("anisotropy e must satisfy |e| < k^2");
    return GraphState2D::sample(L, m, [&](double x1, double x2) {
        const double r2 = x1 * x1 + x2 * x2;
        return std::sqrt(alpha0 * alpha0 * r2 + k * k + e * (x1 * x1 - x2 * x2) / (1.0 + r2));
    });
}

}  // namespace imcf
