#pragma once

/**
 * @file diagnostics.hpp
 * @brief Checkers for the quantitative laws of the flow, evaluated on
 * trajectory data (diagnostics rows or full states).
 *
 * Every checker is a pure function: same input, same report. Violations carry
 * a law id from the fixed registry in report.hpp.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "imcf/errors.hpp"
#include "imcf/exact_solutions.hpp"
#include "imcf/geometry.hpp"
#include "imcf/radial_solver.hpp"
#include "imcf/report.hpp"

namespace imcf {

// ---------------------------------------------------------------------------
// HABOVE: sup H*u never exceeds its initial value

/// Flags rows whose sup H*u exceeds the initial sup by more than tol_rel
/// (relative), and rows that increase on their predecessor by more than the
/// same slack.
inline std::vector<Violation> check_global_H_bound(const std::vector<DiagnosticsRow>& rows, double tol_rel = 1e-4) {
    std::vector<Violation> out;
    if (rows.empty()) return out;
    const double sup0 = rows.front().sup_Hu;
    const double slack = tol_rel * std::abs(sup0);
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const double over_initial = rows[k].sup_Hu - sup0;
        const double over_previous = rows[k].sup_Hu - rows[k - 1].sup_Hu;
        const double excess = std::max(over_initial, over_previous);
        if (excess > slack) out.push_back({LawId::HABOVE, rows[k].t, excess / std::abs(sup0)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// HLOC: localized curvature bound

/// sup over nodes of eta*H with eta = (r^2 - |F - xbar0|^2)_+^2, where xbar0 =
/// (0, z0) sits on the graph axis.
inline double local_H_quantity(const GeometryFields& f, double z0, double r) {
    double best = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double rho = f.radius(i);
        const double dz = f.u[i] - z0;
        const double eta = std::max(0.0, r * r - rho * rho - dz * dz);
        best = std::max(best, eta * eta * f.H[i]);
    }
    return best;
}

/// Checks sup eta*H <= max(C0_loc, 2 n r^3). Requires r > 1.
inline std::optional<Violation> check_local_H_bound(const GeometryFields& f, double z0, double r, double C0_loc) {
    if (!(r > 1.0)) throw DomainError("local curvature bound needs r > 1");
    const double bound = std::max(C0_loc, 2.0 * f.n * r * r * r);
    const double q = local_H_quantity(f, z0, r);
    if (q > bound) return Violation{LawId::HLOC, f.t, q - bound};
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// STAR: delta-starshapedness is preserved

struct StarshapedResult {
    double initial_min = 0.0;
    /// Maximum-principle form: min_t >= min(delta, every earlier boundary value) - tol.
    bool passed = true;
    /// Literal form: min_t >= delta - tol at every time.
    bool literal_passed = true;
    double worst_literal_deficit = 0.0;
    std::vector<Violation> violations;
};

/**
 * On a truncated domain the quantity H <F - x0, nu> is also fed in through the
 * far boundary, where it decays with the cone slope. The interior minimum can
 * only fall to the smallest boundary value seen so far, which is what the
 * main check enforces. The literal fixed-delta check is reported alongside.
 * Throws DomainError if the initial state is not delta-starshaped.
 */
inline StarshapedResult check_starshaped(const std::vector<DiagnosticsRow>& rows, double delta, double tol = 1e-6) {
    StarshapedResult res;
    if (rows.empty()) return res;
    res.initial_min = rows.front().min_star;
    if (!(res.initial_min >= delta))
        throw DomainError("initial state is not delta-starshaped for the chosen centre (min H<F-x0,nu> = " +
                          std::to_string(res.initial_min) + ")");
    double floor = delta;
    for (const auto& row : rows) {
        floor = std::min(floor, row.star_boundary);
        if (row.min_star < floor - tol) {
            res.passed = false;
            res.violations.push_back({LawId::STAR, row.t, floor - row.min_star});
        }
        if (row.min_star < delta - tol) {
            res.literal_passed = false;
            res.worst_literal_deficit = std::max(res.worst_literal_deficit, delta - row.min_star);
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// VASYMP: v tends to gamma(t) at spatial infinity

/// |v(r_p, t) - gamma(t)| <= 0.05 gamma(t) + 0.5 / r_p for t in [0.1T, 0.8T].
inline std::vector<Violation> check_asymptotic_v(const std::vector<DiagnosticsRow>& rows, const ConeFamily& cone,
                                                 double probe_radius) {
    std::vector<Violation> out;
    const double T = cone_lifetime(cone);
    for (const auto& row : rows) {
        if (row.t < 0.1 * T || row.t > 0.8 * T) continue;
        const double g = cone_gamma_beta(cone, row.t).gamma;
        const double err = std::abs(row.far_v - g);
        const double bound = 0.05 * g + 0.5 / probe_radius;
        if (!(err <= bound)) out.push_back({LawId::VASYMP, row.t, err - bound});
    }
    return out;
}

// ---------------------------------------------------------------------------
// VLOWER: v stays bounded below until shortly before extinction

struct LowerBoundResult {
    double c = 0.0;      ///< measured inf v over the admissible window
    double floor = 0.0;  ///< 0.5 * min(inf_0 v, gamma(T - 3 delta))
    double t_limit = 0.0;
    std::size_t rows_used = 0;
    bool passed = true;
    std::vector<Violation> violations;
};

/// Restricted to t <= T - 3 delta; rows beyond that are never evaluated.
inline LowerBoundResult check_lower_bound_v(const std::vector<DiagnosticsRow>& rows, const ConeFamily& cone,
                                            double delta) {
    LowerBoundResult res;
    const double T = cone_lifetime(cone);
    if (!(delta > 0.0) || !(3.0 * delta < T)) throw DomainError("need 0 < 3 delta < T for the lower bound on v");
    res.t_limit = T - 3.0 * delta;
    res.c = std::numeric_limits<double>::infinity();
    if (rows.empty()) return res;
    res.floor = 0.5 * std::min(rows.front().inf_v, cone_gamma_beta(cone, res.t_limit).gamma);
    for (const auto& row : rows) {
        if (row.t > res.t_limit) continue;
        ++res.rows_used;
        res.c = std::min(res.c, row.inf_v);
        if (!(row.inf_v >= res.floor)) res.violations.push_back({LawId::VLOWER, row.t, res.floor - row.inf_v});
    }
    res.passed = res.violations.empty() && res.c > 0.0;
    return res;
}

// ---------------------------------------------------------------------------
// SANDWICH and DESCENT, re-verified from rows

/// Largest sandwich excursion over the rows with t <= 0.9 T.
inline double max_sandwich_violation(const std::vector<DiagnosticsRow>& rows, const ConeFamily& cone) {
    const double t_max = 0.9 * cone_lifetime(cone);
    double worst = 0.0;
    for (const auto& row : rows)
        if (row.t <= t_max) worst = std::max(worst, row.sandwich_viol);
    return worst;
}

/// Sandwich excursions above tol, checked through t = 0.9 T.
inline std::vector<Violation> check_sandwich(const std::vector<DiagnosticsRow>& rows, const ConeFamily& cone,
                                             double tol) {
    std::vector<Violation> out;
    const double t_max = 0.9 * cone_lifetime(cone);
    for (const auto& row : rows)
        if (row.t <= t_max && row.sandwich_viol > tol) out.push_back({LawId::SANDWICH, row.t, row.sandwich_viol});
    return out;
}

inline std::vector<Violation> check_descent(const std::vector<DiagnosticsRow>& rows, double tol) {
    std::vector<Violation> out;
    for (const auto& row : rows)
        if (row.max_descent > tol) out.push_back({LawId::DESCENT, row.t, row.max_descent});
    return out;
}

// ---------------------------------------------------------------------------
// COMPARE: ordered data stay ordered

struct ComparisonResult {
    double worst = -std::numeric_limits<double>::infinity();  ///< max over times and nodes of u_A - u_B
    bool gap_nonincreasing = true;  ///< observed only; max (u_B - u_A) never grew
    std::size_t samples = 0;
    std::vector<Violation> violations;
    bool passed() const { return violations.empty(); }
};

/// Node-wise u_A <= u_B + tol at every sampled pair of states.
inline ComparisonResult compare_states(const std::vector<RadialProfile>& a, const std::vector<RadialProfile>& b,
                                       double tol = 1e-8) {
    if (a.size() != b.size()) throw DomainError("comparison needs the same number of samples");
    ComparisonResult res;
    double prev_gap = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < a.size(); ++s) {
        if (!(a[s].grid == b[s].grid)) throw DomainError("comparison needs identical grids");
        double worst = -std::numeric_limits<double>::infinity();
        double gap = 0.0;
        for (std::size_t i = 0; i < a[s].u.size(); ++i) {
            worst = std::max(worst, a[s].u[i] - b[s].u[i]);
            gap = std::max(gap, b[s].u[i] - a[s].u[i]);
        }
        res.worst = std::max(res.worst, worst);
        if (worst > tol) res.violations.push_back({LawId::COMPARE, a[s].t, worst});
        if (gap > prev_gap * (1.0 + 1e-12) + 1e-14) res.gap_nonincreasing = false;
        prev_gap = gap;
        ++res.samples;
    }
    return res;
}

/// Evolves both simulations in lockstep to t_end and compares after every step.
inline ComparisonResult comparison_test(RadialSim a, RadialSim b, double t_end, double tol = 1e-8) {
    if (!(a.grid() == b.grid())) throw DomainError("comparison needs identical grids");
    if (a.config.bc != b.config.bc || a.cone.n != b.cone.n || a.cone.alpha0 != b.cone.alpha0 ||
        a.cone.kappa != b.cone.kappa)
        throw DomainError("comparison needs the same boundary family");
    std::vector<RadialProfile> pa{a.profile}, pb{b.profile};
    while (a.t() < t_end * (1.0 - 1e-14)) {
        const double dt = next_step_size(a, t_end);
        advance(a, dt);
        advance(b, dt);
        pa.push_back(a.profile);
        pb.push_back(b.profile);
    }
    return compare_states(pa, pb, tol);
}

// ---------------------------------------------------------------------------
// PLANE: convergence to a horizontal plane of height in [0, kappa]

struct PlaneResult {
    double h_literal = 0.0;   ///< mean of u over r <= R/4 at the flattening time
    double h_measured = 0.0;  ///< flat_eps -> 0 extrapolation when available, else h_literal
    double sup_deviation = 0.0;
    double deviation_bound = 0.0;
    bool passed = false;
};

/**
 * The mean height at the flattening time still contains the residual slope
 * (about flat_eps R/8), so the height of the limit plane is extrapolated
 * linearly from the two flattening thresholds of the extinction estimate.
 */
inline PlaneResult check_plane_convergence(const RadialSim& sim, double kappa,
                                           const std::optional<ExtinctionEstimate>& est = std::nullopt,
                                           double tol = 1e-3) {
    if (sim.stop != StopReason::Flattened) throw NotFlattened("plane convergence check needs a flattened run");
    PlaneResult res;
    const double quarter = 0.25 * sim.grid().R();
    res.h_literal = mean_height(sim.profile, quarter);
    res.h_measured = (est && est->extrapolated) ? est->h_extrapolated : res.h_literal;
    for (std::size_t i = 0; i < sim.grid().size() && sim.grid()[i] <= quarter; ++i)
        res.sup_deviation = std::max(res.sup_deviation, std::abs(sim.u()[i] - res.h_measured));
    res.deviation_bound = 2.0 * sim.config.flat_eps * quarter;
    res.passed = res.h_measured >= -tol && res.h_measured <= kappa + tol && res.sup_deviation <= res.deviation_bound;
    return res;
}

// ---------------------------------------------------------------------------
// Whole-trajectory verification from rows

struct VerifySettings {
    double habove_tol_rel = 1e-4;
    double sandwich_tol = 2e-3;
    double descent_tol = 1e-8;
    double star_delta = 0.0;  ///< <= 0: use half the initial minimum
    double vlower_delta_fraction = 0.1;
    double probe_radius = 0.0;
};

/// Runs every row-based checker and collects their violations.
inline DiagnosticsReport verify_rows(const std::vector<DiagnosticsRow>& rows, const ConeFamily& cone,
                                     const VerifySettings& s) {
    DiagnosticsReport rep;
    rep.rows = rows;
    if (rows.empty()) return rep;
    auto add = [&](const std::vector<Violation>& v) { rep.violations.insert(rep.violations.end(), v.begin(), v.end()); };
    add(check_global_H_bound(rows, s.habove_tol_rel));
    add(check_sandwich(rows, cone, s.sandwich_tol));
    add(check_descent(rows, s.descent_tol));
    if (s.probe_radius > 0.0) add(check_asymptotic_v(rows, cone, s.probe_radius));
    const double T = cone_lifetime(cone);
    add(check_lower_bound_v(rows, cone, s.vlower_delta_fraction * T).violations);
    const double delta = s.star_delta > 0.0 ? s.star_delta : 0.5 * rows.front().min_star;
    if (delta > 0.0) add(check_starshaped(rows, delta).violations);
    std::stable_sort(rep.violations.begin(), rep.violations.end(),
                     [](const Violation& a, const Violation& b) { return a.t < b.t; });
    return rep;
}

}  // namespace imcf
