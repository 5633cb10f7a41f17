#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "imcf/exact_solutions.hpp"
#include "imcf/geometry.hpp"

namespace imcf {

/// Stable identifiers of the checked laws. Names never change between versions.
enum class LawId { HABOVE, HLOC, STAR, VASYMP, VLOWER, COMPARE, SANDWICH, PLANE, DESCENT };

inline constexpr std::array<LawId, 9> kAllLaws = {LawId::HABOVE,  LawId::HLOC,     LawId::STAR,
                                                  LawId::VASYMP,  LawId::VLOWER,   LawId::COMPARE,
                                                  LawId::SANDWICH, LawId::PLANE,   LawId::DESCENT};

inline constexpr std::string_view law_name(LawId id) {
    switch (id) {
        case LawId::HABOVE: return "HABOVE";
        case LawId::HLOC: return "HLOC";
        case LawId::STAR: return "STAR";
        case LawId::VASYMP: return "VASYMP";
        case LawId::VLOWER: return "VLOWER";
        case LawId::COMPARE: return "COMPARE";
        case LawId::SANDWICH: return "SANDWICH";
        case LawId::PLANE: return "PLANE";
        case LawId::DESCENT: return "DESCENT";
    }
    return "?";
}

inline std::optional<LawId> law_from_name(std::string_view s) {
    for (LawId id : kAllLaws)
        if (law_name(id) == s) return id;
    return std::nullopt;
}

struct Violation {
    LawId law;
    double t;
    double magnitude;
};

/// One sampled instant of a trajectory.
struct DiagnosticsRow {
    double t = 0.0;
    double sup_Hu = 0.0;          ///< sup H*u
    double inf_v = 0.0;           ///< inf v
    double far_v = 0.0;           ///< v at the probe radius
    double gamma_t = 0.0;         ///< cone oracle gamma(t) (NaN past the lifetime)
    double alpha_meas = 0.0;      ///< measured slope at half the domain radius
    double min_star = 0.0;        ///< min H <F - x0, nu>
    double star_boundary = 0.0;   ///< H <F - x0, nu> on the far boundary
    double sandwich_viol = 0.0;   ///< max excursion outside alpha(t)|x| <= u <= alpha(t)|x| + kappa
    double flat_sup = 0.0;        ///< sup |Du| over |x| <= R/2
    double max_descent = 0.0;     ///< max (u(t) - u(t_prev)) since the previous row
};

struct DiagnosticsReport {
    std::vector<DiagnosticsRow> rows;
    std::vector<Violation> violations;

    bool passed() const { return violations.empty(); }

    bool passed(LawId id) const {
        return std::none_of(violations.begin(), violations.end(), [id](const Violation& v) { return v.law == id; });
    }

    double worst(LawId id) const {
        double w = 0.0;
        for (const auto& v : violations)
            if (v.law == id) w = std::max(w, v.magnitude);
        return w;
    }

    /// Time-ordered union of two reports over disjoint or overlapping slices.
    static DiagnosticsReport merge(const DiagnosticsReport& a, const DiagnosticsReport& b) {
        DiagnosticsReport out;
        out.rows = a.rows;
        out.rows.insert(out.rows.end(), b.rows.begin(), b.rows.end());
        std::stable_sort(out.rows.begin(), out.rows.end(),
                         [](const DiagnosticsRow& x, const DiagnosticsRow& y) { return x.t < y.t; });
        out.violations = a.violations;
        out.violations.insert(out.violations.end(), b.violations.begin(), b.violations.end());
        std::stable_sort(out.violations.begin(), out.violations.end(),
                         [](const Violation& x, const Violation& y) { return x.t < y.t; });
        return out;
    }
};

/// Sampling choices for diagnostics rows.
struct DiagnosticsSettings {
    double probe_fraction = 0.6;  ///< far_v probe radius as a fraction of the domain radius
    double star_center = 1.0;     ///< x0 = (0, star_center), above the graph, for the support function
};

/// gamma(t) if t lies in the cone lifetime, NaN otherwise.
inline double gamma_or_nan(const ConeFamily& cone, double t) {
    if (t < 0.0 || t > cone_lifetime(cone)) return std::numeric_limits<double>::quiet_NaN();
    return cone_gamma_beta(cone, t).gamma;
}

inline double slope_or_zero(const ConeFamily& cone, double t) {
    return t >= cone_lifetime(cone) ? 0.0 : cone_slope(cone, t);
}

/// Largest excursion of u outside the cone sandwich at time t (0 if inside).
inline double sandwich_violation(const ConeFamily& cone, double t, double radius, double u) {
    const double a = slope_or_zero(cone, t);
    return std::max({0.0, a * radius - u, u - a * radius - cone.kappa});
}

/// Build a diagnostics row from geometry fields. `domain_radius` is R for radial
/// grids and L (inscribed disk) for lattices; lattice nodes outside it are skipped.
inline DiagnosticsRow diagnostics_row(const GeometryFields& f, const ConeFamily& cone, double domain_radius,
                                      const DiagnosticsSettings& settings) {
    DiagnosticsRow row;
    row.t = f.t;
    row.gamma_t = gamma_or_nan(cone, f.t);
    row.sup_Hu = -std::numeric_limits<double>::infinity();
    row.inf_v = std::numeric_limits<double>::infinity();
    row.min_star = std::numeric_limits<double>::infinity();
    const double probe = settings.probe_fraction * domain_radius;
    const double half = 0.5 * domain_radius;

    if (f.dim == 1) {
        std::vector<double> r(f.size()), v(f.size()), ur(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
            r[i] = f.x[i][0];
            v[i] = f.v[i];
            ur[i] = f.du[i][0];
        }
        auto interp = [&](const std::vector<double>& y, double x) {
            auto it = std::upper_bound(r.begin(), r.end(), x);
            std::size_t k = it == r.begin() ? 0 : static_cast<std::size_t>(it - r.begin()) - 1;
            k = std::min(k, r.size() - 2);
            const double w = (x - r[k]) / (r[k + 1] - r[k]);
            return (1 - w) * y[k] + w * y[k + 1];
        };
        row.far_v = interp(v, probe);
        row.alpha_meas = interp(ur, half);
        row.star_boundary = f.H.back() * f.support(f.size() - 1, settings.star_center);
    } else {
        double sum_v = 0, sum_a = 0, sum_b = 0;
        int cnt_v = 0, cnt_a = 0, cnt_b = 0;
        const double ring = 1.0001 * std::abs(f.x[1][1] - f.x[0][1]);
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double rr = f.radius(i);
            if (std::abs(rr - probe) < ring) {
                sum_v += f.v[i];
                ++cnt_v;
            }
            if (rr > 0 && std::abs(rr - half) < ring) {
                sum_a += (f.x[i][0] * f.du[i][0] + f.x[i][1] * f.du[i][1]) / rr;
                ++cnt_a;
            }
            if (std::abs(rr - domain_radius) < ring) {
                sum_b += f.H[i] * f.support(i, settings.star_center);
                ++cnt_b;
            }
        }
        row.far_v = cnt_v ? sum_v / cnt_v : std::numeric_limits<double>::quiet_NaN();
        row.alpha_meas = cnt_a ? sum_a / cnt_a : std::numeric_limits<double>::quiet_NaN();
        row.star_boundary = cnt_b ? sum_b / cnt_b : std::numeric_limits<double>::quiet_NaN();
    }

    for (std::size_t i = 0; i < f.size(); ++i) {
        const double rr = f.radius(i);
        if (rr > domain_radius * (1 + 1e-12)) continue;
        row.sup_Hu = std::max(row.sup_Hu, f.H[i] * f.u[i]);
        row.inf_v = std::min(row.inf_v, f.v[i]);
        row.min_star = std::min(row.min_star, f.H[i] * f.support(i, settings.star_center));
        row.sandwich_viol = std::max(row.sandwich_viol, sandwich_violation(cone, f.t, rr, f.u[i]));
        if (rr <= half * (1 + 1e-12))
            row.flat_sup = std::max(row.flat_sup, std::hypot(f.du[i][0], f.du[i][1]));
    }
    return row;
}

}  // namespace imcf
