#pragma once

/**
 * @file exact_solutions.hpp
 * @brief Closed-form solutions of inverse mean curvature flow for entire graphs.
 *
 * Cone family  zeta(r,t) = alpha(t) r + kappa  over R^n:
 *
 *   alpha' = -(alpha + 1/alpha)/(n-1)
 *   beta   = 1/(1+alpha^2),      beta'  = 2 beta/(n-1)
 *   gamma  = (n-1)(1-beta),      gamma' = 2 (gamma/(n-1) - 1)
 *   T      = (n-1)/2 ln(1+alpha0^2)        (alpha(T) = 0, the cone is flat)
 *
 * Expanding spheres  rho(t) = rho0 exp(t/n)  (H = n/rho, normal speed 1/H).
 *
 * Everything here is a pure function of immutable values and serves as the
 * oracle layer for the solvers.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "imcf/errors.hpp"

namespace imcf {

struct ConeFamily {
    int n = 2;            ///< hypersurface dimension, >= 2
    double alpha0 = 1.0;  ///< initial slope, > 0
    double kappa = 0.0;   ///< vertical offset, >= 0
};

struct GammaBeta {
    double gamma;
    double beta;
};

inline void validate(const ConeFamily& c) {
    if (c.n < 2) throw DomainError("cone dimension n must be >= 2, got " + std::to_string(c.n));
    if (!(c.alpha0 > 0.0) || !std::isfinite(c.alpha0))
        throw DomainError("cone slope alpha0 must be positive, got " + std::to_string(c.alpha0));
    if (!(c.kappa >= 0.0) || !std::isfinite(c.kappa))
        throw DomainError("cone offset kappa must be >= 0, got " + std::to_string(c.kappa));
}

inline double cone_lifetime(const ConeFamily& c) {
    validate(c);
    return 0.5 * (c.n - 1) * std::log1p(c.alpha0 * c.alpha0);
}

/// Lifetime written through gamma0 instead of alpha0; equal to cone_lifetime.
inline double cone_lifetime_from_gamma(int n, double gamma0) {
    if (n < 2) throw DomainError("cone dimension n must be >= 2");
    const double m = n - 1;
    if (!(gamma0 > 0.0 && gamma0 < m)) throw DomainError("gamma0 must lie in (0, n-1)");
    return 0.5 * m * std::log(m / (m - gamma0));
}

namespace detail {
inline void check_time(const ConeFamily& c, double t) {
    const double T = cone_lifetime(c);
    // a few ulps of slack so that t = T computed along another route is accepted
    if (!(t >= 0.0) || t > T * (1.0 + 8 * std::numeric_limits<double>::epsilon()))
        throw DomainError("time " + std::to_string(t) + " outside the cone lifetime [0, " + std::to_string(T) + "]");
}
}  // namespace detail

inline double cone_slope(const ConeFamily& c, double t) {
    detail::check_time(c, t);
    const double a2 = (1.0 + c.alpha0 * c.alpha0) * std::exp(-2.0 * t / (c.n - 1)) - 1.0;
    return a2 > 0.0 ? std::sqrt(a2) : 0.0;
}

inline GammaBeta cone_gamma_beta(const ConeFamily& c, double t) {
    detail::check_time(c, t);
    const double m = c.n - 1;
    const double beta0 = 1.0 / (1.0 + c.alpha0 * c.alpha0);
    const double gamma0 = m * (1.0 - beta0);
    const double grow = std::exp(2.0 * t / m);
    double beta = beta0 * grow;
    double gamma = m * (1.0 - (1.0 - gamma0 / m) * grow);
    // clamp the roundoff at t = T
    if (beta > 1.0) beta = 1.0;
    if (gamma < 0.0) gamma = 0.0;
    return {gamma, beta};
}

inline double cone_height(const ConeFamily& c, double r, double t) { return cone_slope(c, t) * r + c.kappa; }

/// H = (n-1) alpha / (r sqrt(1+alpha^2)); zero once the cone is flat.
inline double cone_mean_curvature(const ConeFamily& c, double r, double t) {
    if (!(r > 0.0)) throw DomainError("cone mean curvature is undefined at the vertex r = 0");
    const double a = cone_slope(c, t);
    return (c.n - 1) * a / (r * std::sqrt(1.0 + a * a));
}

// ---------------------------------------------------------------------------
// Fixed-step classical RK4, templated on the state (double or std::array).

// Arithmetic on small fixed-size states used by the RK4 helper.
template <std::size_t N>
std::array<double, N> operator+(const std::array<double, N>& a, const std::array<double, N>& b) {
    std::array<double, N> r{};
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + b[i];
    return r;
}
template <std::size_t N>
std::array<double, N> operator*(double s, const std::array<double, N>& a) {
    std::array<double, N> r{};
    for (std::size_t i = 0; i < N; ++i) r[i] = s * a[i];
    return r;
}

template <class State, class Rhs>
State rk4_step(const Rhs& f, double t, const State& y, double h) {
    const State k1 = f(t, y);
    const State k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    const State k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    const State k4 = f(t + h, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct SlopeIntegration {
    double t;                              ///< time reached
    double alpha;                          ///< numerical slope at t
    std::optional<double> crossing_time;   ///< set when the slope hit zero before the target time
};

namespace detail {

inline double slope_rhs(int n, double a) { return -(a + 1.0 / a) / (n - 1); }

/// One RK4 step of the slope ODE; nullopt if any stage leaves alpha > floor.
inline std::optional<double> slope_step(int n, double a, double h, double floor) {
    auto f = [n](double, double y) { return slope_rhs(n, y); };
    const double k1 = f(0, a);
    const double y2 = a + 0.5 * h * k1;
    if (!(y2 > floor)) return std::nullopt;
    const double k2 = f(0, y2);
    const double y3 = a + 0.5 * h * k2;
    if (!(y3 > floor)) return std::nullopt;
    const double k3 = f(0, y3);
    const double y4 = a + h * k3;
    if (!(y4 > floor)) return std::nullopt;
    const double k4 = f(0, y4);
    const double next = a + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!(next > floor)) return std::nullopt;
    return next;
}

}  // namespace detail

/// Stop threshold for the slope ODE; alpha' ~ -1/alpha blows up below it.
inline constexpr double kSlopeFloor = 1e-8;

/**
 * RK4 integration of alpha' = -(alpha + 1/alpha)/(n-1) from alpha0 to time t.
 *
 * The step is dt (alpha / alpha0)^2, capped at dt: it follows the local time
 * scale (n-1) alpha^2 near extinction and still refines uniformly with dt,
 * which keeps the fourth-order error structure intact. When the slope
 * would drop below kSlopeFloor the integration stops and the crossing time is
 * located by bisection on the size of the last step.
 */
inline SlopeIntegration integrate_slope_ode(const ConeFamily& c, double t, double dt) {
    validate(c);
    if (!(dt > 0.0)) throw DomainError("slope integration step must be positive");
    if (!(t >= 0.0)) throw DomainError("slope integration target time must be >= 0");
    const int n = c.n;
    double a = c.alpha0;
    double s = 0.0;
    const double a0sq = c.alpha0 * c.alpha0;
    while (s < t) {
        double h = std::min({dt, t - s, dt * a * a / a0sq});
        if (s + h > t) h = t - s;
        if (s + h == s) return {s, a, s};  // remaining lifetime is below time resolution
        if (auto next = detail::slope_step(n, a, h, kSlopeFloor)) {
            a = *next;
            s = (t - s <= h) ? t : s + h;
            continue;
        }
        // bracket [0, h]: a step of size lo survives, hi does not
        double lo = 0.0, hi = h;
        for (int i = 0; i < 200 && hi - lo > 1e-3 * std::numeric_limits<double>::epsilon() * (s + hi); ++i) {
            const double mid = 0.5 * (lo + hi);
            if (detail::slope_step(n, a, mid, kSlopeFloor)) lo = mid;
            else hi = mid;
        }
        return {s + lo, kSlopeFloor, s + 0.5 * (lo + hi)};
    }
    return {t, a, std::nullopt};
}

/// Time at which the integrated slope reaches zero (to the floor).
inline double slope_crossing_time(const ConeFamily& c, double dt) {
    const double T = cone_lifetime(c);
    const auto res = integrate_slope_ode(c, 2.0 * T + 1.0, dt);
    if (!res.crossing_time) throw NumericalError("slope ODE did not reach zero");
    return *res.crossing_time;
}

/// RK4 on beta' = 2 beta/(n-1), gamma' = 2(gamma/(n-1) - 1) with fixed step.
inline GammaBeta integrate_gamma_beta_ode(const ConeFamily& c, double t, double dt) {
    validate(c);
    if (!(dt > 0.0)) throw DomainError("integration step must be positive");
    const double m = c.n - 1;
    using S = std::array<double, 2>;
    auto f = [m](double, const S& y) { return S{2.0 * (y[0] / m - 1.0), 2.0 * y[1] / m}; };
    const double beta0 = 1.0 / (1.0 + c.alpha0 * c.alpha0);
    S y{m * (1.0 - beta0), beta0};
    double s = 0.0;
    while (s < t) {
        const double h = std::min(dt, t - s);
        y = rk4_step(f, s, y, h);
        s = (t - s <= dt) ? t : s + h;
    }
    return {y[0], y[1]};
}

// ---------------------------------------------------------------------------
// Expanding spheres and the ball-complement picture of a cone.

struct ExpandingSphere {
    std::vector<double> center;  ///< point in R^{n+1}, last coordinate is the graph axis
    double rho0 = 1.0;
    int n = 2;
};

inline double sphere_radius(const ExpandingSphere& s, double t) {
    if (!(s.rho0 > 0.0)) throw DomainError("sphere radius must be positive");
    if (s.n < 1) throw DomainError("sphere dimension must be positive");
    if (!(t >= 0.0)) throw DomainError("sphere time must be >= 0");
    return s.rho0 * std::exp(t / s.n);
}

/// Ball of radius rho centred on the graph axis at height rho*sqrt(1+beta^2) + kappa_tilde,
/// tangent from above to the cone x_{n+1} = beta|x| + kappa_tilde.
inline ExpandingSphere cone_ball_tangent(double beta, double kappa_tilde, double rho, int n = 2) {
    if (!(beta > 0.0)) throw DomainError("cone slope must be positive");
    if (!(rho > 0.0)) throw DomainError("ball radius must be positive");
    ExpandingSphere s;
    s.n = n;
    s.rho0 = rho;
    s.center.assign(static_cast<std::size_t>(n) + 1, 0.0);
    s.center.back() = rho * std::sqrt(1.0 + beta * beta) + kappa_tilde;
    return s;
}

/// |x| of the tangency circle between the ball and the cone.
inline double cone_ball_tangency_radius(double beta, double rho) { return rho * beta / std::sqrt(1.0 + beta * beta); }

/// Signed height of a point above the cone x_{n+1} = beta|x| + kappa_tilde.
inline double height_above_cone(double beta, double kappa_tilde, double radius, double height) {
    return height - (beta * radius + kappa_tilde);
}

}  // namespace imcf
