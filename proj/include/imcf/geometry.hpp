#pragma once

/**
 * @file geometry.hpp
 * @brief Discrete differential geometry of graphs x_{n+1} = u(x).
 *
 * Orientation: nu = (Du, -1)/W with W = sqrt(1 + |Du|^2), so convex graphs
 * opening upward have H >= 0 and <omega,nu> = -1/W < 0 (omega = e_{n+1}).
 *
 *   H        = (1/W) (delta_ij - u_i u_j / W^2) u_ij
 *   <F,nu>   = (x.Du - u)/W
 *   <F^,nu>  = u/W                 (F^ = <F,omega> omega)
 *   v        = <F^,nu> H
 *   h_ij     = u_ij / W
 *
 * Radial profiles reduce to H = u_rr/W^3 + (n-1) u_r/(r W); at r = 0 the
 * symmetric extension u(-r) = u(r) gives u_r = 0 and u_r/r -> u_rr.
 */

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "imcf/errors.hpp"
#include "imcf/grid.hpp"
#include "imcf/stencil.hpp"

namespace imcf {

struct GeometryFields {
    int dim = 1;  ///< 1 for radial profiles, 2 for Cartesian lattices
    int n = 2;
    double t = 0.0;
    std::vector<std::array<double, 2>> x;     ///< (r, 0) or (x1, x2)
    std::vector<double> u;
    std::vector<std::array<double, 2>> du;    ///< (u_r, 0) or (u_1, u_2)
    std::vector<std::array<double, 3>> hess;  ///< radial: (u_rr, 0, u_r/r); Cartesian: (u_11, u_12, u_22)
    std::vector<std::array<double, 3>> secondff;
    std::vector<double> W;
    std::vector<double> H;
    std::vector<double> omega_nu;
    std::vector<double> F_nu;
    std::vector<double> Fhat_nu;
    std::vector<double> v;

    std::size_t size() const { return u.size(); }

    double radius(std::size_t i) const { return std::hypot(x[i][0], x[i][1]); }

    /// Support function <F - x0, nu> for a centre x0 = (0, z0) on the graph axis.
    double support(std::size_t i, double z0) const { return F_nu[i] + z0 / W[i]; }

    void resize(std::size_t N) {
        x.resize(N);
        u.resize(N);
        du.resize(N);
        hess.resize(N);
        secondff.resize(N);
        W.resize(N);
        H.resize(N);
        omega_nu.resize(N);
        F_nu.resize(N);
        Fhat_nu.resize(N);
        v.resize(N);
    }
};

namespace detail {

inline void finish_node(GeometryFields& f, std::size_t i, double xdu, double curvature_numerator) {
    const double p2 = f.du[i][0] * f.du[i][0] + f.du[i][1] * f.du[i][1];
    const double W = std::sqrt(1.0 + p2);
    f.W[i] = W;
    f.H[i] = curvature_numerator / (W * W * W);
    f.omega_nu[i] = -1.0 / W;
    f.F_nu[i] = (xdu - f.u[i]) / W;
    f.Fhat_nu[i] = f.u[i] / W;
    f.v[i] = f.Fhat_nu[i] * f.H[i];
    for (int k = 0; k < 3; ++k) f.secondff[i][k] = f.hess[i][k] / W;
}

}  // namespace detail

inline GeometryFields compute_fields_radial(const RadialProfile& p) {
    const RadialGrid& g = p.grid;
    const std::size_t N = g.size();
    if (N < 4) throw DomainError("radial profile needs at least 4 nodes");
    if (p.u.size() != N) throw DomainError("radial profile size does not match its grid");
    const int n = g.n();

    GeometryFields f;
    f.dim = 1;
    f.n = n;
    f.t = p.t;
    f.resize(N);
    const auto& r = g.nodes();
    const auto& u = p.u;

    for (std::size_t i = 0; i < N; ++i) {
        f.x[i] = {r[i], 0.0};
        f.u[i] = u[i];
        double ur = 0.0, urr = 0.0, tang = 0.0;
        if (i == 0) {
            urr = 2.0 * (u[1] - u[0]) / (r[1] * r[1]);
            tang = urr;
        } else if (i + 1 < N) {
            const ThreePoint w = three_point(r[i] - r[i - 1], r[i + 1] - r[i]);
            ur = w.d1[0] * u[i - 1] + w.d1[1] * u[i] + w.d1[2] * u[i + 1];
            urr = w.d2[0] * u[i - 1] + w.d2[1] * u[i] + w.d2[2] * u[i + 1];
            tang = ur / r[i];
        } else {
            const double s1[3] = {r[N - 3], r[N - 2], r[N - 1]};
            const double s2[4] = {r[N - 4], r[N - 3], r[N - 2], r[N - 1]};
            const auto w1 = fd_weights(r[i], s1, 1);
            const auto w2 = fd_weights(r[i], s2, 2);
            for (std::size_t k = 0; k < 3; ++k) ur += w1[1][k] * u[N - 3 + k];
            for (std::size_t k = 0; k < 4; ++k) urr += w2[2][k] * u[N - 4 + k];
            tang = ur / r[i];
        }
        f.du[i] = {ur, 0.0};
        f.hess[i] = {urr, 0.0, tang};
        const double W2 = 1.0 + ur * ur;
        // W^3 H = u_rr + (n-1) W^2 u_r / r
        detail::finish_node(f, i, r[i] * ur, urr + (n - 1) * W2 * tang);
    }
    return f;
}

namespace detail {

/// Second-order derivative stencils along one lattice axis with spacing h:
/// centred in the interior, one-sided (3 points for d1, 4 for d2) at the ends.
struct AxisStencil {
    int offset1[4];
    double w1[4];
    int count1;
    int offset2[4];
    double w2[4];
    int count2;
};

inline AxisStencil axis_stencil(std::size_t i, std::size_t last, double h) {
    AxisStencil s{};
    if (i > 0 && i < last) {
        s.count1 = 2;
        s.offset1[0] = -1; s.w1[0] = -0.5 / h;
        s.offset1[1] = 1;  s.w1[1] = 0.5 / h;
        s.count2 = 3;
        s.offset2[0] = -1; s.w2[0] = 1.0 / (h * h);
        s.offset2[1] = 0;  s.w2[1] = -2.0 / (h * h);
        s.offset2[2] = 1;  s.w2[2] = 1.0 / (h * h);
        return s;
    }
    const int dir = (i == 0) ? 1 : -1;
    s.count1 = 3;
    const double d1[3] = {-1.5, 2.0, -0.5};
    for (int k = 0; k < 3; ++k) {
        s.offset1[k] = dir * k;
        s.w1[k] = dir * d1[k] / h;
    }
    s.count2 = 4;
    const double d2[4] = {2.0, -5.0, 4.0, -1.0};
    for (int k = 0; k < 4; ++k) {
        s.offset2[k] = dir * k;
        s.w2[k] = d2[k] / (h * h);
    }
    return s;
}

}  // namespace detail

inline GeometryFields compute_fields_2d(const GraphState2D& s) {
    if (s.m < 4) throw DomainError("Cartesian lattice needs m >= 4");
    const std::size_t side = s.side();
    if (s.u.size() != side * side) throw DomainError("lattice state size does not match (2m+1)^2");
    const double h = s.h();
    const std::size_t last = side - 1;

    GeometryFields f;
    f.dim = 2;
    f.n = 2;
    f.t = s.t;
    f.resize(side * side);

    for (std::size_t i = 0; i < side; ++i) {
        const auto si = detail::axis_stencil(i, last, h);
        for (std::size_t j = 0; j < side; ++j) {
            const auto sj = detail::axis_stencil(j, last, h);
            const std::size_t k = s.index(i, j);
            auto U = [&](int di, int dj) {
                return s.at(static_cast<std::size_t>(static_cast<long>(i) + di),
                            static_cast<std::size_t>(static_cast<long>(j) + dj));
            };
            double p1 = 0, p2 = 0, s11 = 0, s22 = 0, s12 = 0;
            for (int a = 0; a < si.count1; ++a) p1 += si.w1[a] * U(si.offset1[a], 0);
            for (int b = 0; b < sj.count1; ++b) p2 += sj.w1[b] * U(0, sj.offset1[b]);
            for (int a = 0; a < si.count2; ++a) s11 += si.w2[a] * U(si.offset2[a], 0);
            for (int b = 0; b < sj.count2; ++b) s22 += sj.w2[b] * U(0, sj.offset2[b]);
            for (int a = 0; a < si.count1; ++a)
                for (int b = 0; b < sj.count1; ++b) s12 += si.w1[a] * sj.w1[b] * U(si.offset1[a], sj.offset1[b]);

            const double x1 = s.coord(i), x2 = s.coord(j);
            f.x[k] = {x1, x2};
            f.u[k] = s.u[k];
            f.du[k] = {p1, p2};
            f.hess[k] = {s11, s12, s22};
            const double num = (1.0 + p2 * p2) * s11 - 2.0 * p1 * p2 * s12 + (1.0 + p1 * p1) * s22;
            detail::finish_node(f, k, x1 * p1 + x2 * p2, num);
        }
    }
    return f;
}

/// Graph speed u_t = -W/H at every node.
inline std::vector<double> flow_speed(const GeometryFields& f, double H_min = 0.0) {
    std::vector<double> ut(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!(f.H[i] > H_min)) throw CurvatureFloor(i, f.H[i], f.t);
        ut[i] = -f.W[i] / f.H[i];
    }
    return ut;
}

/// Smallest eigenvalue of the (symmetric 2x2 or diagonal radial) Hessian at node i.
inline double min_hessian_eigenvalue(const GeometryFields& f, std::size_t i) {
    const auto& h = f.hess[i];
    if (f.dim == 1) return std::min(h[0], h[2]);
    const double tr = h[0] + h[2];
    const double det = h[0] * h[2] - h[1] * h[1];
    const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    return 0.5 * tr - disc;
}

}  // namespace imcf
