#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "imcf/errors.hpp"

namespace imcf {

/// Radial nodes 0 = r_0 < r_1 < ... < r_M = R for a graph over R^n.
class RadialGrid {
public:
    RadialGrid() = default;

    RadialGrid(std::vector<double> nodes, int n) : nodes_(std::move(nodes)), n_(n) { check(); }

    static RadialGrid uniform(double R, std::size_t cells, int n) {
        if (cells < 3) throw DomainError("radial grid needs at least 3 cells");
        std::vector<double> r(cells + 1);
        for (std::size_t i = 0; i <= cells; ++i) r[i] = R * static_cast<double>(i) / static_cast<double>(cells);
        r.back() = R;
        return RadialGrid(std::move(r), n);
    }

    /// r(xi) = R sinh(b xi)/sinh(b) on a uniform xi lattice: fine near the
    /// axis, coarse at R. b = 0 gives the uniform grid. The map is smooth, so
    /// dyadic refinement of `cells` keeps stencils second order.
    static RadialGrid stretched(double R, std::size_t cells, int n, double b) {
        if (b <= 0.0) return uniform(R, cells, n);
        if (cells < 3) throw DomainError("radial grid needs at least 3 cells");
        std::vector<double> r(cells + 1);
        const double sb = std::sinh(b);
        for (std::size_t i = 0; i <= cells; ++i)
            r[i] = R * std::sinh(b * static_cast<double>(i) / static_cast<double>(cells)) / sb;
        r.front() = 0.0;
        r.back() = R;
        RadialGrid g(std::move(r), n);
        if (g.max_adjacent_ratio() > 1.05)
            throw DomainError("stretching parameter too strong for the cell count (adjacent spacing ratio " +
                              std::to_string(g.max_adjacent_ratio()) + " > 1.05)");
        return g;
    }

    const std::vector<double>& nodes() const { return nodes_; }
    double operator[](std::size_t i) const { return nodes_[i]; }
    std::size_t size() const { return nodes_.size(); }
    std::size_t cells() const { return nodes_.size() - 1; }
    double R() const { return nodes_.back(); }
    int n() const { return n_; }
    double spacing(std::size_t i) const { return nodes_[i + 1] - nodes_[i]; }

    double max_spacing() const {
        double h = 0.0;
        for (std::size_t i = 0; i + 1 < size(); ++i) h = std::max(h, spacing(i));
        return h;
    }

    double max_adjacent_ratio() const {
        double q = 1.0;
        for (std::size_t i = 1; i + 1 < size(); ++i) {
            const double a = spacing(i - 1), b = spacing(i);
            q = std::max(q, std::max(a / b, b / a));
        }
        return q;
    }

    /// Index of the last node with r <= x (clamped to the grid).
    std::size_t locate(double x) const {
        auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
        if (it == nodes_.begin()) return 0;
        return std::min<std::size_t>(static_cast<std::size_t>(it - nodes_.begin()) - 1, size() - 2);
    }

    /// Linear interpolation of nodal values at radius x.
    double interpolate(const std::vector<double>& values, double x) const {
        const std::size_t i = locate(x);
        const double w = (x - nodes_[i]) / spacing(i);
        return (1.0 - w) * values[i] + w * values[i + 1];
    }

    std::vector<double> sample(const std::function<double(double)>& f) const {
        std::vector<double> v(size());
        for (std::size_t i = 0; i < size(); ++i) v[i] = f(nodes_[i]);
        return v;
    }

    friend bool operator==(const RadialGrid&, const RadialGrid&) = default;

private:
    void check() const {
        if (n_ < 2) throw DomainError("radial grid dimension must be >= 2");
        if (nodes_.size() < 4) throw DomainError("radial grid needs at least 4 nodes");
        if (nodes_.front() != 0.0) throw DomainError("radial grid must start at r = 0");
        for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
            if (!(nodes_[i + 1] > nodes_[i])) throw DomainError("radial grid nodes must be strictly increasing");
        if (max_adjacent_ratio() > 10.0) throw DomainError("adjacent radial spacings differ by more than 10x");
    }

    std::vector<double> nodes_;
    int n_ = 2;
};

struct RadialProfile {
    RadialGrid grid;
    std::vector<double> u;
    double t = 0.0;
};

/// Height field on the (2m+1)x(2m+1) lattice of [-L,L]^2 (n = 2).
struct GraphState2D {
    double L = 1.0;
    std::size_t m = 4;
    std::vector<double> u;
    double t = 0.0;

    std::size_t side() const { return 2 * m + 1; }
    double h() const { return L / static_cast<double>(m); }
    std::size_t index(std::size_t i, std::size_t j) const { return i * side() + j; }
    double coord(std::size_t i) const { return -L + static_cast<double>(i) * h(); }
    double at(std::size_t i, std::size_t j) const { return u[index(i, j)]; }

    static GraphState2D sample(double L, std::size_t m, const std::function<double(double, double)>& f) {
        if (m < 4) throw DomainError("Cartesian lattice needs m >= 4");
        if (!(L > 0.0)) throw DomainError("lattice half-width must be positive");
        GraphState2D s;
        s.L = L;
        s.m = m;
        s.u.resize(s.side() * s.side());
        for (std::size_t i = 0; i < s.side(); ++i)
            for (std::size_t j = 0; j < s.side(); ++j) s.u[s.index(i, j)] = f(s.coord(i), s.coord(j));
        return s;
    }
};

}  // namespace imcf
