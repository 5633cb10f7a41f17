#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace imcf {

/// Finite-difference weights for derivatives 0..max_order at x0 on arbitrary
/// nodes (Fornberg's recursion). Result is indexed [order][node].
inline std::vector<std::vector<double>> fd_weights(double x0, std::span<const double> nodes, int max_order) {
    const std::size_t N = nodes.size();
    if (N == 0 || max_order < 0 || static_cast<std::size_t>(max_order) >= N)
        throw std::invalid_argument("fd_weights: need more nodes than the derivative order");
    const auto M = static_cast<std::size_t>(max_order);
    std::vector<std::vector<double>> c(M + 1, std::vector<double>(N, 0.0));
    double c1 = 1.0;
    double c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < N; ++i) {
        const std::size_t mn = std::min(i, M);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[i] - x0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (std::size_t k = mn; k >= 1; --k)
                    c[k][i] = c1 * (static_cast<double>(k) * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (std::size_t k = mn; k >= 1; --k)
                c[k][j] = (c4 * c[k][j] - static_cast<double>(k) * c[k - 1][j]) / c3;
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

/// Three-point first and second derivative weights at the middle node of
/// (x0 - hm, x0, x0 + hp). Exact for quadratics.
struct ThreePoint {
    double d1[3];
    double d2[3];
};

inline ThreePoint three_point(double hm, double hp) {
    ThreePoint w{};
    const double s = hm + hp;
    w.d1[0] = -hp / (hm * s);
    w.d1[1] = (hp - hm) / (hm * hp);
    w.d1[2] = hm / (hp * s);
    w.d2[0] = 2.0 / (hm * s);
    w.d2[1] = -2.0 / (hm * hp);
    w.d2[2] = 2.0 / (hp * s);
    return w;
}

}  // namespace imcf
