#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "imcf/exact_solutions.hpp"

using namespace imcf;

namespace {
// Frozen reference values, evaluated once with 30-digit mpmath from the closed forms.
constexpr double kSqrtEMinus1 = 1.31083249443208617590677036113;
constexpr double kAlphaHalf = 0.805432350169850172283123285767;  // sqrt(e^0.5 - 1)
constexpr double kGammaAt02 = 0.254087651179364841087573523581;  // 1 - e^0.4 / 2
constexpr double kLn2 = 0.693147180559945309417232121458;
constexpr double kInvSqrt2 = 0.707106781186547524400844362105;
}  // namespace

TEST(ConeLifetime, UnitLifetimeInThreeDimensions) {
    EXPECT_NEAR(cone_lifetime({3, kSqrtEMinus1, 0.0}), 1.0, 1e-14);
}

TEST(ConeLifetime, LnTwoForSlopeRootThree) {
    EXPECT_NEAR(cone_lifetime({2, std::sqrt(3.0), 0.0}), kLn2, 1e-14);
}

TEST(ConeLifetime, VanishesForFlatCone) {
    EXPECT_LT(cone_lifetime({2, 1e-9, 0.0}), 1e-17);
}

TEST(ConeLifetime, GammaFormAgrees) {
    for (int n : {2, 3, 5})
        for (double a0 : {0.3, 1.0, 4.0}) {
            const ConeFamily c{n, a0, 0.2};
            const double g0 = cone_gamma_beta(c, 0.0).gamma;
            EXPECT_NEAR(cone_lifetime_from_gamma(n, g0), cone_lifetime(c), 1e-12);
        }
}

TEST(ConeLifetime, MonotoneInSlopeAndIndependentOfOffset) {
    double prev = 0.0;
    for (double a0 = 0.1; a0 < 5.0; a0 += 0.1) {
        const double T = cone_lifetime({3, a0, 0.0});
        EXPECT_GT(T, prev);
        EXPECT_EQ(T, cone_lifetime({3, a0, 7.5}));
        prev = T;
    }
}

TEST(ConeLifetime, RejectsBadParameters) {
    EXPECT_THROW(cone_lifetime({2, 0.0, 0.0}), DomainError);
    EXPECT_THROW(cone_lifetime({2, -1.0, 0.0}), DomainError);
    EXPECT_THROW(cone_lifetime({1, 1.0, 0.0}), DomainError);
    EXPECT_THROW(cone_lifetime({2, 1.0, -0.1}), DomainError);
}

TEST(ConeSlope, EndpointsAndReferenceValue) {
    const ConeFamily c{3, kSqrtEMinus1, 0.0};
    EXPECT_DOUBLE_EQ(cone_slope(c, 0.0), kSqrtEMinus1);
    EXPECT_EQ(cone_slope(c, cone_lifetime(c)), 0.0);
    EXPECT_NEAR(cone_slope(c, 0.5), kAlphaHalf, 1e-14);
}

TEST(ConeSlope, StrictlyDecreasing) {
    const ConeFamily c{2, 2.0, 0.0};
    const double T = cone_lifetime(c);
    double prev = cone_slope(c, 0.0);
    for (int k = 1; k <= 100; ++k) {
        const double a = cone_slope(c, T * k / 100.0);
        EXPECT_LT(a, prev);
        prev = a;
    }
}

TEST(ConeSlope, OutsideLifetimeIsDomainError) {
    const ConeFamily c{2, 1.0, 0.0};
    EXPECT_THROW(cone_slope(c, -1e-3), DomainError);
    EXPECT_THROW(cone_slope(c, cone_lifetime(c) * 1.01), DomainError);
    EXPECT_THROW(cone_gamma_beta(c, cone_lifetime(c) * 1.01), DomainError);
}

TEST(ConeGammaBeta, InitialValues) {
    const auto gb = cone_gamma_beta({2, 1.0, 0.0}, 0.0);
    EXPECT_NEAR(gb.gamma, 0.5, 1e-15);
    EXPECT_NEAR(gb.beta, 0.5, 1e-15);
}

TEST(ConeGammaBeta, FlatLimit) {
    const ConeFamily c{2, 1.0, 0.0};
    const auto gb = cone_gamma_beta(c, cone_lifetime(c));
    EXPECT_NEAR(gb.gamma, 0.0, 1e-14);
    EXPECT_NEAR(gb.beta, 1.0, 1e-14);
}

TEST(ConeGammaBeta, ReferenceValueAtTwoTenths) {
    EXPECT_NEAR(cone_gamma_beta({2, 1.0, 0.0}, 0.2).gamma, kGammaAt02, 1e-14);
}

TEST(ConeGammaBeta, AlgebraicIdentities) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const ConeFamily c{2 + static_cast<int>(3 * U(rng)), 0.2 + 4.8 * U(rng), 0.0};
        const double t = U(rng) * cone_lifetime(c);
        const double a = cone_slope(c, t);
        const auto gb = cone_gamma_beta(c, t);
        EXPECT_NEAR(gb.beta * (1.0 + a * a), 1.0, 1e-12);
        EXPECT_NEAR(gb.gamma, (c.n - 1) * a * a / (1.0 + a * a), 1e-12);
    }
}

TEST(SlopeOde, MatchesClosedForm) {
    const ConeFamily c{2, 1.0, 0.0};
    const auto res = integrate_slope_ode(c, 0.3, 1e-3);
    EXPECT_FALSE(res.crossing_time.has_value());
    EXPECT_NEAR(res.alpha, cone_slope(c, 0.3), 1e-10);
    EXPECT_EQ(integrate_slope_ode(c, 0.0, 0.1).alpha, 1.0);
}

TEST(SlopeOde, CrossingTimeIsHalfLnTwo) {
    EXPECT_NEAR(slope_crossing_time({2, 1.0, 0.0}, 1e-3), 0.5 * kLn2, 1e-8);
}

TEST(SlopeOde, FourthOrderConvergence) {
    const ConeFamily c{3, 1.5, 0.0};
    const double T = cone_lifetime(c);
    auto max_err = [&](double dt) {
        double e = 0.0;
        for (int k = 1; k <= 20; ++k) {
            const double t = 0.99 * T * k / 20.0;
            e = std::max(e, std::abs(integrate_slope_ode(c, t, dt).alpha - cone_slope(c, t)));
        }
        return e;
    };
    const double e1 = max_err(0.04), e2 = max_err(0.02);
    EXPECT_GE(std::log2(e1 / e2), 3.8);
}

TEST(GammaBetaOde, MatchesClosedForm) {
    const ConeFamily c{2, 1.0, 0.0};
    const auto num = integrate_gamma_beta_ode(c, 0.2, 1e-3);
    const auto ref = cone_gamma_beta(c, 0.2);
    EXPECT_NEAR(num.gamma, ref.gamma, 1e-12);
    EXPECT_NEAR(num.beta, ref.beta, 1e-12);
}

TEST(ConeMeanCurvature, ReferenceAndScaling) {
    const ConeFamily c{2, 1.0, 0.0};
    EXPECT_NEAR(cone_mean_curvature(c, 1.0, 0.0), kInvSqrt2, 1e-15);
    for (double s : {0.5, 3.0, 10.0})
        EXPECT_NEAR(cone_mean_curvature(c, 2.0 * s, 0.1), cone_mean_curvature(c, 2.0, 0.1) / s, 1e-14);
    EXPECT_LT(cone_mean_curvature(c, 1e12, 0.0), 1e-12);
    EXPECT_EQ(cone_mean_curvature(c, 1.0, cone_lifetime(c)), 0.0);
    EXPECT_THROW(cone_mean_curvature(c, 0.0, 0.0), DomainError);
}

TEST(ExpandingSphere, RadiusLaw) {
    const ExpandingSphere s{{0.0, 0.0, 0.0}, 1.0, 2};
    EXPECT_EQ(sphere_radius(s, 0.0), 1.0);
    EXPECT_NEAR(sphere_radius(s, 2.0 * kLn2), 2.0, 1e-14);
    // rho' = rho / n by RK4
    auto f = [](double, double r) { return r / 2.0; };
    double r = 1.0;
    const int steps = 1000;
    for (int k = 0; k < steps; ++k) r = rk4_step(f, 0.0, r, 1.0 / steps);
    EXPECT_NEAR(r, sphere_radius(s, 1.0), 1e-10);
}

TEST(ConeBallTangent, CentreAndTangency) {
    const double beta = 1.0, kt = 0.0, rho = 1.0;
    const auto ball = cone_ball_tangent(beta, kt, rho, 2);
    const double zc = ball.center.back();
    EXPECT_NEAR(zc, std::sqrt(2.0), 1e-15);
    EXPECT_GE(height_above_cone(beta, kt, 0.0, zc), rho);

    // lowest boundary point above the cone, minimised over the boundary angle by golden section
    auto gap = [&](double th) {
        const double x = rho * std::sin(th), z = zc - rho * std::cos(th);
        return height_above_cone(beta, kt, x, z);
    };
    double a = 0.0, b = std::numbers::pi;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int k = 0; k < 200; ++k) {
        const double c1 = b - phi * (b - a), c2 = a + phi * (b - a);
        if (gap(c1) < gap(c2)) b = c2;
        else a = c1;
    }
    const double th = 0.5 * (a + b);
    EXPECT_NEAR(gap(th), 0.0, 1e-12);
    EXPECT_NEAR(rho * std::sin(th), cone_ball_tangency_radius(beta, rho), 1e-7);
    EXPECT_NEAR(cone_ball_tangency_radius(beta, rho), kInvSqrt2, 1e-15);
}

TEST(ConeBallTangent, SampledBoundaryStaysAboveCone) {
    const double beta = 0.7, kt = 0.3, rho = 2.0;
    const auto ball = cone_ball_tangent(beta, kt, rho, 3);
    const double zc = ball.center.back();
    for (int k = 0; k < 1000; ++k) {
        const double th = std::numbers::pi * k / 999.0;
        EXPECT_GE(height_above_cone(beta, kt, std::abs(rho * std::sin(th)), zc - rho * std::cos(th)), -1e-12);
    }
}
