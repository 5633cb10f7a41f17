#include <gtest/gtest.h>

#include <cmath>

#include "imcf/selfsimilar.hpp"

using namespace imcf;

TEST(Profile, SeriesStartAndShape) {
    const auto p = shoot_profile(1.0, -1.0, 3, 1e3);
    ASSERT_GT(p.samples.size(), 10u);
    EXPECT_EQ(p.samples.front().r, 0.0);
    EXPECT_EQ(p.samples.front().u, -1.0);
    EXPECT_NEAR(detail::series_u2(3, 1.0, -1.0), 1.0 / 3.0, 1e-15);
    const auto& s1 = p.samples[1];
    EXPECT_NEAR(s1.ur / s1.r, 1.0 / 3.0, 1e-6);  // u_r ~ u2 r near the axis

    for (std::size_t k = 1; k < p.samples.size(); ++k) {
        const auto& a = p.samples[k - 1];
        const auto& b = p.samples[k];
        EXPECT_GT(b.u, a.u);
        EXPECT_GE(b.ur, a.ur);  // convex
        EXPECT_GE(b.r * b.ur - b.u, 1.0 - 1e-9);  // the support function grows from |kappa|
    }
}

TEST(Profile, SolvesTheEllipticEquation) {
    ShootOptions tight;
    tight.rel_tol = 1e-12;
    tight.abs_tol = 1e-14;
    const auto p = shoot_profile(1.0, -1.0, 3, 1e4, tight);
    EXPECT_LE(elliptic_residual(p, {0.01, 0.1, 1.0, 10.0, 100.0, 1000.0}, tight, 1e-2), 1e-8);
}

TEST(Profile, HermiteInterpolationMatchesDenseOutput) {
    const auto p = shoot_profile(1.0, -1.0, 3, 100.0);
    const auto st = profile_states(p, {0.5, 3.0, 42.0});
    for (const auto& s : st) EXPECT_NEAR(p.u_at(s.r), s.u, 1e-6 * (1 + std::abs(s.u)));
    EXPECT_EQ(p.u_at(0.0), -1.0);
    EXPECT_THROW(p.u_at(200.0), DomainError);
}

TEST(FluxExponent, MatchesTargetForKnownCases) {
    for (auto [n, lambda] : {std::pair{3, 1.0}, std::pair{2, 2.0}}) {
        const auto p = shoot_profile(lambda, -1.0, n, 1e4);
        EXPECT_EQ(p.q_target, 2.0);
        EXPECT_NEAR(flux_exponent(p).q_est, 2.0, 0.01 * 2.0) << "n = " << n;
    }
}

TEST(FluxExponent, DecreasesWithLambda) {
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : {0.8333333333333334, 1.0, 1.125, 1.5}) {
        const auto p = shoot_profile(lambda, -1.0, 3, 1e4);
        const double q = flux_exponent(p).q_est;
        EXPECT_LT(q, prev);
        EXPECT_NEAR(q, flux_exponent_target(3, lambda), 1e-3);
        prev = q;
    }
}

TEST(FluxExponent, IndependentOfKappa) {
    const double q1 = flux_exponent(shoot_profile(1.0, -1.0, 3, 1e4)).q_est;
    const double q2 = flux_exponent(shoot_profile(1.0, -2.0, 3, 2e4)).q_est;
    EXPECT_NEAR(q1, q2, 0.02);
}

TEST(FluxExponent, SlowConvergenceIsReported) {
    // q = 1.2: the ratio still drifts by about 2% over the last decade at r_max = 1e4
    const auto p = shoot_profile(1.2 / 0.2, -1.0, 2, 1e4);
    EXPECT_THROW(flux_exponent(p), NotConverged);
}

TEST(FluxExponent, NearCriticalLambdaBlowsUpWithLargeRatio) {
    try {
        shoot_profile(1.001, -1.0, 2, 1e4);
        FAIL() << "expected BlowUp";
    } catch (const BlowUp& e) {
        EXPECT_GT(e.flux_ratio, 100.0);
        EXPECT_LT(e.r, 1e4);
    }
}

TEST(Profile, RejectsInvalidParameters) {
    EXPECT_THROW(shoot_profile(0.5, -1.0, 3, 10.0), DomainError);  // lambda <= 1/(n-1)
    EXPECT_THROW(shoot_profile(1.0, 0.0, 3, 10.0), DomainError);
    EXPECT_THROW(shoot_profile(1.0, 1.0, 3, 10.0), DomainError);
    EXPECT_THROW(shoot_profile(1.0, -1.0, 3, 0.0), DomainError);
    EXPECT_THROW(shoot_profile(1.0, -1.0, 1, 10.0), DomainError);
}

TEST(Roundtrip, ZeroDurationIsExact) {
    const auto p = shoot_profile(1.0, -1.0, 3, 60.0);
    const auto g = RadialGrid::stretched(50.0, 200, 3, 3.0);
    const auto rep = selfsimilar_roundtrip(p, g, 0.0, SolverConfig{});
    EXPECT_EQ(rep.discrepancy, 0.0);
    EXPECT_EQ(rep.steps, 0u);
    EXPECT_THROW(selfsimilar_roundtrip(p, g, -1.0, SolverConfig{}), DomainError);
    EXPECT_THROW(selfsimilar_roundtrip(p, RadialGrid::stretched(50.0, 200, 2, 3.0), 0.01, SolverConfig{}), DomainError);
}

TEST(Roundtrip, DiscrepancyContractsUnderRefinement) {
    const auto p = shoot_profile(1.0, -1.0, 3, 60.0);
    auto disc = [&](std::size_t cells, double dt) {
        SolverConfig cfg;
        cfg.dt = dt;
        cfg.scheme = TimeScheme::BackwardEuler;
        return selfsimilar_roundtrip(p, RadialGrid::stretched(50.0, cells, 3, 3.0), 0.01, cfg).discrepancy;
    };
    const double e1 = disc(500, 4e-3), e2 = disc(1000, 2e-3);
    EXPECT_LT(e1, 1e-2);
    EXPECT_GE(e1 / e2, 1.8);
}
