#include <gtest/gtest.h>

#include <cmath>

#include "imcf/radial_solver.hpp"

using namespace imcf;

namespace {

const ConeFamily kCone{2, 1.0, 0.1};

RadialGrid small_grid(std::size_t cells = 400, int n = 2) { return RadialGrid::stretched(100.0, cells, n, 6.0); }

}  // namespace

TEST(InitRadial, AcceptsHyperboloidAndMeasuresVertexCurvature) {
    auto err = [](std::size_t cells) {
        const auto g = RadialGrid::uniform(10.0, cells, 2);
        const auto sim = init_radial(hyperboloid_datum(g, 1.0, 0.1), kCone, g, SolverConfig{});
        const auto f = compute_fields_radial(sim.profile);
        EXPECT_GT(sim.c0, 0.0);
        EXPECT_GE(sim.C0, f.H[0] * f.u[0]);
        return std::abs(f.H[0] * f.u[0] - 2.0);  // n alpha0^2
    };
    const double e1 = err(1000), e2 = err(2000);
    EXPECT_LT(e1, 1e-2);
    EXPECT_GE(std::log2(e1 / e2), 1.9);
}

TEST(InitRadial, RejectsConeVertex) {
    const auto g = small_grid();
    const auto u = g.sample([](double r) { return r + 0.1; });
    EXPECT_THROW(init_radial(u, kCone, g, SolverConfig{}), MeanConvexityViolation);
}

TEST(InitRadial, RejectsDataAboveTheUpperCone) {
    const auto g = small_grid();
    const auto u = g.sample([](double r) { return r + 0.2; });
    try {
        init_radial(u, kCone, g, SolverConfig{});
        FAIL() << "expected SandwichViolation";
    } catch (const SandwichViolation& e) {
        EXPECT_NEAR(e.magnitude, 0.1, 1e-12);
    }
}

TEST(InitRadial, RejectsFlatData) {
    const auto g = small_grid();
    const std::vector<double> flat(g.size(), 0.1);
    EXPECT_THROW(init_radial(flat, kCone, g, SolverConfig{}), SandwichViolation);
    EXPECT_THROW(make_radial_sim({g, flat, 0.0}, kCone, SolverConfig{}), MeanConvexityViolation);
}

TEST(InitRadial, RejectsBadConfig) {
    const auto g = small_grid();
    SolverConfig cfg;
    cfg.dt = -1.0;
    EXPECT_THROW(init_radial(hyperboloid_datum(g, 1.0, 0.1), kCone, g, cfg), DomainError);
}

TEST(Step, MonotoneDescentAndSandwich) {
    const auto g = small_grid();
    auto sim = init_radial(hyperboloid_datum(g, 1.0, 0.1), kCone, g, SolverConfig{});
    for (int k = 0; k < 50; ++k) {
        const auto before = sim.u();
        advance(sim, sim.config.dt);
        for (std::size_t i = 0; i < g.size(); ++i) {
            EXPECT_LE(sim.u()[i] - before[i], sim.config.newton_tol);
            EXPECT_LE(sandwich_violation(kCone, sim.t(), g[i], sim.u()[i]), 2e-3);
        }
    }
    EXPECT_EQ(sim.steps, 50u);
    EXPECT_NEAR(sim.t(), 0.05, 1e-14);
}

TEST(Step, ValueSemanticsLeaveInputUntouched) {
    const auto g = small_grid();
    const auto sim0 = init_radial(hyperboloid_datum(g, 1.0, 0.1), kCone, g, SolverConfig{});
    const auto sim1 = step(sim0);
    EXPECT_EQ(sim0.t(), 0.0);
    EXPECT_GT(sim1.t(), 0.0);
    EXPECT_NE(sim0.u(), sim1.u());
}

namespace {
// one step of size dt against two of dt/2, at the same end time
double split_defect(TimeScheme scheme, double dt) {
    const auto g = small_grid();
    SolverConfig cfg;
    cfg.scheme = scheme;
    const auto sim0 = init_radial(hyperboloid_datum(g, 1.0, 0.1), kCone, g, cfg);
    auto a = sim0, b = sim0;
    advance(a, dt);
    advance(b, 0.5 * dt);
    advance(b, 0.5 * dt);
    double d = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) d = std::max(d, std::abs(a.u()[i] - b.u()[i]));
    return d;
}
}  // namespace

// The hyperboloid slope at R misses the Neumann data by about 5e-7, a
// dt-independent layer near 1e-7; the step sizes keep the local error dominant.
TEST(Step, SplitStepDefectShrinksLikeLocalError) {
    const double be1 = split_defect(TimeScheme::BackwardEuler, 8e-3), be2 = split_defect(TimeScheme::BackwardEuler, 4e-3);
    EXPECT_GE(std::log2(be1 / be2), 1.8);  // O(dt^2)
    const double sd1 = split_defect(TimeScheme::Sdirk2, 8e-3), sd2 = split_defect(TimeScheme::Sdirk2, 4e-3);
    EXPECT_GE(std::log2(sd1 / sd2), 2.5);  // O(dt^3)
    EXPECT_LT(sd1, be1);
}

TEST(Step, NewtonBudgetExhaustionIsReported) {
    const auto g = small_grid();
    SolverConfig cfg;
    cfg.newton_max_iter = 1;
    cfg.newton_tol = 1e-300;
    auto sim = init_radial(hyperboloid_datum(g, 1.0, 0.1), kCone, g, cfg);
    const auto before = sim.u();
    EXPECT_THROW(advance(sim, 0.05), NewtonDiverged);
    EXPECT_EQ(sim.u(), before);
    EXPECT_EQ(sim.t(), 0.0);
}

TEST(Step, CurvatureFloorGuard) {
    const auto g = small_grid();
    SolverConfig cfg;
    cfg.H_min = 1.0;  // above the far-field curvature, so the pre-step guard fires
    auto sim = init_radial(hyperboloid_datum(g, 1.0, 0.1), kCone, g, SolverConfig{});
    sim.config = cfg;
    EXPECT_THROW(advance(sim, 1e-3), CurvatureFloor);
}

TEST(RunUntil, ConeDatumTracksSlope) {
    const auto g = small_grid(800);
    auto sim = init_radial(smooth_cone_datum(g, 1.0, 0.1), kCone, g, SolverConfig{});
    const double T = cone_lifetime(kCone);
    const auto res = run_until(std::move(sim), 0.9 * T);
    EXPECT_EQ(res.sim.stop, StopReason::ReachedEnd);
    for (const auto& row : res.report.rows) {
        const double a = cone_slope(kCone, row.t);
        EXPECT_LE(std::abs(row.alpha_meas - a), 0.01 * a) << "t = " << row.t;
    }
}

TEST(RunUntil, ConeDatumStaysNearItsCone) {
    // far field of the rounded cone is alpha0 r + kappa/2; away from the vertex it moves with the cone family
    auto err = [](std::size_t cells) {
        const auto g = RadialGrid::stretched(100.0, cells, 2, 6.0);
        SolverConfig cfg;
        cfg.dt = 0.4 / cells;
        auto sim = init_radial(smooth_cone_datum(g, 1.0, 0.1), kCone, g, cfg);
        const double t_end = 0.1;
        const auto res = run_until(std::move(sim), t_end);
        double e = 0.0;
        const double a = cone_slope(kCone, res.sim.t());
        for (std::size_t i = 0; i < g.size(); ++i)
            if (g[i] >= 50.0) e = std::max(e, std::abs(res.sim.u()[i] - (a * g[i] + 0.05)));
        return e;
    };
    EXPECT_LT(err(400), 1e-3);
}

TEST(RunUntil, HyperboloidFlattensAndEstimatesLifetime) {
    const auto g = small_grid(500);
    SolverConfig cfg;
    cfg.dt = 4e-3;
    cfg.sample_every = 5;
    const auto res = run_until(init_radial(hyperboloid_datum(g, 1.0, 0.1), kCone, g, cfg),
                               std::numeric_limits<double>::infinity());
    EXPECT_EQ(res.sim.stop, StopReason::Flattened);
    const auto est = estimate_extinction(res.sim);
    const double T = cone_lifetime(kCone);
    EXPECT_LE(std::abs(est.T_est - T), 0.05 * T);
    EXPECT_TRUE(est.extrapolated);
    EXPECT_GT(est.t_eps_half, est.t_eps);
    EXPECT_GE(est.h_extrapolated, 0.0);
    EXPECT_LE(est.h_extrapolated, kCone.kappa);
}

TEST(RunUntil, ExtinctionNeedsAFlattenedRun) {
    const auto g = small_grid();
    const auto res = run_until(init_radial(hyperboloid_datum(g, 1.0, 0.1), kCone, g, SolverConfig{}), 0.01);
    EXPECT_EQ(res.sim.stop, StopReason::ReachedEnd);
    EXPECT_THROW(estimate_extinction(res.sim), NotFlattened);
}

TEST(RunUntil, SamplesEveryKthStepAndTheFinalState) {
    const auto g = small_grid();
    SolverConfig cfg;
    cfg.sample_every = 4;
    std::vector<double> seen;
    const auto res = run_until(init_radial(hyperboloid_datum(g, 1.0, 0.1), kCone, g, cfg), 0.0105,
                               [&](const RadialSim& s) { seen.push_back(s.t()); });
    ASSERT_EQ(res.sim.steps, 11u);
    ASSERT_EQ(seen.size(), 4u);  // t = 0, 4 dt, 8 dt, final
    EXPECT_EQ(seen.front(), 0.0);
    EXPECT_EQ(seen.back(), res.sim.t());
    EXPECT_EQ(res.report.rows.size(), 4u);
}

TEST(Regularization, FamilyIsOrdered) {
    const auto g = small_grid(300);
    const double T = cone_lifetime(kCone);
    const auto study = epsilon_regularization_study(hyperboloid_datum(g, 1.0, 0.1), kCone, g, SolverConfig{},
                                                    {1e-3, 5e-4, 1e-4}, {0.1 * T, 0.3 * T, 0.5 * T});
    EXPECT_TRUE(study.monotone);
    EXPECT_LE(study.worst_order_defect, 1e-8);
    ASSERT_EQ(study.family.size(), 3u);
    for (const auto& traj : study.family) EXPECT_EQ(traj.snapshots.size(), 3u);
}

TEST(Regularization, ZeroEpsilonReproducesBaseRun) {
    const auto g = small_grid(300);
    const double T = cone_lifetime(kCone);
    SolverConfig cfg;
    cfg.bc = FarFieldKind::DirichletShift;
    const auto u0 = hyperboloid_datum(g, 1.0, 0.1);
    const auto base = run_until(make_radial_sim({g, u0, 0.0}, kCone, cfg), 0.5 * T);
    const auto study = epsilon_regularization_study(u0, kCone, g, cfg, {1e-2, 0.0}, {0.5 * T});
    EXPECT_EQ(study.family.back().snapshots.back().u, base.sim.u());

    double dev = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        dev = std::max(dev, std::abs(study.family.front().snapshots.back().u[i] - base.sim.u()[i]));
    EXPECT_LE(dev, 10.0 * 1e-2 * (g.R() * g.R() + 1.0));
}

TEST(Regularization, RejectsUnorderedList) {
    const auto g = small_grid(300);
    EXPECT_THROW(epsilon_regularization_study(hyperboloid_datum(g, 1.0, 0.1), kCone, g, SolverConfig{}, {0.01, 0.05},
                                              {0.1}),
                 DomainError);
}
