#include <gtest/gtest.h>

#include <cmath>

#include "imcf/diagnostics.hpp"

using namespace imcf;

namespace {

const ConeFamily kCone{2, 1.0, 0.1};

/// One flattened hyperboloid run shared by the tests that only read it.
const RunResult& flattened_run() {
    static const RunResult res = [] {
        const auto g = RadialGrid::stretched(100.0, 500, 2, 6.0);
        SolverConfig cfg;
        cfg.dt = 4e-3;
        cfg.sample_every = 5;
        return run_until(init_radial(hyperboloid_datum(g, 1.0, 0.1), kCone, g, cfg),
                         std::numeric_limits<double>::infinity());
    }();
    return res;
}

std::vector<DiagnosticsRow> cone_rows() {
    std::vector<DiagnosticsRow> rows;
    const double T = cone_lifetime(kCone);
    for (int k = 0; k <= 20; ++k) {
        DiagnosticsRow row;
        row.t = 0.9 * T * k / 20.0;
        row.gamma_t = cone_gamma_beta(kCone, row.t).gamma;
        row.far_v = row.gamma_t;
        row.inf_v = row.gamma_t;
        row.sup_Hu = 1.0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST(GlobalHBound, HoldsOnASolverRunAndCatchesInflation) {
    auto rows = flattened_run().report.rows;
    ASSERT_GT(rows.size(), 5u);
    EXPECT_TRUE(check_global_H_bound(rows).empty());

    rows[3].sup_Hu = 1.01 * rows.front().sup_Hu;
    const auto v = check_global_H_bound(rows);
    ASSERT_FALSE(v.empty());
    EXPECT_EQ(v.front().law, LawId::HABOVE);
    EXPECT_EQ(v.front().t, rows[3].t);
    EXPECT_GE(v.front().magnitude, 0.01 - 1e-12);  // the rise over the previous row can exceed the rise over the first
}

TEST(LocalHBound, PlaneIsTrivialAndCutoffIsExplicit) {
    const auto g = RadialGrid::uniform(5.0, 100, 2);
    const auto plane = compute_fields_radial({g, std::vector<double>(g.size(), 0.3), 0.0});
    EXPECT_NEAR(local_H_quantity(plane, 0.3, 2.0), 0.0, 1e-11);
    EXPECT_FALSE(check_local_H_bound(plane, 0.3, 2.0, 0.0).has_value());
    EXPECT_THROW(check_local_H_bound(plane, 0.3, 1.0, 0.0), DomainError);

    const auto hyp = compute_fields_radial({g, hyperboloid_datum(g, 1.0, 0.1), 0.0});
    const double r = 1.5, z0 = 0.1;
    double expect = 0.0;
    for (std::size_t i = 0; i < hyp.size(); ++i) {
        const double eta = std::max(0.0, r * r - g[i] * g[i] - (hyp.u[i] - z0) * (hyp.u[i] - z0));
        expect = std::max(expect, eta * eta * hyp.H[i]);
    }
    EXPECT_DOUBLE_EQ(local_H_quantity(hyp, z0, r), expect);
    EXPECT_GT(expect, 0.0);
    const auto v = check_local_H_bound(hyp, z0, r, 0.0);
    EXPECT_EQ(v.has_value(), expect > 2.0 * 2 * r * r * r);
}

TEST(Starshaped, HoldsOnASolverRun) {
    const auto& rows = flattened_run().report.rows;
    const auto res = check_starshaped(rows, 0.5 * rows.front().min_star);
    EXPECT_TRUE(res.passed);
    EXPECT_GT(res.initial_min, 0.0);
}

TEST(Starshaped, DegenerateCentreIsRejected) {
    const auto& rows = flattened_run().report.rows;
    EXPECT_THROW(check_starshaped(rows, 2.0 * rows.front().min_star), DomainError);
}

TEST(Starshaped, LoweringTheGraphWidensTheMargin) {
    const auto g = RadialGrid::stretched(100.0, 300, 2, 6.0);
    auto u = hyperboloid_datum(g, 1.0, 0.1);
    const auto before = diagnostics_row(compute_fields_radial({g, u, 0.0}), kCone, g.R(), {});
    for (auto& x : u) x -= 0.05;
    const auto after = diagnostics_row(compute_fields_radial({g, u, 0.0}), kCone, g.R(), {});
    EXPECT_GT(after.min_star, before.min_star);
}

TEST(Starshaped, BoundaryFloorAndLiteralForm) {
    std::vector<DiagnosticsRow> rows(3);
    for (std::size_t k = 0; k < 3; ++k) {
        rows[k].t = 0.1 * static_cast<double>(k);
        rows[k].min_star = 1.0;
        rows[k].star_boundary = 1.0;
    }
    rows[1].star_boundary = 0.2;  // the boundary drags the floor down
    rows[2].min_star = 0.3;
    auto res = check_starshaped(rows, 0.5);
    EXPECT_TRUE(res.passed);
    EXPECT_FALSE(res.literal_passed);
    EXPECT_NEAR(res.worst_literal_deficit, 0.2, 1e-15);

    rows[2].min_star = 0.1;
    res = check_starshaped(rows, 0.5);
    EXPECT_FALSE(res.passed);
    ASSERT_EQ(res.violations.size(), 1u);
    EXPECT_EQ(res.violations[0].law, LawId::STAR);
}

TEST(AsymptoticV, ExactConeRowsPass) {
    auto rows = cone_rows();
    EXPECT_TRUE(check_asymptotic_v(rows, kCone, 60.0).empty());
    rows[10].far_v = 2.0 * rows[10].gamma_t;
    const auto v = check_asymptotic_v(rows, kCone, 60.0);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].law, LawId::VASYMP);
    EXPECT_EQ(v[0].t, rows[10].t);
}

TEST(AsymptoticV, HoldsOnASolverRun) {
    EXPECT_TRUE(check_asymptotic_v(flattened_run().report.rows, kCone, 60.0).empty());
}

TEST(LowerBoundV, WindowAndDomain) {
    const double T = cone_lifetime(kCone);
    EXPECT_THROW(check_lower_bound_v(cone_rows(), kCone, 0.0), DomainError);
    EXPECT_THROW(check_lower_bound_v(cone_rows(), kCone, T / 3.0), DomainError);

    const auto res = check_lower_bound_v(cone_rows(), kCone, 0.1 * T);
    EXPECT_TRUE(res.passed);
    EXPECT_NEAR(res.t_limit, 0.7 * T, 1e-15);
    EXPECT_LT(res.rows_used, cone_rows().size());

    const auto run = check_lower_bound_v(flattened_run().report.rows, kCone, 0.1 * T);
    EXPECT_TRUE(run.passed);
    EXPECT_GT(run.c, 0.0);
}

TEST(Sandwich, CheckedThroughNinetyPercentOfTheLifetime) {
    auto rows = cone_rows();  // spans [0, 0.9T]
    EXPECT_TRUE(check_sandwich(rows, kCone, 2e-3).empty());
    rows[5].sandwich_viol = 3e-3;
    DiagnosticsRow late;
    late.t = 0.95 * cone_lifetime(kCone);
    late.sandwich_viol = 0.5;
    rows.push_back(late);
    const auto v = check_sandwich(rows, kCone, 2e-3);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].t, rows[5].t);
    EXPECT_EQ(max_sandwich_violation(rows, kCone), 3e-3);
}

TEST(Compare, IdenticalAndShiftedData) {
    const auto g = RadialGrid::stretched(100.0, 300, 2, 6.0);
    const auto u = hyperboloid_datum(g, 1.0, 0.08);
    const auto a = init_radial(u, kCone, g, SolverConfig{});
    const double T = cone_lifetime(kCone);

    const auto same = comparison_test(a, a, 0.3 * T);
    EXPECT_TRUE(same.passed());
    EXPECT_EQ(same.worst, 0.0);

    auto shifted = u;
    for (auto& x : shifted) x += 0.01;
    const auto b = init_radial(shifted, kCone, g, SolverConfig{});
    const auto res = comparison_test(a, b, 0.3 * T);
    EXPECT_TRUE(res.passed());
    EXPECT_LT(res.worst, 0.0);
    EXPECT_GT(res.samples, 2u);
}

TEST(Compare, InjectedDisorderIsDetected) {
    const auto g = RadialGrid::uniform(1.0, 10, 2);
    std::vector<RadialProfile> a, b;
    for (int k = 0; k < 3; ++k) {
        a.push_back({g, std::vector<double>(g.size(), 0.0), 0.1 * k});
        b.push_back({g, std::vector<double>(g.size(), 1.0), 0.1 * k});
    }
    EXPECT_TRUE(compare_states(a, b).passed());
    a[1].u[4] = 1.0 + 1e-6;
    const auto res = compare_states(a, b);
    ASSERT_EQ(res.violations.size(), 1u);
    EXPECT_EQ(res.violations[0].law, LawId::COMPARE);
    EXPECT_NEAR(res.worst, 1e-6, 1e-15);
    a.pop_back();
    EXPECT_THROW(compare_states(a, b), DomainError);
}

TEST(Compare, MismatchedFamiliesAreRejected) {
    const auto g = RadialGrid::stretched(100.0, 300, 2, 6.0);
    const auto a = init_radial(hyperboloid_datum(g, 1.0, 0.08), kCone, g, SolverConfig{});
    const auto b = init_radial(hyperboloid_datum(g, 1.0, 0.08), ConeFamily{2, 1.0, 0.2}, g, SolverConfig{});
    EXPECT_THROW(comparison_test(a, b, 0.01), DomainError);
}

TEST(Plane, FlattenedRunConvergesAndShiftIsCaught) {
    const auto& run = flattened_run();
    ASSERT_EQ(run.sim.stop, StopReason::Flattened);
    const auto est = estimate_extinction(run.sim);
    const auto res = check_plane_convergence(run.sim, kCone.kappa, est);
    EXPECT_TRUE(res.passed);
    EXPECT_GE(res.h_measured, -1e-3);
    EXPECT_LE(res.h_measured, kCone.kappa + 1e-3);

    auto shifted = run.sim;
    for (auto& x : shifted.profile.u) x += 2.0 * kCone.kappa;
    EXPECT_FALSE(check_plane_convergence(shifted, kCone.kappa).passed);
}

TEST(Plane, NeedsAFlattenedRun) {
    auto sim = flattened_run().sim;
    sim.stop = StopReason::ReachedEnd;
    EXPECT_THROW(check_plane_convergence(sim, kCone.kappa), NotFlattened);
}

TEST(Registry, NamesRoundTrip) {
    for (LawId id : kAllLaws) {
        const auto back = law_from_name(law_name(id));
        ASSERT_TRUE(back.has_value());
        EXPECT_EQ(*back, id);
    }
    EXPECT_FALSE(law_from_name("HABOVE ").has_value());
    EXPECT_FALSE(law_from_name("").has_value());
}

TEST(Report, MergeKeepsTimeOrder) {
    DiagnosticsReport a, b;
    for (double t : {0.0, 0.2, 0.4}) a.rows.push_back(DiagnosticsRow{.t = t});
    for (double t : {0.1, 0.3}) b.rows.push_back(DiagnosticsRow{.t = t});
    a.violations.push_back({LawId::STAR, 0.4, 1.0});
    b.violations.push_back({LawId::HABOVE, 0.1, 2.0});
    const auto m = DiagnosticsReport::merge(a, b);
    ASSERT_EQ(m.rows.size(), 5u);
    for (std::size_t k = 1; k < m.rows.size(); ++k) EXPECT_LT(m.rows[k - 1].t, m.rows[k].t);
    ASSERT_EQ(m.violations.size(), 2u);
    EXPECT_EQ(m.violations[0].law, LawId::HABOVE);
    EXPECT_FALSE(m.passed(LawId::STAR));
    EXPECT_TRUE(m.passed(LawId::VLOWER));
    EXPECT_EQ(m.worst(LawId::HABOVE), 2.0);
}

TEST(VerifyRows, SolverRunPassesAndIsDeterministic) {
    VerifySettings s;
    s.probe_radius = 60.0;
    const auto& rows = flattened_run().report.rows;
    const auto a = verify_rows(rows, kCone, s);
    const auto b = verify_rows(rows, kCone, s);
    EXPECT_TRUE(a.passed());
    ASSERT_EQ(a.violations.size(), b.violations.size());
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t k = 0; k < a.rows.size(); ++k) EXPECT_EQ(a.rows[k].sup_Hu, b.rows[k].sup_Hu);
    EXPECT_TRUE(verify_rows({}, kCone, s).passed());
}
