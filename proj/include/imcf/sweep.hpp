#pragma once

/// Parameter sweeps of the extinction time over a bounded worker pool.

#include <atomic>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "imcf/diagnostics.hpp"
#include "imcf/io.hpp"
#include "imcf/radial_solver.hpp"

namespace imcf {

/// Everything a single radial run produces.
struct RadialOutcome {
    RunResult run;
    std::optional<ExtinctionEstimate> extinction;
    std::optional<PlaneResult> plane;
    double max_sandwich_viol = 0.0;
};

/// Runs the radial problem described by cfg. run.t_end = 0 marches until the
/// profile flattens and then estimates the extinction time and limit plane.
inline RadialOutcome run_radial_config(const RunConfig& cfg) {
    validate(cfg);
    const auto cone = cone_of(cfg);
    const auto grid = radial_grid_of(cfg);
    auto sim = init_radial(radial_datum(cfg, grid), cone, grid, cfg.solver);
    const double t_end = cfg.t_end > 0.0 ? cfg.t_end : std::numeric_limits<double>::infinity();
    RadialOutcome out{run_until(std::move(sim), t_end), std::nullopt, std::nullopt, 0.0};
    out.max_sandwich_viol = max_sandwich_violation(out.run.report.rows, cone);
    const auto stop = out.run.sim.stop;
    if (stop == StopReason::Flattened || stop == StopReason::CurvatureFloor) {
        out.extinction = estimate_extinction(out.run.sim);
        if (stop == StopReason::Flattened) out.plane = check_plane_convergence(out.run.sim, cone.kappa, out.extinction);
    }
    return out;
}

/// IMCF_THREADS if set to a positive integer, else the hardware concurrency.
inline std::size_t worker_count() {
    if (const char* env = std::getenv("IMCF_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

struct SweepRow {
    double param = 0.0;
    double T_est = std::numeric_limits<double>::quiet_NaN();
    double T_closed = std::numeric_limits<double>::quiet_NaN();
    double rel_err = std::numeric_limits<double>::quiet_NaN();
    double h_measured = std::numeric_limits<double>::quiet_NaN();
    double max_sandwich_viol = std::numeric_limits<double>::quiet_NaN();
    std::string status = "ok";
};

inline const std::vector<std::string> kSweepColumns = {"param",      "T_est",             "T_closed", "rel_err",
                                                       "h_measured", "max_sandwich_viol", "status"};

/// Status cell: "ok" or the error class, without commas.
inline std::string sweep_status(const std::exception& e) {
    std::string kind = "error";
    if (dynamic_cast<const ConfigError*>(&e)) kind = "config_error";
    else if (dynamic_cast<const CurvatureFloor*>(&e)) kind = "curvature_floor";
    else if (dynamic_cast<const NewtonDiverged*>(&e)) kind = "newton_diverged";
    else if (dynamic_cast<const NumericalError*>(&e)) kind = "numerical_error";
    else if (dynamic_cast<const SandwichViolation*>(&e)) kind = "sandwich_violation";
    else if (dynamic_cast<const MeanConvexityViolation*>(&e)) kind = "mean_convexity_violation";
    else if (dynamic_cast<const DomainError*>(&e)) kind = "domain_error";
    else if (dynamic_cast<const NotFlattened*>(&e)) kind = "not_flattened";
    return kind;
}

inline SweepRow sweep_point(const RunConfig& base, const std::string& axis, double value) {
    SweepRow row;
    row.param = value;
    try {
        RunConfig cfg = base;
        set_config_value(cfg, axis, format_double_exact(value));
        validate(cfg);
        row.T_closed = cone_lifetime(cone_of(cfg));
        const auto out = run_radial_config(cfg);
        row.max_sandwich_viol = out.max_sandwich_viol;
        if (out.extinction) {
            row.T_est = out.extinction->T_est;
            row.rel_err = std::abs(row.T_est - row.T_closed) / row.T_closed;
        }
        if (out.plane) row.h_measured = out.plane->h_measured;
        if (!out.extinction) row.status = std::string(stop_reason_name(out.run.sim.stop));
    } catch (const std::exception& e) {
        row.status = sweep_status(e);
    }
    return row;
}

/**
 * One row per value, in input order. Runs are independent and write to
 * preallocated slots, so the output does not depend on the thread count.
 */
inline std::vector<SweepRow> sweep(const RunConfig& base, const std::string& axis, const std::vector<double>& values,
                                   std::size_t threads = worker_count()) {
    {
        RunConfig probe = base;
        const std::string current = get_config_value(probe, axis);
        if (!parse_double(current)) throw ConfigError(axis, 0, 0, "sweep axis must be a numeric key");
    }
    std::vector<SweepRow> rows(values.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < values.size();) rows[k] = sweep_point(base, axis, values[k]);
    };
    const std::size_t nt = std::min(std::max<std::size_t>(threads, 1), std::max<std::size_t>(values.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < nt; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return rows;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    CsvWriter w(out, kSweepColumns);
    for (const auto& r : rows) w.row({r.param, r.T_est, r.T_closed, r.rel_err, r.h_measured, r.max_sandwich_viol}, {r.status});
}

}  // namespace imcf
