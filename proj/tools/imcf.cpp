// imcf: command-line front end of the IMCF graph-flow laboratory.
//
// Exit codes: 0 success, 1 a check failed, 2 usage or input error,
// 3 numerical failure.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "imcf/imcf.hpp"

namespace {

using namespace imcf;

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;
constexpr int kNumerical = 3;

/// Writes to a file when a path is given, otherwise to stdout.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw DomainError("cannot write '" + path + "'");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }
    bool to_stdout() const { return !file_; }

private:
    std::unique_ptr<std::ofstream> file_;
};

RunConfig load_with_overrides(const std::string& path, const std::vector<std::string>& overrides) {
    RunConfig cfg = load_config(path);
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError(kv, 0, 0, "--set expects key=value");
        set_config_value(cfg, detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
    }
    validate(cfg);
    return cfg;
}

std::string fmt(double v) { return format_double(v); }

void print_law_summary(std::ostream& log, const DiagnosticsReport& rep) {
    for (LawId id : kAllLaws) {
        if (rep.passed(id)) continue;
        std::size_t count = 0;
        for (const auto& v : rep.violations) count += v.law == id;
        log << "  " << law_name(id) << ": FAIL (" << count << " violations, worst excess " << fmt(rep.worst(id)) << ")\n";
    }
    log << "  laws checked: " << (rep.passed() ? "all passed" : "violations found") << "\n";
}

// --------------------------------------------------------------------------

struct ConeArgs {
    int n = 2;
    double alpha0 = 1.0;
    double kappa = 0.0;
    std::size_t samples = 11;
    std::string out;
};

int cmd_cone(const ConeArgs& a) {
    const ConeFamily cone{a.n, a.alpha0, a.kappa};
    validate(cone);
    const double T = cone_lifetime(cone);
    Output out(a.out);
    CsvWriter w(out.stream(), {"t", "alpha", "beta", "gamma", "T"});
    const std::size_t k = std::max<std::size_t>(a.samples, 2);
    for (std::size_t i = 0; i < k; ++i) {
        const double t = T * static_cast<double>(i) / static_cast<double>(k - 1);
        const auto gb = cone_gamma_beta(cone, t);
        w.row({t, cone_slope(cone, t), gb.beta, gb.gamma, T});
    }
    std::cerr << "lifetime T = " << fmt(T) << "\n";
    return kOk;
}

// --------------------------------------------------------------------------

/// Config file (optional) plus per-key command-line flags.
struct RunArgs {
    std::string config;
    std::vector<std::string> overrides;
    std::string resume;
    std::vector<std::pair<std::string, std::string>> flags;  ///< (config key, value), filled from options
    std::map<std::string, std::string> flag_values;
};

/// Registers --name for each (flag, key) pair; values land in args.flag_values.
void add_key_flags(CLI::App* cmd, RunArgs& args, const std::vector<std::pair<std::string, std::string>>& flags) {
    for (const auto& [flag, key] : flags) {
        args.flags.push_back({flag, key});
        cmd->add_option("--" + flag, args.flag_values[key], "sets " + key);
    }
}

RunConfig resolve_run_config(const RunArgs& a, CLI::App* cmd, ModuleKind module) {
    RunConfig cfg;
    if (!a.config.empty()) {
        cfg = load_config(a.config);
    } else {
        for (const char* flag : {"n", "alpha0", "kappa"})
            if (cmd->count(std::string("--") + flag) == 0)
                throw ConfigError(std::string("--") + flag, 0, 0, "required when no config file is given");
        cfg.module = module;
    }
    for (const auto& [flag, key] : a.flags)
        if (cmd->count("--" + flag) > 0) set_config_value(cfg, key, a.flag_values.at(key));
    for (const auto& kv : a.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError(kv, 0, 0, "--set expects key=value");
        set_config_value(cfg, detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
    }
    validate(cfg);
    return cfg;
}

int cmd_radial(const RunArgs& a, CLI::App* cmd) {
    const RunConfig cfg = resolve_run_config(a, cmd, ModuleKind::Radial);
    if (cfg.module != ModuleKind::Radial) throw ConfigError("problem.module", 0, 0, "the radial command needs module = radial");
    const auto cone = cone_of(cfg);
    RadialSim sim;
    if (!a.resume.empty()) {
        sim = resume_radial(load_snapshot(a.resume), cfg);
    } else {
        const auto grid = radial_grid_of(cfg);
        sim = init_radial(radial_datum(cfg, grid), cone, grid, cfg.solver);
    }

    Output csv(cfg.output_csv);
    std::unique_ptr<CsvWriter> writer;
    if (!cfg.output_csv.empty()) writer = std::make_unique<CsvWriter>(csv.stream(), kRadialColumns);
    auto on_sample = [&](const RadialSim& s) {
        if (writer) write_radial_rows(*writer, s.profile);
    };
    const double t_end = cfg.t_end > 0.0 ? cfg.t_end : std::numeric_limits<double>::infinity();
    RunResult res = run_until(std::move(sim), t_end, on_sample);
    if (!cfg.output_snapshot.empty()) save_snapshot(cfg.output_snapshot, make_snapshot(res.sim, cfg));

    std::ostream& log = std::cerr;
    const double T = cone_lifetime(cone);
    log << "stop: " << stop_reason_name(res.sim.stop) << " at t=" << fmt(res.sim.t()) << " after " << res.sim.steps
        << " steps\n";
    log << "T_closed = " << fmt(T) << "\n";

    bool ok = true;
    if (res.sim.stop == StopReason::Flattened || res.sim.stop == StopReason::CurvatureFloor) {
        const auto est = estimate_extinction(res.sim);
        log << "T_est = " << fmt(est.T_est) << " (rel err " << fmt(std::abs(est.T_est - T) / T) << ")\n";
        if (res.sim.stop == StopReason::Flattened) {
            const auto plane = check_plane_convergence(res.sim, cone.kappa, est);
            log << "plane: h_measured=" << fmt(plane.h_measured) << " h_literal=" << fmt(plane.h_literal)
                << " sup_deviation=" << fmt(plane.sup_deviation) << " bound=" << fmt(plane.deviation_bound) << " "
                << (plane.passed ? "PASS" : "FAIL") << "\n";
            ok = ok && plane.passed;
        }
    }
    VerifySettings vs;
    vs.probe_radius = res.sim.diag.probe_fraction * res.sim.grid().R();
    const auto rep = verify_rows(res.report.rows, cone, vs);
    print_law_summary(log, rep);
    ok = ok && rep.passed();
    return ok ? kOk : kCheckFailed;
}

int cmd_grid2d(const RunArgs& a, CLI::App* cmd) {
    const RunConfig cfg = resolve_run_config(a, cmd, ModuleKind::Grid2D);
    if (cfg.module != ModuleKind::Grid2D) throw ConfigError("problem.module", 0, 0, "the grid2d command needs module = grid2d");
    if (!a.resume.empty()) throw ConfigError("", 0, 0, "--resume is only supported for radial runs");
    const auto cone = cone_of(cfg);
    auto sim = init_2d(lattice_datum(cfg).u, cone, cfg.L, cfg.m, cfg.solver);

    Output csv(cfg.output_csv);
    std::unique_ptr<CsvWriter> writer;
    if (!cfg.output_csv.empty()) writer = std::make_unique<CsvWriter>(csv.stream(), kLatticeColumns);
    auto on_sample = [&](const Sim2D& s) {
        if (writer) write_lattice_rows(*writer, s.state);
    };
    const double t_end = cfg.t_end > 0.0 ? cfg.t_end : std::numeric_limits<double>::infinity();
    auto res = run_2d(std::move(sim), t_end, on_sample);
    if (!cfg.output_snapshot.empty()) save_snapshot(cfg.output_snapshot, make_snapshot(res.sim, cfg));

    std::ostream& log = std::cerr;
    log << "stop: " << stop_reason_name(res.sim.stop) << " at t=" << fmt(res.sim.t()) << " after " << res.sim.steps
        << " steps\n";
    const double L = cfg.L;
    log << "azimuthal variation at |x| = L/4, L/2: " << fmt(azimuthal_variation(res.sim.state, 0.25 * L)) << ", "
        << fmt(azimuthal_variation(res.sim.state, 0.5 * L)) << "\n";
    VerifySettings vs;
    const auto rep = verify_rows(res.report.rows, cone, vs);
    print_law_summary(log, rep);
    return rep.passed() ? kOk : kCheckFailed;
}

// --------------------------------------------------------------------------

struct SelfsimArgs {
    int n = 3;
    double lambda = 1.0;
    double kappa = -1.0;
    double r_max = 0.0;  ///< 0: 1e4 |kappa|
    double tol = 0.01;
    std::string out;
};

int cmd_selfsim(const SelfsimArgs& a) {
    const double r_max = a.r_max > 0.0 ? a.r_max : 1e4 * std::abs(a.kappa);
    const auto prof = shoot_profile(a.lambda, a.kappa, a.n, r_max);
    if (!a.out.empty()) {
        Output out(a.out);
        CsvWriter w(out.stream(), {"r", "u", "ur", "flux_ratio"});
        for (const auto& p : prof.samples) w.row({p.r, p.u, p.ur, flux_ratio(p)});
    }
    const auto q = flux_exponent(prof);
    const double err = std::abs(q.q_est - prof.q_target) / std::abs(prof.q_target);
    std::cerr << "q_target = " << fmt(prof.q_target) << "\nq_est = " << fmt(q.q_est)
              << "\nratios at r_max/4, r_max/2, r_max = " << fmt(q.ratios[0]) << ", " << fmt(q.ratios[1]) << ", "
              << fmt(q.ratios[2]) << "\nrelative error = " << fmt(err) << "\n";
    return err <= a.tol ? kOk : kCheckFailed;
}

// --------------------------------------------------------------------------

struct VerifyArgs {
    std::string trajectory;
    int n = 2;
    double alpha0 = 1.0;
    double kappa = 0.0;
    double probe_fraction = 0.6;
    std::string out;
};

int cmd_verify(const VerifyArgs& a) {
    std::ifstream in(a.trajectory);
    if (!in) throw DomainError("cannot open trajectory '" + a.trajectory + "'");
    const ConeFamily cone{a.n, a.alpha0, a.kappa};
    validate(cone);
    const auto traj = read_radial_trajectory(in, a.n);
    DiagnosticsSettings ds;
    ds.probe_fraction = a.probe_fraction;
    const auto rows = rows_from_profiles(traj, cone, ds);
    VerifySettings vs;
    vs.probe_radius = a.probe_fraction * traj.front().grid.R();
    const auto rep = verify_rows(rows, cone, vs);
    nlohmann::json report;
    report["passed"] = rep.passed();
    report["snapshots"] = rows.size();
    report["t_first"] = rows.front().t;
    report["t_last"] = rows.back().t;
    for (LawId id : kAllLaws) {
        nlohmann::json law;
        std::size_t count = 0;
        for (const auto& v : rep.violations) count += v.law == id;
        law["passed"] = rep.passed(id);
        law["violations"] = count;
        law["worst_excess"] = rep.worst(id);
        report["laws"][std::string(law_name(id))] = law;
    }
    report["violations"] = nlohmann::json::array();
    for (const auto& v : rep.violations)
        report["violations"].push_back({{"law", std::string(law_name(v.law))}, {"t", v.t}, {"magnitude", v.magnitude}});
    Output out(a.out);
    out.stream() << report.dump(2) << "\n";
    std::cerr << rows.size() << " snapshots from t=" << fmt(rows.front().t) << " to t=" << fmt(rows.back().t) << "\n";
    print_law_summary(std::cerr, rep);
    return rep.passed() ? kOk : kCheckFailed;
}

// --------------------------------------------------------------------------

struct SweepArgs {
    std::string config;
    std::vector<std::string> overrides;
    std::string axis = "problem.alpha0";
    std::string values;
    std::string out;
};

std::vector<double> parse_value_list(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        cell = detail::trim(cell);
        if (cell.empty()) continue;
        const auto d = parse_double(cell);
        if (!d) throw ConfigError("--values", 0, 0, "not a number: '" + cell + "'");
        v.push_back(*d);
    }
    return v;
}

int cmd_sweep(const SweepArgs& a) {
    const RunConfig cfg = load_with_overrides(a.config, a.overrides);
    const auto rows = sweep(cfg, a.axis, parse_value_list(a.values));
    Output out(a.out);
    write_sweep_csv(out.stream(), rows);
    std::size_t failed = 0;
    for (const auto& r : rows) failed += r.status != "ok";
    if (failed) std::cerr << failed << " of " << rows.size() << " runs did not finish\n";
    return failed ? kCheckFailed : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Inverse mean curvature flow of entire graphs"};
    app.require_subcommand(1);

    ConeArgs cone;
    auto* c = app.add_subcommand("cone", "Closed-form cone family: t,alpha,beta,gamma,T over [0, T]");
    c->add_option("--n", cone.n, "dimension n >= 2")->required();
    c->add_option("--alpha0", cone.alpha0, "initial slope")->required();
    c->add_option("--kappa", cone.kappa, "vertical offset of the upper cone");
    c->add_option("--samples", cone.samples, "number of time samples");
    c->add_option("-o,--out", cone.out, "CSV output (default stdout)");

    RunArgs radial;
    auto* r = app.add_subcommand("radial", "Rotationally symmetric run (config file and/or flags)");
    r->add_option("config", radial.config, "config file")->check(CLI::ExistingFile);
    add_key_flags(r, radial,
                  {{"n", "problem.n"}, {"alpha0", "problem.alpha0"}, {"kappa", "problem.kappa"},
                   {"datum", "problem.datum"}, {"datum-file", "problem.datum_file"}, {"R", "grid.R"},
                   {"nodes", "grid.nodes"}, {"stretch", "grid.stretch"}, {"dt", "solver.dt"}, {"t-end", "run.t_end"},
                   {"bc", "solver.bc"}, {"scheme", "solver.scheme"}, {"sample-every", "run.sample_every"},
                   {"out", "output.csv"}, {"snapshot", "output.snapshot"}});
    r->add_option("--set", radial.overrides, "override any key, e.g. --set solver.newton_tol=1e-12");
    r->add_option("--resume", radial.resume, "continue from a snapshot")->check(CLI::ExistingFile);

    RunArgs grid;
    auto* g = app.add_subcommand("grid2d", "Cartesian lattice run, n = 2 (config file and/or flags)");
    g->add_option("config", grid.config, "config file")->check(CLI::ExistingFile);
    add_key_flags(g, grid,
                  {{"n", "problem.n"}, {"alpha0", "problem.alpha0"}, {"kappa", "problem.kappa"},
                   {"anisotropy", "problem.anisotropy"}, {"L", "grid.L"}, {"m", "grid.m"}, {"dt", "solver.dt"},
                   {"t-end", "run.t_end"}, {"scheme", "solver.scheme"}, {"sample-every", "run.sample_every"},
                   {"out", "output.csv"}, {"snapshot", "output.snapshot"}});
    g->add_option("--set", grid.overrides, "override any key");

    SelfsimArgs ss;
    auto* s = app.add_subcommand("selfsim", "Shoot a self-similar profile and estimate its flux exponent");
    s->add_option("--n", ss.n, "dimension n >= 2")->required();
    s->add_option("--lambda", ss.lambda, "self-similar rate, lambda > 1/(n-1)")->required();
    s->add_option("--kappa", ss.kappa, "profile value at r = 0 (nonzero)");
    s->add_option("--rmax", ss.r_max, "outer radius of the shooting (default 1e4 |kappa|)");
    s->add_option("--tol", ss.tol, "relative tolerance on the flux exponent");
    s->add_option("-o,--out", ss.out, "CSV r,u,ur,flux_ratio of the profile samples");

    VerifyArgs ver;
    auto* v = app.add_subcommand("verify", "Check the flow laws on a stored radial trajectory CSV");
    v->add_option("trajectory", ver.trajectory, "CSV with columns t,r,u,...")->required()->check(CLI::ExistingFile);
    v->add_option("--n", ver.n, "dimension")->required();
    v->add_option("--alpha0", ver.alpha0, "cone slope at t = 0")->required();
    v->add_option("--kappa", ver.kappa, "cone offset")->required();
    v->add_option("--probe-fraction", ver.probe_fraction, "far-field probe radius as a fraction of R");
    v->add_option("-o,--out", ver.out, "JSON report (default stdout)");

    SweepArgs sw;
    auto* w = app.add_subcommand("sweep", "Extinction time over one numeric config key");
    w->add_option("config", sw.config, "template config file")->required()->check(CLI::ExistingFile);
    w->add_option("--axis", sw.axis, "config key to vary");
    w->add_option("--values", sw.values, "comma-separated values")->required();
    w->add_option("--set", sw.overrides, "override a key");
    w->add_option("-o,--out", sw.out, "CSV output (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*c) return cmd_cone(cone);
        if (*r) return cmd_radial(radial, r);
        if (*g) return cmd_grid2d(grid, g);
        if (*s) return cmd_selfsim(ss);
        if (*v) return cmd_verify(ver);
        if (*w) return cmd_sweep(sw);
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::logic_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kCheckFailed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumerical;
    }
    return kUsage;
}
