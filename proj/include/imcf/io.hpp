#pragma once

/**
 * @file io.hpp
 * @brief Run configuration, snapshots, and CSV input/output.
 *
 * Configuration grammar, one statement per line:
 *
 *     # comment
 *     section.key = value   # trailing comment
 *
 * Values are numbers or bare words; a value may be wrapped in double quotes
 * to keep spaces or '#'. Unknown keys and duplicate keys are errors.
 */

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "imcf/errors.hpp"
#include "imcf/cartesian_solver.hpp"
#include "imcf/exact_solutions.hpp"
#include "imcf/geometry.hpp"
#include "imcf/grid.hpp"
#include "imcf/radial_solver.hpp"

namespace imcf {

// ---------------------------------------------------------------------------
// Number formatting

/// 17 significant digits, '.' decimal point, locale independent.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

/// Shortest text that parses back to exactly v.
inline std::string format_double_exact(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

/// CSV writer: fixed header, '\n' line endings, 17 significant digits.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out), columns_(header.size()) {
        for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << header[k];
        out_ << '\n';
    }

    void row(const std::vector<double>& values) {
        if (values.size() != columns_) throw std::logic_error("CSV row width differs from the header");
        for (std::size_t k = 0; k < values.size(); ++k) out_ << (k ? "," : "") << format_double(values[k]);
        out_ << '\n';
    }

    /// Numeric columns followed by trailing text cells.
    void row(const std::vector<double>& values, const std::vector<std::string>& text) {
        if (values.size() + text.size() != columns_) throw std::logic_error("CSV row width differs from the header");
        for (std::size_t k = 0; k < values.size(); ++k) out_ << (k ? "," : "") << format_double(values[k]);
        for (const auto& s : text) out_ << ',' << s;
        out_ << '\n';
    }

private:
    std::ostream& out_;
    std::size_t columns_;
};

// ---------------------------------------------------------------------------
// Run configuration

enum class ModuleKind { Radial, Grid2D };
enum class DatumKind { Hyperboloid, ConeSmooth, File };

inline bool operator==(const SolverConfig& a, const SolverConfig& b) {
    return a.dt == b.dt && a.newton_tol == b.newton_tol && a.newton_max_iter == b.newton_max_iter &&
           a.H_min == b.H_min && a.bc == b.bc && a.flat_eps == b.flat_eps && a.scheme == b.scheme &&
           a.sample_every == b.sample_every;
}

struct RunConfig {
    ModuleKind module = ModuleKind::Radial;
    int n = 2;
    double alpha0 = 1.0;
    double kappa = 0.1;
    DatumKind datum = DatumKind::Hyperboloid;
    std::string datum_file;
    double anisotropy = 0.0;  ///< grid2d only: e in the anisotropic hyperboloid

    double R = 100.0;
    std::size_t nodes = 2000;  ///< radial cells M
    double stretch = 6.0;
    double L = 4.0;
    std::size_t m = 32;

    SolverConfig solver;

    double t_end = 0.0;  ///< <= 0: run until flattened
    std::uint64_t seed = 0;
    std::string output_csv;
    std::string output_snapshot;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

struct KeyHandler {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

[[noreturn]] inline void bad_value(const std::string& key, const std::string& msg) { throw ConfigError(key, 0, 0, msg); }

inline double need_double(const std::string& key, const std::string& v) {
    const auto d = parse_double(v);
    if (!d || !std::isfinite(*d)) bad_value(key, "expected a finite number, got '" + v + "'");
    return *d;
}

inline long long need_int(const std::string& key, const std::string& v) {
    long long x = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) bad_value(key, "expected an integer, got '" + v + "'");
    return x;
}

template <class E>
E need_choice(const std::string& key, const std::string& v, const std::vector<std::pair<std::string, E>>& choices) {
    for (const auto& [name, e] : choices)
        if (name == v) return e;
    std::string list;
    for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c.first;
    bad_value(key, "expected one of {" + list + "}, got '" + v + "'");
}

template <class E>
std::string choice_name(E e, const std::vector<std::pair<std::string, E>>& choices) {
    for (const auto& [name, x] : choices)
        if (x == e) return name;
    return "?";
}

inline const std::vector<std::pair<std::string, ModuleKind>> kModules = {{"radial", ModuleKind::Radial},
                                                                        {"grid2d", ModuleKind::Grid2D}};
inline const std::vector<std::pair<std::string, DatumKind>> kDatums = {
    {"hyperboloid", DatumKind::Hyperboloid}, {"cone-smooth", DatumKind::ConeSmooth}, {"file", DatumKind::File}};
inline const std::vector<std::pair<std::string, FarFieldKind>> kBcs = {{"neumann", FarFieldKind::NeumannConeSlope},
                                                                      {"dirichlet", FarFieldKind::DirichletShift}};
inline const std::vector<std::pair<std::string, TimeScheme>> kSchemes = {{"sdirk2", TimeScheme::Sdirk2},
                                                                        {"backward-euler", TimeScheme::BackwardEuler}};

inline std::string quote_if_needed(const std::string& s) {
    if (s.empty() || s.find_first_of(" \t#\"") != std::string::npos) {
        std::string q = "\"";
        for (char c : s) {
            if (c == '"' || c == '\\') q += '\\';
            q += c;
        }
        return q + "\"";
    }
    return s;
}

#define IMCF_DOUBLE_KEY(name, field)                                                           \
    {name,                                                                                     \
     {[](RunConfig& c, const std::string& v) { c.field = need_double(name, v); },             \
      [](const RunConfig& c) { return format_double_exact(c.field); }}}

/// Registry of every configuration key, in canonical output order.
inline const std::vector<std::pair<std::string, KeyHandler>>& key_registry() {
    static const std::vector<std::pair<std::string, KeyHandler>> reg = {
        {"problem.module",
         {[](RunConfig& c, const std::string& v) { c.module = need_choice("problem.module", v, kModules); },
          [](const RunConfig& c) { return choice_name(c.module, kModules); }}},
        {"problem.n",
         {[](RunConfig& c, const std::string& v) { c.n = static_cast<int>(need_int("problem.n", v)); },
          [](const RunConfig& c) { return std::to_string(c.n); }}},
        IMCF_DOUBLE_KEY("problem.alpha0", alpha0),
        IMCF_DOUBLE_KEY("problem.kappa", kappa),
        {"problem.datum",
         {[](RunConfig& c, const std::string& v) { c.datum = need_choice("problem.datum", v, kDatums); },
          [](const RunConfig& c) { return choice_name(c.datum, kDatums); }}},
        {"problem.datum_file",
         {[](RunConfig& c, const std::string& v) { c.datum_file = v; },
          [](const RunConfig& c) { return quote_if_needed(c.datum_file); }}},
        IMCF_DOUBLE_KEY("problem.anisotropy", anisotropy),
        IMCF_DOUBLE_KEY("grid.R", R),
        {"grid.nodes",
         {[](RunConfig& c, const std::string& v) {
              const auto x = need_int("grid.nodes", v);
              if (x < 3) bad_value("grid.nodes", "must be >= 3");
              c.nodes = static_cast<std::size_t>(x);
          },
          [](const RunConfig& c) { return std::to_string(c.nodes); }}},
        IMCF_DOUBLE_KEY("grid.stretch", stretch),
        IMCF_DOUBLE_KEY("grid.L", L),
        {"grid.m",
         {[](RunConfig& c, const std::string& v) {
              const auto x = need_int("grid.m", v);
              if (x < 4) bad_value("grid.m", "must be >= 4");
              c.m = static_cast<std::size_t>(x);
          },
          [](const RunConfig& c) { return std::to_string(c.m); }}},
        IMCF_DOUBLE_KEY("solver.dt", solver.dt),
        IMCF_DOUBLE_KEY("solver.newton_tol", solver.newton_tol),
        {"solver.newton_max_iter",
         {[](RunConfig& c, const std::string& v) {
              c.solver.newton_max_iter = static_cast<int>(need_int("solver.newton_max_iter", v));
          },
          [](const RunConfig& c) { return std::to_string(c.solver.newton_max_iter); }}},
        IMCF_DOUBLE_KEY("solver.H_min", solver.H_min),
        {"solver.bc",
         {[](RunConfig& c, const std::string& v) { c.solver.bc = need_choice("solver.bc", v, kBcs); },
          [](const RunConfig& c) { return choice_name(c.solver.bc, kBcs); }}},
        IMCF_DOUBLE_KEY("solver.flat_eps", solver.flat_eps),
        {"solver.scheme",
         {[](RunConfig& c, const std::string& v) { c.solver.scheme = need_choice("solver.scheme", v, kSchemes); },
          [](const RunConfig& c) { return choice_name(c.solver.scheme, kSchemes); }}},
        IMCF_DOUBLE_KEY("run.t_end", t_end),
        {"run.sample_every",
         {[](RunConfig& c, const std::string& v) {
              const auto x = need_int("run.sample_every", v);
              if (x < 1) bad_value("run.sample_every", "must be >= 1");
              c.solver.sample_every = static_cast<std::size_t>(x);
          },
          [](const RunConfig& c) { return std::to_string(c.solver.sample_every); }}},
        {"run.seed",
         {[](RunConfig& c, const std::string& v) {
              const auto x = need_int("run.seed", v);
              if (x < 0) bad_value("run.seed", "must be >= 0");
              c.seed = static_cast<std::uint64_t>(x);
          },
          [](const RunConfig& c) { return std::to_string(c.seed); }}},
        {"output.csv",
         {[](RunConfig& c, const std::string& v) { c.output_csv = v; },
          [](const RunConfig& c) { return quote_if_needed(c.output_csv); }}},
        {"output.snapshot",
         {[](RunConfig& c, const std::string& v) { c.output_snapshot = v; },
          [](const RunConfig& c) { return quote_if_needed(c.output_snapshot); }}},
    };
    return reg;
}

#undef IMCF_DOUBLE_KEY

inline const KeyHandler* find_key(std::string_view key) {
    for (const auto& [name, h] : key_registry())
        if (name == key) return &h;
    return nullptr;
}

/// Keys without defaults; a config must set them.
inline const std::vector<std::string> kRequiredKeys = {"problem.n", "problem.alpha0", "problem.kappa",
                                                       "problem.datum"};

}  // namespace detail

/// Semantic checks; errors name the offending key.
inline void validate(const RunConfig& c) {
    auto fail = [](const std::string& key, const std::string& msg) { throw ConfigError(key, 0, 0, msg); };
    if (c.n < 2) fail("problem.n", "must be >= 2");
    if (c.module == ModuleKind::Grid2D && c.n != 2) fail("problem.n", "the Cartesian lattice requires n = 2");
    if (!(c.alpha0 > 0.0)) fail("problem.alpha0", "must be positive");
    if (!(c.kappa >= 0.0)) fail("problem.kappa", "must be >= 0");
    if (c.datum == DatumKind::File && c.datum_file.empty()) fail("problem.datum_file", "required for datum = file");
    if (c.module == ModuleKind::Grid2D && c.datum != DatumKind::Hyperboloid)
        fail("problem.datum", "the Cartesian lattice supports datum = hyperboloid only");
    if (c.module == ModuleKind::Grid2D && !(std::abs(c.anisotropy) < c.kappa * c.kappa))
        fail("problem.anisotropy", "must satisfy |anisotropy| < kappa^2");
    if (c.module == ModuleKind::Radial && c.anisotropy != 0.0)
        fail("problem.anisotropy", "only used by the grid2d module");
    if (!(c.R > 0.0)) fail("grid.R", "must be positive");
    if (!(c.stretch >= 0.0)) fail("grid.stretch", "must be >= 0");
    if (!(c.L > 0.0)) fail("grid.L", "must be positive");
    if (!(c.solver.dt > 0.0)) fail("solver.dt", "must be positive");
    if (!(c.solver.newton_tol > 0.0)) fail("solver.newton_tol", "must be positive");
    if (c.solver.newton_max_iter < 1) fail("solver.newton_max_iter", "must be >= 1");
    if (!(c.solver.H_min > 0.0)) fail("solver.H_min", "must be positive");
    if (!(c.solver.flat_eps > 0.0)) fail("solver.flat_eps", "must be positive");
    if (c.t_end < 0.0) fail("run.t_end", "must be >= 0 (0 runs until the profile flattens)");
}

/// Assign one key from its textual value (same rules as the file grammar).
inline void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
    const auto* h = detail::find_key(key);
    if (!h) throw ConfigError(key, 0, 0, "unknown key");
    h->set(c, value);
}

inline std::string get_config_value(const RunConfig& c, const std::string& key) {
    const auto* h = detail::find_key(key);
    if (!h) throw ConfigError(key, 0, 0, "unknown key");
    return h->get(c);
}

inline RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    std::map<std::string, std::size_t> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        const std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        // strip comments outside quotes
        std::string body;
        bool in_quote = false;
        std::size_t quote_col = 0;
        for (std::size_t k = 0; k < line.size(); ++k) {
            const char ch = line[k];
            if (in_quote && ch == '\\' && k + 1 < line.size()) {
                body += ch;
                body += line[++k];
                continue;
            }
            if (ch == '"') {
                in_quote = !in_quote;
                quote_col = k + 1;
            }
            if (ch == '#' && !in_quote) break;
            body += ch;
        }
        if (in_quote) throw ConfigError("", line_no, quote_col, "unterminated quoted value");
        if (detail::trim(body).empty()) continue;

        const auto eq = body.find('=');
        const std::size_t key_col = body.find_first_not_of(" \t") + 1;
        if (eq == std::string::npos) throw ConfigError("", line_no, key_col, "expected 'section.key = value'");
        const std::string key = detail::trim(std::string_view(body).substr(0, eq));
        std::string value = detail::trim(std::string_view(body).substr(eq + 1));
        const std::size_t value_col = body.find_first_not_of(" \t", eq + 1) + 1;
        if (key.empty()) throw ConfigError("", line_no, key_col, "missing key before '='");
        if (key.find('.') == std::string::npos || key.find_first_of(" \t") != std::string::npos)
            throw ConfigError(key, line_no, key_col, "keys have the form section.key");
        const auto* h = detail::find_key(key);
        if (!h) throw ConfigError(key, line_no, key_col, "unknown key");
        if (auto it = seen.find(key); it != seen.end())
            throw ConfigError(key, line_no, key_col, "duplicate key (first set on line " + std::to_string(it->second) + ")");
        seen[key] = line_no;
        if (value.empty()) throw ConfigError(key, line_no, eq + 2, "missing value");
        if (value.front() == '"') {
            if (value.size() < 2 || value.back() != '"')
                throw ConfigError(key, line_no, value_col, "text after the closing quote");
            std::string unq;
            for (std::size_t k = 1; k + 1 < value.size(); ++k) {
                if (value[k] == '\\' && k + 2 < value.size()) ++k;
                unq += value[k];
            }
            value = unq;
        }
        try {
            h->set(cfg, value);
        } catch (const ConfigError& e) {
            throw ConfigError(key, line_no, value_col, e.message);
        }
    }
    for (const auto& k : detail::kRequiredKeys)
        if (!seen.count(k)) throw ConfigError(k, 0, 0, "required key is missing");
    try {
        validate(cfg);
    } catch (const ConfigError& e) {
        auto it = seen.find(e.key);
        const std::size_t line = it == seen.end() ? 0 : it->second;
        throw ConfigError(e.key, line, line ? 1 : 0, e.message);
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", 0, 0, "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// Canonical text: every key, registry order. parse_config(to_text(c)) == c.
inline std::string to_text(const RunConfig& c) {
    std::string out;
    for (const auto& [name, h] : detail::key_registry()) out += name + " = " + h.get(c) + "\n";
    return out;
}

/// 64-bit FNV-1a of the canonical problem.*, grid.* and solver.* lines, as 16
/// hex digits. run.* and output.* keys are left out so a snapshot can be
/// resumed with a later end time or different output paths.
inline std::string config_hash(const RunConfig& c) {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& [name, k] : detail::key_registry()) {
        if (name.starts_with("run.") || name.starts_with("output.")) continue;
        for (unsigned char ch : name + " = " + k.get(c) + "\n") {
            h ^= ch;
            h *= 1099511628211ull;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Problem setup from a configuration

inline ConeFamily cone_of(const RunConfig& c) { return ConeFamily{c.n, c.alpha0, c.kappa}; }

inline RadialGrid radial_grid_of(const RunConfig& c) { return RadialGrid::stretched(c.R, c.nodes, c.n, c.stretch); }

/// Two-column CSV (header r,u) of a radial datum.
inline std::vector<std::array<double, 2>> read_radial_datum(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open datum file '" + path + "'");
    std::string line;
    std::vector<std::array<double, 2>> pts;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line == "r,u") continue;
        const auto comma = line.find(',');
        const auto r = comma == std::string::npos ? std::nullopt : parse_double(line.substr(0, comma));
        const auto u = comma == std::string::npos ? std::nullopt : parse_double(line.substr(comma + 1));
        if (!r || !u) throw DomainError("datum file line " + std::to_string(line_no) + ": expected 'r,u'");
        if (!pts.empty() && !(*r > pts.back()[0]))
            throw DomainError("datum file line " + std::to_string(line_no) + ": radii must increase");
        pts.push_back({*r, *u});
    }
    if (pts.size() < 2) throw DomainError("datum file needs at least two points");
    return pts;
}

inline std::vector<double> radial_datum(const RunConfig& c, const RadialGrid& g) {
    switch (c.datum) {
        case DatumKind::Hyperboloid: return hyperboloid_datum(g, c.alpha0, c.kappa);
        case DatumKind::ConeSmooth: return smooth_cone_datum(g, c.alpha0, c.kappa);
        case DatumKind::File: {
            const auto pts = read_radial_datum(c.datum_file);
            if (pts.front()[0] > 0.0 || pts.back()[0] < g.R())
                throw DomainError("datum file does not cover [0, R]");
            return g.sample([&](double r) {
                auto it = std::upper_bound(pts.begin(), pts.end(), r,
                                           [](double x, const std::array<double, 2>& p) { return x < p[0]; });
                if (it == pts.end()) return pts.back()[1];
                const auto& b = *it;
                const auto& a = *(it - 1);
                return a[1] + (b[1] - a[1]) * (r - a[0]) / (b[0] - a[0]);
            });
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// Snapshots

inline constexpr int kSnapshotVersion = 1;

struct Snapshot {
    int format_version = kSnapshotVersion;
    ModuleKind module = ModuleKind::Radial;
    int n = 2;
    std::vector<double> nodes;  ///< radial nodes (radial module)
    double L = 0.0;             ///< lattice half-width (grid2d)
    std::size_t m = 0;
    std::vector<double> u;
    double t = 0.0;
    double u_far0 = 0.0;
    std::size_t steps = 0;
    std::string config_hash;
    std::string config_text;
};

inline Snapshot make_snapshot(const RadialSim& sim, const RunConfig& cfg) {
    Snapshot s;
    s.module = ModuleKind::Radial;
    s.n = sim.grid().n();
    s.nodes = sim.grid().nodes();
    s.u = sim.u();
    s.t = sim.t();
    s.u_far0 = sim.u_far0;
    s.steps = sim.steps;
    s.config_hash = config_hash(cfg);
    s.config_text = to_text(cfg);
    return s;
}

inline Snapshot make_snapshot(const Sim2D& sim, const RunConfig& cfg) {
    Snapshot s;
    s.module = ModuleKind::Grid2D;
    s.n = 2;
    s.L = sim.state.L;
    s.m = sim.state.m;
    s.u = sim.state.u;
    s.t = sim.t();
    s.steps = sim.steps;
    s.config_hash = config_hash(cfg);
    s.config_text = to_text(cfg);
    return s;
}

inline std::string snapshot_to_json(const Snapshot& s) {
    nlohmann::json j;
    j["format_version"] = s.format_version;
    j["module"] = s.module == ModuleKind::Radial ? "radial" : "grid2d";
    if (s.module == ModuleKind::Radial)
        j["grid"] = {{"kind", "radial"}, {"n", s.n}, {"nodes", s.nodes}};
    else
        j["grid"] = {{"kind", "lattice"}, {"n", 2}, {"L", s.L}, {"m", s.m}};
    j["t"] = s.t;
    j["u"] = s.u;
    j["u_far0"] = s.u_far0;
    j["steps"] = s.steps;
    j["config_hash"] = s.config_hash;
    j["config"] = s.config_text;
    return j.dump(1) + "\n";
}

inline Snapshot snapshot_from_json(const std::string& text) {
    Snapshot s;
    try {
        const auto j = nlohmann::json::parse(text);
        s.format_version = j.at("format_version").get<int>();
        if (s.format_version != kSnapshotVersion)
            throw DomainError("unsupported snapshot format version " + std::to_string(s.format_version));
        const auto module = j.at("module").get<std::string>();
        if (module == "radial") {
            s.module = ModuleKind::Radial;
            s.n = j.at("grid").at("n").get<int>();
            s.nodes = j.at("grid").at("nodes").get<std::vector<double>>();
        } else if (module == "grid2d") {
            s.module = ModuleKind::Grid2D;
            s.L = j.at("grid").at("L").get<double>();
            s.m = j.at("grid").at("m").get<std::size_t>();
        } else {
            throw DomainError("unknown snapshot module '" + module + "'");
        }
        s.t = j.at("t").get<double>();
        s.u = j.at("u").get<std::vector<double>>();
        s.u_far0 = j.at("u_far0").get<double>();
        s.steps = j.at("steps").get<std::size_t>();
        s.config_hash = j.at("config_hash").get<std::string>();
        s.config_text = j.at("config").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("malformed snapshot: ") + e.what());
    }
    return s;
}

inline void save_snapshot(const std::string& path, const Snapshot& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot write snapshot '" + path + "'");
    out << snapshot_to_json(s);
}

inline Snapshot load_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot open snapshot '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return snapshot_from_json(ss.str());
}

/// Rebuilds a radial simulation from a snapshot without re-validating the
/// datum, so a restarted run continues exactly where the saved one stopped.
inline RadialSim resume_radial(const Snapshot& s, const RunConfig& cfg) {
    if (s.module != ModuleKind::Radial) throw DomainError("snapshot does not hold a radial state");
    if (s.config_hash != config_hash(cfg)) throw DomainError("snapshot was written with a different configuration");
    RadialSim sim;
    sim.profile = RadialProfile{RadialGrid(s.nodes, s.n), s.u, s.t};
    sim.cone = cone_of(cfg);
    sim.config = cfg.solver;
    sim.u_far0 = s.u_far0;
    sim.steps = s.steps;
    const auto f = compute_fields_radial(sim.profile);
    sim.c0 = std::numeric_limits<double>::infinity();
    sim.C0 = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.size(); ++i) {
        sim.c0 = std::min(sim.c0, f.H[i] * f.u[i]);
        sim.C0 = std::max(sim.C0, f.H[i] * f.u[i]);
    }
    sim.history.push_back(diagnostics_row(f, sim.cone, sim.grid().R(), sim.diag));
    sim.flat_track.push_back({sim.t(), flat_sup_radial(sim.profile)});
    return sim;
}

inline GraphState2D lattice_datum(const RunConfig& c) {
    if (c.datum != DatumKind::Hyperboloid) throw ConfigError("problem.datum", 0, 0, "grid2d supports hyperboloid only");
    return anisotropic_lattice(c.L, c.m, c.alpha0, c.kappa, c.anisotropy);
}

// ---------------------------------------------------------------------------
// Radial trajectory CSV (t,r,u,H,v,omega_nu)

inline const std::vector<std::string> kRadialColumns = {"t", "r", "u", "H", "v", "omega_nu"};

inline void write_radial_rows(CsvWriter& w, const RadialProfile& p) {
    const auto f = compute_fields_radial(p);
    for (std::size_t i = 0; i < f.size(); ++i) w.row({p.t, f.x[i][0], f.u[i], f.H[i], f.v[i], f.omega_nu[i]});
}

/// Reads a long-format trajectory back into time-ordered profiles on a shared grid.
inline std::vector<RadialProfile> read_radial_trajectory(std::istream& in, int n) {
    std::string line;
    if (!std::getline(in, line)) throw DomainError("trajectory file is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header;
    {
        std::stringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) header.push_back(cell);
    }
    auto col = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DomainError("trajectory file lacks the column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t ct = col("t"), cr = col("r"), cu = col("u");

    std::vector<double> times;
    std::vector<std::vector<double>> rs, us;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            const auto v = parse_double(cell);
            if (!v) throw DomainError("trajectory line " + std::to_string(line_no) + ": bad number '" + cell + "'");
            cells.push_back(*v);
        }
        if (cells.size() != header.size())
            throw DomainError("trajectory line " + std::to_string(line_no) + ": wrong number of columns");
        if (times.empty() || cells[ct] != times.back()) {
            if (!times.empty() && !(cells[ct] > times.back()))
                throw DomainError("trajectory line " + std::to_string(line_no) + ": times must increase");
            times.push_back(cells[ct]);
            rs.emplace_back();
            us.emplace_back();
        }
        rs.back().push_back(cells[cr]);
        us.back().push_back(cells[cu]);
    }
    if (times.empty()) throw DomainError("trajectory file has no data rows");
    const RadialGrid grid(rs.front(), n);
    std::vector<RadialProfile> out;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (rs[k] != rs.front()) throw DomainError("trajectory snapshots use different radial grids");
        out.push_back(RadialProfile{grid, us[k], times[k]});
    }
    return out;
}

/// Diagnostics rows rebuilt from stored profiles (descent from consecutive states).
inline std::vector<DiagnosticsRow> rows_from_profiles(const std::vector<RadialProfile>& traj, const ConeFamily& cone,
                                                      const DiagnosticsSettings& settings = {}) {
    std::vector<DiagnosticsRow> rows;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        auto row = diagnostics_row(compute_fields_radial(traj[k]), cone, traj[k].grid.R(), settings);
        if (k > 0) {
            double d = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < traj[k].u.size(); ++i) d = std::max(d, traj[k].u[i] - traj[k - 1].u[i]);
            row.max_descent = d;
        }
        rows.push_back(row);
    }
    return rows;
}

inline const std::vector<std::string> kLatticeColumns = {"t", "x1", "x2", "u", "H", "v"};

inline void write_lattice_rows(CsvWriter& w, const GraphState2D& s) {
    const auto f = compute_fields_2d(s);
    for (std::size_t k = 0; k < f.size(); ++k) w.row({s.t, f.x[k][0], f.x[k][1], f.u[k], f.H[k], f.v[k]});
}

}  // namespace imcf
