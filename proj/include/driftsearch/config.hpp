// Scenario description and its key=value text format.
//
//   # comment
//   [section]
//   key = value
//
// Sections [splash] and [reported_area] may repeat; every other section
// appears at most once. Unknown sections or keys are rejected with the line
// number. Lists use commas; polygons are "x y; x y; ...".
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "driftsearch/detection.hpp"
#include "driftsearch/domain_grid.hpp"
#include "driftsearch/errors.hpp"
#include "driftsearch/flow.hpp"
#include "driftsearch/geometry.hpp"

namespace driftsearch {

enum class Controller { Mdsmc, Dsmc, LawnmowerReported, LawnmowerDrifted };

inline const char* to_string(Controller c) {
    switch (c) {
        case Controller::Mdsmc: return "mdsmc";
        case Controller::Dsmc: return "dsmc";
        case Controller::LawnmowerReported: return "lawnmower_reported";
        case Controller::LawnmowerDrifted: return "lawnmower_drifted";
    }
    return "?";
}

inline std::optional<Controller> controller_from_string(std::string_view s) {
    for (Controller c : {Controller::Mdsmc, Controller::Dsmc, Controller::LawnmowerReported,
                         Controller::LawnmowerDrifted})
        if (s == to_string(c)) return c;
    return std::nullopt;
}

// Defaults taken from the reference search operation.
inline constexpr double kDefaultSpeedKmh = 380.0;
inline constexpr double kDefaultSigmaKm = 3.0;
inline constexpr double kDefaultBetaMdsmc = -0.5;
inline constexpr double kDefaultBetaDsmc = -1.5;

struct FlowConfig {
    std::string type = "zero";  // zero | uniform | rotation | saddle | double_gyre | gridded
    double u_kmh = 0.0, v_kmh = 0.0;
    double center_x = 0.0, center_y = 0.0;
    double rate_per_hour = 0.0;  // rotation omega or saddle lambda
    double peak_speed_kmh = 0.0, epsilon = 0.0, period_hours = 0.0;
    std::string file;

    friend bool operator==(const FlowConfig&, const FlowConfig&) = default;
};

struct SplashConfig {
    Polygon polygon;
    double t0_hours = 0.0;
    friend bool operator==(const SplashConfig&, const SplashConfig&) = default;
};

struct ScheduleConfig {
    int first_day = 0;                 // days after day 0 of the time axis
    double window_start_hour = 14.0;   // UTC hour of day
    double window_end_hour = 17.0;
    std::vector<int> agents;           // one entry per search day
    friend bool operator==(const ScheduleConfig&, const ScheduleConfig&) = default;
};

struct ReportedArea {
    int day = 0;  // index into the schedule
    Polygon polygon;
    friend bool operator==(const ReportedArea&, const ReportedArea&) = default;
};

struct HypergraphConfig {
    double t1_hours = 0.0, t2_hours = 288.0, stencil_km = 0.5;
    int nx = 128, ny = 64;
    friend bool operator==(const HypergraphConfig&, const HypergraphConfig&) = default;
};

struct ScenarioConfig {
    Domain domain{0.0, 600.0, 0.0, 300.0};
    FlowConfig flow;
    std::vector<SplashConfig> splash;
    ScheduleConfig schedule;
    std::vector<ReportedArea> reported_areas;

    Controller controller = Controller::Mdsmc;
    double speed_kmh = kDefaultSpeedKmh;
    double sigma_km = kDefaultSigmaKm;
    double dt_seconds = 60.0;
    double lawnmower_spacing_km = 3.0;
    double alpha_window_hours = 1.0;
    double beta_mdsmc = kDefaultBetaMdsmc;
    double beta_dsmc = kDefaultBetaDsmc;
    int modes = 32;
    // Converts agent-hours per km^2 into dimensionless search effort for the
    // Koopman formulas. 0 selects the sweep rate 2 * radius * speed.
    double effort_scale_km2_per_hour = 0.0;

    DetectionModel detection;

    int grid_nx = 128, grid_ny = 128;
    double bandwidth_km = 3.0;

    int n_tracers = 10000;
    int n_targets = 1000;
    int n_runs = 100;
    std::uint64_t seed = 1;
    double start_delay_days = 0.0;
    double tolerance_km = 1e-6;
    double merge_radius_sigma = 0.25;

    HypergraphConfig hypergraph;
    std::vector<double> drift_times_hours;
    std::vector<double> delayed_offsets_days{0.0, 5.0, 10.0};

    GridSpec grid() const { return {domain, grid_nx, grid_ny}; }
    double dt_hours() const { return dt_seconds / 3600.0; }
    int search_days() const { return static_cast<int>(schedule.agents.size()); }
    double window_start(int day) const {
        return 24.0 * (schedule.first_day + start_delay_days + day) + schedule.window_start_hour;
    }
    double window_end(int day) const {
        return 24.0 * (schedule.first_day + start_delay_days + day) + schedule.window_end_hour;
    }
    double beta() const { return controller == Controller::Dsmc ? beta_dsmc : beta_mdsmc; }
    double effort_scale() const {
        return effort_scale_km2_per_hour > 0.0 ? effort_scale_km2_per_hour
                                               : 2.0 * detection.radius_km * speed_kmh;
    }

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) throw ConfigError("expected a finite number, got '" + s + "'");
    return v;
}

template <class Int>
Int parse_int(const std::string& s) {
    Int v{};
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw ConfigError("expected an integer, got '" + s + "'");
    return v;
}

template <class T, class F>
std::vector<T> parse_list(const std::string& s, F parse_one) {
    std::vector<T> out;
    if (trim(s).empty()) return out;
    for (const auto& item : split(s, ',')) out.push_back(parse_one(item));
    return out;
}

inline Polygon parse_polygon(const std::string& s) {
    Polygon poly;
    for (const auto& pair : split(s, ';')) {
        if (pair.empty()) continue;
        std::istringstream is(pair);
        std::string xs, ys, extra;
        if (!(is >> xs >> ys) || (is >> extra)) throw ConfigError("polygon vertex must be 'x y', got '" + pair + "'");
        poly.push_back({parse_double(xs), parse_double(ys)});
    }
    if (poly.empty()) throw ConfigError("polygon has no vertices");
    return poly;
}

inline std::string fmt_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline std::string fmt_polygon(const Polygon& p) {
    std::string out;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (k) out += "; ";
        out += fmt_double(p[k].x) + " " + fmt_double(p[k].y);
    }
    return out;
}

template <class T, class F>
std::string fmt_list(const std::vector<T>& v, F fmt_one) {
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) out += ", ";
        out += fmt_one(v[k]);
    }
    return out;
}

using Setter = std::function<void(ScenarioConfig&, const std::string&)>;


inline const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto dbl = [&t](const std::string& key, auto member) {
            t[key] = [member](ScenarioConfig& c, const std::string& v) { member(c) = parse_double(v); };
        };
        auto integer = [&t](const std::string& key, auto member) {
            t[key] = [member](ScenarioConfig& c, const std::string& v) { member(c) = parse_int<int>(v); };
        };
        auto set_domain = [&t](const std::string& key, int which) {
            t[key] = [which, key](ScenarioConfig& c, const std::string& v) {
                double b[4] = {c.domain.x_min(), c.domain.x_max(), c.domain.y_min(), c.domain.y_max()};
                b[which] = parse_double(v);
                // Bounds may be set in any order; validate the box once complete.
                if (b[1] > b[0] && b[3] > b[2]) c.domain = Domain(b[0], b[1], b[2], b[3]);
                else throw ConfigError("domain bounds inconsistent after setting '" + key + "'");
            };
        };
        set_domain("domain.x_min", 0);
        set_domain("domain.x_max", 1);
        set_domain("domain.y_min", 2);
        set_domain("domain.y_max", 3);

        t["flow.type"] = [](ScenarioConfig& c, const std::string& v) {
            static const char* kinds[] = {"zero", "uniform", "rotation", "saddle", "double_gyre", "gridded"};
            for (const char* k : kinds)
                if (v == k) {
                    c.flow.type = v;
                    return;
                }
            throw ConfigError("unknown flow type '" + v + "'");
        };
        dbl("flow.u_kmh", [](ScenarioConfig& c) -> double& { return c.flow.u_kmh; });
        dbl("flow.v_kmh", [](ScenarioConfig& c) -> double& { return c.flow.v_kmh; });
        dbl("flow.center_x", [](ScenarioConfig& c) -> double& { return c.flow.center_x; });
        dbl("flow.center_y", [](ScenarioConfig& c) -> double& { return c.flow.center_y; });
        dbl("flow.rate_per_hour", [](ScenarioConfig& c) -> double& { return c.flow.rate_per_hour; });
        dbl("flow.peak_speed_kmh", [](ScenarioConfig& c) -> double& { return c.flow.peak_speed_kmh; });
        dbl("flow.epsilon", [](ScenarioConfig& c) -> double& { return c.flow.epsilon; });
        dbl("flow.period_hours", [](ScenarioConfig& c) -> double& { return c.flow.period_hours; });
        t["flow.file"] = [](ScenarioConfig& c, const std::string& v) { c.flow.file = v; };

        t["splash.polygon"] = [](ScenarioConfig& c, const std::string& v) { c.splash.back().polygon = parse_polygon(v); };
        t["splash.t0_hours"] = [](ScenarioConfig& c, const std::string& v) { c.splash.back().t0_hours = parse_double(v); };

        integer("schedule.first_day", [](ScenarioConfig& c) -> int& { return c.schedule.first_day; });
        dbl("schedule.window_start_hour", [](ScenarioConfig& c) -> double& { return c.schedule.window_start_hour; });
        dbl("schedule.window_end_hour", [](ScenarioConfig& c) -> double& { return c.schedule.window_end_hour; });
        t["schedule.agents"] = [](ScenarioConfig& c, const std::string& v) {
            c.schedule.agents = parse_list<int>(v, [](const std::string& s) { return parse_int<int>(s); });
        };

        t["reported_area.day"] = [](ScenarioConfig& c, const std::string& v) {
            c.reported_areas.back().day = parse_int<int>(v);
        };
        t["reported_area.polygon"] = [](ScenarioConfig& c, const std::string& v) {
            c.reported_areas.back().polygon = parse_polygon(v);
        };

        t["search.controller"] = [](ScenarioConfig& c, const std::string& v) {
            auto ctl = controller_from_string(v);
            if (!ctl) throw ConfigError("unknown controller '" + v + "'");
            c.controller = *ctl;
        };
        dbl("search.speed_kmh", [](ScenarioConfig& c) -> double& { return c.speed_kmh; });
        dbl("search.sigma_km", [](ScenarioConfig& c) -> double& { return c.sigma_km; });
        dbl("search.dt_seconds", [](ScenarioConfig& c) -> double& { return c.dt_seconds; });
        dbl("search.lawnmower_spacing_km", [](ScenarioConfig& c) -> double& { return c.lawnmower_spacing_km; });
        dbl("search.alpha_window_hours", [](ScenarioConfig& c) -> double& { return c.alpha_window_hours; });
        dbl("search.beta_mdsmc", [](ScenarioConfig& c) -> double& { return c.beta_mdsmc; });
        dbl("search.beta_dsmc", [](ScenarioConfig& c) -> double& { return c.beta_dsmc; });
        integer("search.modes", [](ScenarioConfig& c) -> int& { return c.modes; });
        dbl("search.effort_scale_km2_per_hour",
            [](ScenarioConfig& c) -> double& { return c.effort_scale_km2_per_hour; });

        dbl("detection.radius_km", [](ScenarioConfig& c) -> double& { return c.detection.radius_km; });
        dbl("detection.expected_time_s", [](ScenarioConfig& c) -> double& { return c.detection.expected_time_s; });

        integer("grid.nx", [](ScenarioConfig& c) -> int& { return c.grid_nx; });
        integer("grid.ny", [](ScenarioConfig& c) -> int& { return c.grid_ny; });
        dbl("grid.bandwidth_km", [](ScenarioConfig& c) -> double& { return c.bandwidth_km; });

        integer("run.n_tracers", [](ScenarioConfig& c) -> int& { return c.n_tracers; });
        integer("run.n_targets", [](ScenarioConfig& c) -> int& { return c.n_targets; });
        integer("run.n_runs", [](ScenarioConfig& c) -> int& { return c.n_runs; });
        t["run.seed"] = [](ScenarioConfig& c, const std::string& v) { c.seed = parse_int<std::uint64_t>(v); };
        dbl("run.start_delay_days", [](ScenarioConfig& c) -> double& { return c.start_delay_days; });
        dbl("run.tolerance_km", [](ScenarioConfig& c) -> double& { return c.tolerance_km; });
        dbl("run.merge_radius_sigma", [](ScenarioConfig& c) -> double& { return c.merge_radius_sigma; });

        dbl("hypergraph.t1_hours", [](ScenarioConfig& c) -> double& { return c.hypergraph.t1_hours; });
        dbl("hypergraph.t2_hours", [](ScenarioConfig& c) -> double& { return c.hypergraph.t2_hours; });
        dbl("hypergraph.stencil_km", [](ScenarioConfig& c) -> double& { return c.hypergraph.stencil_km; });
        integer("hypergraph.nx", [](ScenarioConfig& c) -> int& { return c.hypergraph.nx; });
        integer("hypergraph.ny", [](ScenarioConfig& c) -> int& { return c.hypergraph.ny; });

        t["drift.times_hours"] = [](ScenarioConfig& c, const std::string& v) {
            c.drift_times_hours = parse_list<double>(v, parse_double);
        };
        t["delayed.offsets_days"] = [](ScenarioConfig& c, const std::string& v) {
            c.delayed_offsets_days = parse_list<double>(v, parse_double);
        };
        return t;
    }();
    return table;
}

inline bool is_repeatable(const std::string& section) { return section == "splash" || section == "reported_area"; }

inline bool known_section(const std::string& section) {
    static const char* names[] = {"domain", "flow",   "splash", "schedule", "reported_area", "search", "detection",
                                  "grid",   "run",    "hypergraph", "drift", "delayed"};
    for (const char* n : names)
        if (section == n) return true;
    return false;
}

}  // namespace detail

/// Checks cross-field constraints; throws ConfigError naming the problem.
inline void validate(const ScenarioConfig& c) {
    ensure(c.grid_nx >= 2 && c.grid_ny >= 2, "grid.nx and grid.ny must be >= 2");
    ensure(c.modes >= 1, "search.modes must be >= 1");
    ensure(c.speed_kmh > 0.0, "search.speed_kmh must be positive");
    ensure(c.sigma_km > 0.0, "search.sigma_km must be positive");
    ensure(c.dt_seconds > 0.0, "search.dt_seconds must be positive");
    ensure(c.lawnmower_spacing_km > 0.0, "search.lawnmower_spacing_km must be positive");
    ensure(c.alpha_window_hours >= 0.0, "search.alpha_window_hours must be >= 0");
    ensure(c.beta_mdsmc < 0.0 && c.beta_dsmc < 0.0, "Sobolev indices must be negative");
    ensure(c.effort_scale_km2_per_hour >= 0.0, "search.effort_scale_km2_per_hour must be >= 0");
    c.detection.validate();
    ensure(c.bandwidth_km > 0.0, "grid.bandwidth_km must be positive");
    ensure(c.n_tracers >= 1, "run.n_tracers must be >= 1");
    ensure(c.n_targets >= 1, "run.n_targets must be >= 1");
    ensure(c.n_runs >= 1, "run.n_runs must be >= 1");
    ensure(c.start_delay_days >= 0.0, "run.start_delay_days must be >= 0");
    ensure(c.tolerance_km > 0.0, "run.tolerance_km must be positive");
    ensure(c.merge_radius_sigma >= 0.0, "run.merge_radius_sigma must be >= 0");
    ensure(!c.splash.empty(), "at least one [splash] region is required");
    for (const auto& s : c.splash) {
        ensure(s.polygon.size() >= 3, "splash polygon needs at least 3 vertices");
        ensure(is_convex(s.polygon), "splash polygon must be convex");
    }
    ensure(c.schedule.first_day >= 0, "schedule.first_day must be >= 0");
    ensure(c.schedule.window_start_hour >= 0.0 && c.schedule.window_end_hour <= 24.0 &&
               c.schedule.window_end_hour > c.schedule.window_start_hour,
           "schedule window must satisfy 0 <= start < end <= 24");
    for (int n : c.schedule.agents) ensure(n >= 0, "schedule.agents entries must be >= 0");
    if (c.search_days() > 0)
        for (const auto& s : c.splash)
            ensure(s.t0_hours <= c.window_start(0), "first search window starts before a splash time");
    for (const auto& r : c.reported_areas) {
        ensure(r.day >= 0 && r.day < c.search_days(), "reported_area.day outside the schedule");
        ensure(!r.polygon.empty(), "reported_area polygon is empty");
    }
    const auto& f = c.flow;
    if (f.type == "double_gyre") {
        ensure(f.period_hours > 0.0, "flow.period_hours must be positive for double_gyre");
    } else if (f.type == "gridded") {
        ensure(!f.file.empty(), "flow.file is required for gridded flow");
    }
    ensure(c.hypergraph.t2_hours > c.hypergraph.t1_hours, "hypergraph.t2_hours must exceed t1_hours");
    ensure(c.hypergraph.stencil_km > 0.0, "hypergraph.stencil_km must be positive");
    ensure(c.hypergraph.nx >= 2 && c.hypergraph.ny >= 2, "hypergraph grid must be at least 2x2");
    for (double o : c.delayed_offsets_days) ensure(o >= 0.0, "delayed offsets must be non-negative");
}

/// Parses config text. `origin` prefixes error messages ("file:line: ...").
inline ScenarioConfig parse_config_text(std::string_view text, const std::string& origin = "<config>") {
    ScenarioConfig cfg;
    std::string section;
    std::map<std::string, int> seen_sections;
    double bounds[4] = {cfg.domain.x_min(), cfg.domain.x_max(), cfg.domain.y_min(), cfg.domain.y_max()};
    int line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        auto fail = [&](const std::string& why) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + why);
        };
        const auto hash = raw.find('#');
        const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail("malformed section header '" + line + "'");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (!detail::known_section(section)) fail("unknown section [" + section + "]");
            if (!detail::is_repeatable(section) && seen_sections[section]++ > 0)
                fail("section [" + section + "] appears more than once");
            if (section == "splash") cfg.splash.emplace_back();
            if (section == "reported_area") cfg.reported_areas.emplace_back();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        if (section.empty()) fail("key outside of any section");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (section == "domain") {
            static const char* names[] = {"x_min", "x_max", "y_min", "y_max"};
            const auto pos = std::find(std::begin(names), std::end(names), key);
            if (pos == std::end(names)) fail("unknown key '" + key + "' in [domain]");
            try {
                bounds[pos - std::begin(names)] = detail::parse_double(value);
            } catch (const ConfigError& e) {
                fail(std::string("key '") + key + "': " + e.what());
            }
            continue;
        }
        const auto& table = detail::setters();
        const auto it = table.find(section + "." + key);
        if (it == table.end()) fail("unknown key '" + key + "' in [" + section + "]");
        try {
            it->second(cfg, value);
        } catch (const ConfigError& e) {
            fail(std::string("key '") + key + "': " + e.what());
        }
    }
    try {
        cfg.domain = Domain(bounds[0], bounds[1], bounds[2], bounds[3]);
        validate(cfg);
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

inline ScenarioConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

/// Applies "section.key=value" to a non-repeatable section.
inline void apply_override(ScenarioConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override must be section.key=value: '" + assignment + "'");
    const std::string path = detail::trim(assignment.substr(0, eq));
    const std::string value = detail::trim(assignment.substr(eq + 1));
    const auto dot = path.find('.');
    if (dot == std::string::npos) throw ConfigError("override key must be section.key: '" + path + "'");
    if (detail::is_repeatable(path.substr(0, dot)))
        throw ConfigError("overrides of repeatable section [" + path.substr(0, dot) + "] are not supported");
    const auto& table = detail::setters();
    const auto it = table.find(path);
    if (it == table.end()) throw ConfigError("unknown override key '" + path + "'");
    it->second(cfg, value);
}

/// Canonical text form; parse_config_text(serialize_config(c)) == c.
inline std::string serialize_config(const ScenarioConfig& c) {
    using detail::fmt_double;
    std::ostringstream o;
    auto kv = [&](const char* k, const std::string& v) { o << k << " = " << v << "\n"; };
    o << "[domain]\n";
    kv("x_min", fmt_double(c.domain.x_min()));
    kv("x_max", fmt_double(c.domain.x_max()));
    kv("y_min", fmt_double(c.domain.y_min()));
    kv("y_max", fmt_double(c.domain.y_max()));
    o << "\n[flow]\n";
    kv("type", c.flow.type);
    kv("u_kmh", fmt_double(c.flow.u_kmh));
    kv("v_kmh", fmt_double(c.flow.v_kmh));
    kv("center_x", fmt_double(c.flow.center_x));
    kv("center_y", fmt_double(c.flow.center_y));
    kv("rate_per_hour", fmt_double(c.flow.rate_per_hour));
    kv("peak_speed_kmh", fmt_double(c.flow.peak_speed_kmh));
    kv("epsilon", fmt_double(c.flow.epsilon));
    kv("period_hours", fmt_double(c.flow.period_hours));
    if (!c.flow.file.empty()) kv("file", c.flow.file);
    for (const auto& s : c.splash) {
        o << "\n[splash]\n";
        kv("t0_hours", fmt_double(s.t0_hours));
        kv("polygon", detail::fmt_polygon(s.polygon));
    }
    o << "\n[schedule]\n";
    kv("first_day", std::to_string(c.schedule.first_day));
    kv("window_start_hour", fmt_double(c.schedule.window_start_hour));
    kv("window_end_hour", fmt_double(c.schedule.window_end_hour));
    kv("agents", detail::fmt_list(c.schedule.agents, [](int n) { return std::to_string(n); }));
    for (const auto& r : c.reported_areas) {
        o << "\n[reported_area]\n";
        kv("day", std::to_string(r.day));
        kv("polygon", detail::fmt_polygon(r.polygon));
    }
    o << "\n[search]\n";
    kv("controller", to_string(c.controller));
    kv("speed_kmh", fmt_double(c.speed_kmh));
    kv("sigma_km", fmt_double(c.sigma_km));
    kv("dt_seconds", fmt_double(c.dt_seconds));
    kv("lawnmower_spacing_km", fmt_double(c.lawnmower_spacing_km));
    kv("alpha_window_hours", fmt_double(c.alpha_window_hours));
    kv("beta_mdsmc", fmt_double(c.beta_mdsmc));
    kv("beta_dsmc", fmt_double(c.beta_dsmc));
    kv("modes", std::to_string(c.modes));
    kv("effort_scale_km2_per_hour", fmt_double(c.effort_scale_km2_per_hour));
    o << "\n[detection]\n";
    kv("radius_km", fmt_double(c.detection.radius_km));
    kv("expected_time_s", fmt_double(c.detection.expected_time_s));
    o << "\n[grid]\n";
    kv("nx", std::to_string(c.grid_nx));
    kv("ny", std::to_string(c.grid_ny));
    kv("bandwidth_km", fmt_double(c.bandwidth_km));
    o << "\n[run]\n";
    kv("n_tracers", std::to_string(c.n_tracers));
    kv("n_targets", std::to_string(c.n_targets));
    kv("n_runs", std::to_string(c.n_runs));
    kv("seed", std::to_string(c.seed));
    kv("start_delay_days", fmt_double(c.start_delay_days));
    kv("tolerance_km", fmt_double(c.tolerance_km));
    kv("merge_radius_sigma", fmt_double(c.merge_radius_sigma));
    o << "\n[hypergraph]\n";
    kv("t1_hours", fmt_double(c.hypergraph.t1_hours));
    kv("t2_hours", fmt_double(c.hypergraph.t2_hours));
    kv("stencil_km", fmt_double(c.hypergraph.stencil_km));
    kv("nx", std::to_string(c.hypergraph.nx));
    kv("ny", std::to_string(c.hypergraph.ny));
    o << "\n[drift]\n";
    kv("times_hours", detail::fmt_list(c.drift_times_hours, fmt_double));
    o << "\n[delayed]\n";
    kv("offsets_days", detail::fmt_list(c.delayed_offsets_days, fmt_double));
    return o.str();
}

/// Builds the configured velocity field (unrestricted; callers wrap it in
/// DomainRestricted where tracers must freeze at the domain edge).
inline std::unique_ptr<VelocityField> make_velocity_field(const ScenarioConfig& c) {
    const auto& f = c.flow;
    if (f.type == "zero") return std::make_unique<ZeroFlow>();
    if (f.type == "uniform") return std::make_unique<UniformFlow>(Vec2{f.u_kmh, f.v_kmh});
    if (f.type == "rotation") return std::make_unique<RigidRotation>(Vec2{f.center_x, f.center_y}, f.rate_per_hour);
    if (f.type == "saddle") return std::make_unique<SaddleFlow>(Vec2{f.center_x, f.center_y}, f.rate_per_hour);
    if (f.type == "double_gyre")
        return std::make_unique<DoubleGyre>(c.domain, f.peak_speed_kmh, f.epsilon,
                                            2.0 * std::numbers::pi / f.period_hours);
    if (f.type == "gridded") return std::make_unique<GriddedVelocity>(read_ovf1(f.file));
    throw ConfigError("unknown flow type '" + f.type + "'");
}

}  // namespace driftsearch
