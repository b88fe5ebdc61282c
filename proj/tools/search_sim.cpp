// search_sim: batch front-end for the drift-aware search simulator.
//
//   search_sim simulate   --config c.cfg --out dir [--seed N] [--jobs N] [--set s.k=v]... [--overwrite]
//   search_sim drift      --config c.cfg --out dir
//   search_sim hypergraph --config c.cfg --out dir
//   search_sim delayed    --config c.cfg --out dir
//   search_sim plot       --in dir --out dir
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "driftsearch/config.hpp"
#include "driftsearch/hypergraph.hpp"
#include "driftsearch/io.hpp"
#include "driftsearch/simulation.hpp"
#include "driftsearch/transport.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace driftsearch;

namespace {

struct RunManifest {
    std::string subcommand;
    std::string config_path;
    std::string out_dir;
    std::string in_dir;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    bool overwrite = false;
};

void configure_logging() {
    auto logger = spdlog::stderr_color_mt("search_sim");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    const char* env = std::getenv("SEARCH_SIM_LOG");
    const std::string level = env ? env : "info";
    if (level == "error") spdlog::set_level(spdlog::level::err);
    else if (level == "debug") spdlog::set_level(spdlog::level::debug);
    else spdlog::set_level(spdlog::level::info);
}

void prepare_output_dir(const RunManifest& m) {
    const fs::path out(m.out_dir);
    if (fs::exists(out)) {
        if (!fs::is_directory(out)) throw std::runtime_error(m.out_dir + " exists and is not a directory");
        if (!fs::is_empty(out) && !m.overwrite)
            throw std::runtime_error("output directory " + m.out_dir + " is not empty (use --overwrite)");
    } else {
        fs::create_directories(out);
    }
}

ScenarioConfig load_config(const RunManifest& m) {
    ScenarioConfig cfg = parse_config(m.config_path);
    for (const auto& o : m.overrides) apply_override(cfg, o);
    if (m.seed) cfg.seed = *m.seed;
    validate(cfg);
    return cfg;
}

std::string write_ndjson(const std::vector<json>& records) {
    std::string out;
    for (const auto& r : records) out += r.dump() + '\n';
    return out;
}

json stats_json(const EnsembleStats& s) {
    json j;
    j["n_runs"] = s.finals.size();
    j["mean_final_fraction"] = s.mean_final();
    j["final_fraction_histogram"] = s.histogram;
    j["mean_daily_fraction"] = s.mean_daily;
    j["max_conservation_error"] = s.max_audit_error;
    return j;
}

int cmd_simulate(const RunManifest& m) {
    const ScenarioConfig cfg = load_config(m);
    prepare_output_dir(m);
    spdlog::info("simulate: controller={} runs={} jobs={}", to_string(cfg.controller), cfg.n_runs, m.jobs);
    const PreparedScenario scenario(cfg);
    EpisodeTrace trace;
    const EnsembleStats stats = run_ensemble(scenario, m.jobs, &trace);

    std::string curve = "run_id,t_hours,detected_fraction\n";
    std::string finals = "run_id,final_fraction\n";
    for (const EpisodeResult& e : stats.episodes) {
        for (std::size_t k = 0; k < e.times.size(); ++k)
            curve += std::to_string(e.run_index) + ',' + format_number(e.times[k]) + ',' +
                     format_number(e.fractions[k]) + '\n';
        finals += std::to_string(e.run_index) + ',' + format_number(e.final_fraction) + '\n';
    }
    std::vector<json> traj, det;
    for (const auto& r : trace.trajectories)
        traj.push_back({{"t_hours", r.t_hours}, {"agent_id", r.agent_id}, {"x_km", r.position.x}, {"y_km", r.position.y}});
    for (const auto& d : trace.detections)
        det.push_back({{"t_hours", d.t_hours},
                       {"target_id", d.target_id},
                       {"agent_id", d.agent_id},
                       {"x_km", d.position.x},
                       {"y_km", d.position.y}});

    json summary;
    summary["config"] = serialize_config(cfg);
    summary["stats"] = stats_json(stats);
    summary["mean_curve"] = {{"t_hours", stats.times}, {"detected_fraction", stats.mean_curve}};

    const fs::path out(m.out_dir);
    write_file_atomic(out / "success_curve.csv", curve);
    write_file_atomic(out / "final_rates.csv", finals);
    write_file_atomic(out / "trajectories.ndjson", write_ndjson(traj));
    write_file_atomic(out / "detections.ndjson", write_ndjson(det));
    write_file_atomic(out / "summary.json", summary.dump(2) + '\n');
    spdlog::info("simulate: mean final success {:.4f}", stats.mean_final());
    return 0;
}

int cmd_drift(const RunManifest& m) {
    const ScenarioConfig cfg = load_config(m);
    prepare_output_dir(m);
    ensure(!cfg.drift_times_hours.empty(), "[drift] times_hours is empty");
    const auto raw = make_velocity_field(cfg);
    const DomainRestricted flow(*raw, cfg.domain);
    IntegrationOptions opts;
    opts.tol = cfg.tolerance_km;

    std::vector<SplashRegion> regions;
    for (const auto& s : cfg.splash) regions.emplace_back(s.polygon, s.t0_hours);
    std::vector<TracerEnsemble> ens;
    double total_area = 0.0;
    for (const auto& r : regions) total_area += r.area();
    for (const auto& r : regions) {
        const auto n = static_cast<std::size_t>(
            std::max<long long>(1, std::llround(cfg.n_tracers * r.area() / total_area)));
        ens.push_back(seed_halton(r, n));
    }
    std::vector<double> times = cfg.drift_times_hours;
    std::sort(times.begin(), times.end());
    json index = json::array();
    for (double t : times) {
        TracerEnsemble all;
        all.epoch = t;
        for (auto& e : ens) {
            ensure(t >= e.epoch, "drift time precedes a splash time");
            e = advect(e, flow, t, opts);
            all.positions.insert(all.positions.end(), e.positions.begin(), e.positions.end());
        }
        const DensityEstimate d = density(all, cfg.grid(), cfg.bandwidth_km);
        const std::string tag = "t" + format_number(t);
        write_file_atomic(fs::path(m.out_dir) / ("tracers_" + tag + ".csv"), ensemble_to_csv(all));
        write_file_atomic(fs::path(m.out_dir) / ("density_" + tag + ".csv"), field_to_csv(d.field));
        index.push_back({{"t_hours", t}, {"tracers", "tracers_" + tag + ".csv"}, {"density", "density_" + tag + ".csv"}});
        spdlog::info("drift: t={} h written", t);
    }
    write_file_atomic(fs::path(m.out_dir) / "summary.json", json{{"snapshots", index}}.dump(2) + '\n');
    return 0;
}

int cmd_hypergraph(const RunManifest& m) {
    const ScenarioConfig cfg = load_config(m);
    prepare_output_dir(m);
    const auto raw = make_velocity_field(cfg);
    IntegrationOptions opts;
    opts.tol = cfg.tolerance_km;
    const auto& h = cfg.hypergraph;
    const HypergraphField field = classify(*raw, GridSpec(cfg.domain, h.nx, h.ny), h.t1_hours, h.t2_hours,
                                           h.stencil_km, opts);
    write_file_atomic(fs::path(m.out_dir) / "hypergraph.csv", hypergraph_to_csv(field));
    json summary{{"t1_hours", h.t1_hours},
                 {"t2_hours", h.t2_hours},
                 {"stencil_km", h.stencil_km},
                 {"mesohyperbolic_fraction", field.hyperbolic_fraction()}};
    write_file_atomic(fs::path(m.out_dir) / "summary.json", summary.dump(2) + '\n');
    spdlog::info("hypergraph: mesohyperbolic fraction {:.4f}", field.hyperbolic_fraction());
    return 0;
}

int cmd_delayed(const RunManifest& m) {
    const ScenarioConfig cfg = load_config(m);
    prepare_output_dir(m);
    const auto rows = delayed_start_experiment(cfg, cfg.delayed_offsets_days, m.jobs);
    std::string curves = "offset_days,t_since_window_start_hours,mean_detected_fraction\n";
    std::string deltas = "offset_days,day,mean_daily_fraction,delta_vs_first\n";
    json summary = json::array();
    for (const auto& row : rows) {
        const double t0 = row.stats.times.empty() ? 0.0 : row.stats.times.front();
        for (std::size_t k = 0; k < row.stats.times.size(); ++k)
            curves += format_number(row.offset_days) + ',' + format_number(row.stats.times[k] - t0) + ',' +
                      format_number(row.stats.mean_curve[k]) + '\n';
        for (std::size_t d = 0; d < row.daily_delta.size(); ++d)
            deltas += format_number(row.offset_days) + ',' + std::to_string(d) + ',' +
                      format_number(row.stats.mean_daily[d]) + ',' + format_number(row.daily_delta[d]) + '\n';
        summary.push_back({{"offset_days", row.offset_days}, {"stats", stats_json(row.stats)}});
    }
    write_file_atomic(fs::path(m.out_dir) / "delayed_curves.csv", curves);
    write_file_atomic(fs::path(m.out_dir) / "daily_deltas.csv", deltas);
    write_file_atomic(fs::path(m.out_dir) / "summary.json", json{{"rows", summary}}.dump(2) + '\n');
    return 0;
}

int cmd_plot(const RunManifest& m) {
    ensure(!m.in_dir.empty(), "plot requires --in");
    prepare_output_dir(m);
    const fs::path in(m.in_dir), out(m.out_dir);
    int rendered = 0;
    std::vector<fs::path> entries;
    for (const auto& e : fs::directory_iterator(in)) entries.push_back(e.path());
    std::sort(entries.begin(), entries.end());
    for (const fs::path& p : entries) {
        const std::string name = p.filename().string();
        const std::string stem = p.stem().string();
        if (name == "hypergraph.csv") {
            const CsvTable t = read_csv(p);
            const auto cx = t.column("x_km"), cy = t.column("y_km"), cl = t.column("label");
            std::vector<PointValue> pts;
            for (const auto& r : t.rows) pts.push_back({std::stod(r[cx]), std::stod(r[cy]), r[cl]});
            write_file_atomic(out / (stem + ".svg"),
                              svg_raster(pts, [](const std::string& v) {
                                  return v == "mesohyperbolic" ? kHyperbolicRed : kEllipticBlue;
                              }, "mixing classes (red: mesohyperbolic, blue: mesoelliptic)"));
            ++rendered;
        } else if (name.rfind("density_", 0) == 0 && p.extension() == ".csv") {
            const CsvTable t = read_csv(p);
            const auto cx = t.column("x_km"), cy = t.column("y_km"), cv = t.column("value");
            std::vector<PointValue> pts;
            double vmax = 0.0;
            for (const auto& r : t.rows) {
                pts.push_back({std::stod(r[cx]), std::stod(r[cy]), r[cv]});
                vmax = std::max(vmax, std::stod(r[cv]));
            }
            write_file_atomic(out / (stem + ".svg"),
                              svg_raster(pts, [vmax](const std::string& v) {
                                  return ramp(vmax > 0 ? std::stod(v) / vmax : 0.0);
                              }, stem));
            ++rendered;
        } else if (name == "trajectories.ndjson") {
            std::ifstream f(p);
            std::map<int, std::vector<std::pair<double, double>>> paths;
            std::string line;
            while (std::getline(f, line)) {
                if (line.empty()) continue;
                const json r = json::parse(line);
                paths[r.at("agent_id").get<int>()].emplace_back(r.at("x_km").get<double>(), r.at("y_km").get<double>());
            }
            write_file_atomic(out / "trajectories.svg", svg_paths(paths, "agent trajectories (run 0)"));
            ++rendered;
        } else if (name == "summary.json") {
            std::ifstream f(p);
            const json s = json::parse(f);
            if (!s.contains("mean_curve")) continue;
            const auto t = s["mean_curve"]["t_hours"].get<std::vector<double>>();
            const auto y = s["mean_curve"]["detected_fraction"].get<std::vector<double>>();
            write_file_atomic(out / "success_curve.svg", svg_curves(t, {y}, {"mean detected fraction"},
                                                                    "ensemble mean success rate"));
            ++rendered;
        }
    }
    ensure(rendered > 0, "plot: nothing to render in " + m.in_dir);
    spdlog::info("plot: rendered {} file(s)", rendered);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Drift-aware multi-agent search simulator"};
    app.footer(
        "Defaults: sigma = 3 km, speed = 380 km/h, detection radius = 1.5 km, expected detection time = 2 s,\n"
        "beta_mdsmc = -0.5, beta_dsmc = -1.5, control step = 60 s, lawnmower spacing = 3 km.\n"
        "Environment: SEARCH_SIM_LOG = error | info | debug.");
    app.require_subcommand(1);

    RunManifest m;
    auto add_common = [&m](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", m.config_path, "scenario config file");
        if (needs_config) c->required()->check(CLI::ExistingFile);
        sub->add_option("--out", m.out_dir, "output directory")->required();
        sub->add_option("--seed", m.seed, "override the config seed");
        sub->add_option("--jobs", m.jobs, "concurrent episodes")->check(CLI::PositiveNumber);
        sub->add_option("--set", m.overrides, "section.key=value override (repeatable)");
        sub->add_flag("--overwrite", m.overwrite, "allow a non-empty output directory");
    };
    add_common(app.add_subcommand("simulate", "run a Monte Carlo ensemble"), true);
    add_common(app.add_subcommand("drift", "advect tracers and write density snapshots"), true);
    add_common(app.add_subcommand("hypergraph", "classify mixing regions"), true);
    add_common(app.add_subcommand("delayed", "delayed-start experiment"), true);
    auto* plot = app.add_subcommand("plot", "render SVGs from earlier outputs");
    add_common(plot, false);
    plot->add_option("--in", m.in_dir, "directory with earlier outputs")->required()->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    m.subcommand = app.get_subcommands().front()->get_name();

    configure_logging();
    try {
        if (m.subcommand == "simulate") return cmd_simulate(m);
        if (m.subcommand == "drift") return cmd_drift(m);
        if (m.subcommand == "hypergraph") return cmd_hypergraph(m);
        if (m.subcommand == "delayed") return cmd_delayed(m);
        if (m.subcommand == "plot") return cmd_plot(m);
    } catch (const std::exception& e) {
        spdlog::error("{}: {}", m.subcommand, e.what());
        return 1;
    }
    return 2;
}
