// Scenario assembly, the daily search loop, Monte Carlo ensembles and the
// delayed-start experiment.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "driftsearch/agent.hpp"
#include "driftsearch/config.hpp"
#include "driftsearch/control.hpp"
#include "driftsearch/coverage.hpp"
#include "driftsearch/detection.hpp"
#include "driftsearch/domain_grid.hpp"
#include "driftsearch/flow.hpp"
#include "driftsearch/rng.hpp"
#include "driftsearch/search_theory.hpp"
#include "driftsearch/transport.hpp"

namespace driftsearch {

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kHistogramBins = 20;

// Stream tags mixed into the seed so independent uses never share draws.
inline constexpr std::uint64_t kTargetStream = 0x7461726765747301ULL;
inline constexpr std::uint64_t kDetectionStream = 0x6465746563740002ULL;

/// Tracer-derived quantities for one search day. They do not depend on the
/// run index, so they are computed once per scenario and shared.
struct DayPlan {
    double t_start = 0.0;
    double t_end = 0.0;
    int n_agents = 0;
    int n_steps = 0;
    std::vector<Vec2> tracers_at_start;
    std::vector<ScalarField> density;  // p at the start of each step
};

/// Read-only scenario state shared by all episodes of an ensemble.
class PreparedScenario {
public:
    explicit PreparedScenario(ScenarioConfig config) : config_(std::move(config)) {
        validate(config_);
        raw_flow_ = make_velocity_field(config_);
        flow_ = std::make_unique<DomainRestricted>(*raw_flow_, config_.domain);
        opts_.tol = config_.tolerance_km;
        for (const auto& s : config_.splash) regions_.emplace_back(s.polygon, s.t0_hours);
        prepare_days();
    }

    PreparedScenario(const PreparedScenario&) = delete;
    PreparedScenario& operator=(const PreparedScenario&) = delete;

    const ScenarioConfig& config() const { return config_; }
    const VelocityField& flow() const { return *flow_; }
    const IntegrationOptions& integration() const { return opts_; }
    const std::vector<SplashRegion>& regions() const { return regions_; }
    const std::vector<DayPlan>& days() const { return days_; }
    double search_start() const { return search_start_; }

    /// Tracers seeded per region in proportion to area, each at its own t0,
    /// advected to a common time.
    TracerEnsemble tracers_at(double t) const {
        TracerEnsemble all;
        all.epoch = t;
        for (std::size_t r = 0; r < regions_.size(); ++r) {
            TracerEnsemble e = advect(seed_halton(regions_[r], tracer_counts_[r]), *flow_, t, opts_);
            all.positions.insert(all.positions.end(), e.positions.begin(), e.positions.end());
        }
        return all;
    }

private:
    void prepare_days() {
        const auto& c = config_;
        double total_area = 0.0;
        for (const auto& r : regions_) total_area += r.area();
        std::size_t assigned = 0;
        for (std::size_t r = 0; r < regions_.size(); ++r) {
            std::size_t n = r + 1 == regions_.size()
                                ? static_cast<std::size_t>(c.n_tracers) - assigned
                                : static_cast<std::size_t>(std::llround(c.n_tracers * regions_[r].area() / total_area));
            n = std::max<std::size_t>(n, 1);
            tracer_counts_.push_back(n);
            assigned += n;
        }

        double latest_t0 = -std::numeric_limits<double>::infinity();
        for (const auto& r : regions_) latest_t0 = std::max(latest_t0, r.t0());
        search_start_ = c.search_days() > 0 ? c.window_start(0) : latest_t0;
        if (c.search_days() == 0) return;

        const GridSpec grid = c.grid();
        TracerEnsemble tracers = tracers_at(search_start_);
        const double dt = c.dt_hours();
        for (int d = 0; d < c.search_days(); ++d) {
            DayPlan day;
            day.t_start = c.window_start(d);
            day.t_end = c.window_end(d);
            day.n_agents = c.schedule.agents[static_cast<std::size_t>(d)];
            day.n_steps = std::max(1, static_cast<int>(std::llround((day.t_end - day.t_start) / dt)));
            tracers = advect(tracers, *flow_, day.t_start, opts_);
            day.tracers_at_start = tracers.positions;
            // Only the density-driven controllers need p at every step.
            const bool need_density = c.controller == Controller::Mdsmc || c.controller == Controller::Dsmc;
            for (int k = 0; k < day.n_steps; ++k) {
                const double t = day.t_start + k * dt;
                if (k > 0) tracers = advect(tracers, *flow_, t, opts_);
                if (need_density && day.n_agents > 0)
                    day.density.push_back(density(tracers, grid, c.bandwidth_km).field);
            }
            tracers = advect(tracers, *flow_, day.t_start + day.n_steps * dt, opts_);
            days_.push_back(std::move(day));
        }
    }

    ScenarioConfig config_;
    std::unique_ptr<VelocityField> raw_flow_;
    std::unique_ptr<VelocityField> flow_;
    IntegrationOptions opts_;
    std::vector<SplashRegion> regions_;
    std::vector<std::size_t> tracer_counts_;
    std::vector<DayPlan> days_;
    double search_start_ = 0.0;
};

struct DayAudit {
    int day = 0;
    double coverage_integral = 0.0;  // grid integral of c_sigma
    double searched_hours = 0.0;     // sum of agent search time
    double relative_error = 0.0;
    double detected_during_day = 0.0;  // fraction of all targets
};

struct TrajectoryRecord {
    double t_hours = 0.0;
    int agent_id = 0;
    Vec2 position;
};

/// Optional per-step logs of one episode.
struct EpisodeTrace {
    std::vector<TrajectoryRecord> trajectories;
    std::vector<DetectionEvent> detections;
};

struct EpisodeResult {
    int run_index = 0;
    std::vector<double> times;      // hours
    std::vector<double> fractions;  // detected fraction at each time
    std::vector<double> detection_times;  // per target, NaN if never detected
    double final_fraction = 0.0;
    std::vector<DayAudit> audits;
};

/// Uniform samples from the splash regions, region chosen with probability
/// proportional to area. Returns positions and their entry times.
inline std::vector<std::pair<Vec2, double>> sample_targets(const std::vector<SplashRegion>& regions, std::size_t n,
                                                           std::uint64_t seed, std::uint64_t run) {
    Rng rng(mix_keys({seed, run, kTargetStream}));
    double total = 0.0;
    for (const auto& r : regions) total += r.area();
    std::vector<std::pair<Vec2, double>> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        double u = rng.uniform() * total;
        std::size_t r = 0;
        while (r + 1 < regions.size() && u >= regions[r].area()) u -= regions[r++].area();
        const BoundingBox box = bounding_box(regions[r].vertices());
        for (int guard = 0;; ++guard) {
            ensure(guard < 1'000'000, "sample_targets: rejection sampling made no progress");
            const Vec2 p{rng.uniform(box.lo.x, box.hi.x), rng.uniform(box.lo.y, box.hi.y)};
            if (regions[r].contains(p)) {
                out.emplace_back(p, regions[r].t0());
                break;
            }
        }
    }
    return out;
}

/// Agents evenly spaced along the edge of the tracer bounding box nearest
/// to the tracer centroid, heading into the box.
inline std::vector<AgentState> place_agents_on_edge(std::span<const Vec2> tracers, int n, double speed,
                                                    const Domain& domain) {
    std::vector<AgentState> agents;
    if (n <= 0) return agents;
    BoundingBox box = bounding_box(tracers);
    Vec2 centroid{};
    for (const Vec2& p : tracers) centroid += p;
    centroid = centroid / static_cast<double>(tracers.size());

    const double d_left = centroid.x - box.lo.x, d_right = box.hi.x - centroid.x;
    const double d_bottom = centroid.y - box.lo.y, d_top = box.hi.y - centroid.y;
    const double best = std::min({d_left, d_right, d_bottom, d_top});
    for (int i = 0; i < n; ++i) {
        const double f = (i + 0.5) / n;
        Vec2 pos, heading;
        if (best == d_left) pos = {box.lo.x, box.lo.y + f * box.height()}, heading = {1, 0};
        else if (best == d_right) pos = {box.hi.x, box.lo.y + f * box.height()}, heading = {-1, 0};
        else if (best == d_bottom) pos = {box.lo.x + f * box.width(), box.lo.y}, heading = {0, 1};
        else pos = {box.lo.x + f * box.width(), box.hi.y}, heading = {0, -1};
        agents.push_back(make_agent(i, domain.clamp(pos), speed, heading));
    }
    return agents;
}

/// Region swept by the lawnmower on a given day.
inline std::vector<Vec2> lawnmower_region(const ScenarioConfig& c, const DayPlan& day, int day_index) {
    if (c.controller == Controller::LawnmowerDrifted) return day.tracers_at_start;
    for (const auto& r : c.reported_areas)
        if (r.day == day_index) return r.polygon;
    std::vector<Vec2> pts;
    for (const auto& s : c.splash) pts.insert(pts.end(), s.polygon.begin(), s.polygon.end());
    return pts;
}

namespace detail {

inline void drift_targets(std::vector<Vec2>& targets, const VelocityField& flow, double t_from, double t_to,
                          const IntegrationOptions& opts) {
    if (t_to <= t_from) return;
    for (Vec2& p : targets) p = integrate(flow, p, t_from, t_to, opts);
}

}  // namespace detail

/// One Monte Carlo episode. Deterministic in (config, run_index).
inline EpisodeResult run_episode(const PreparedScenario& scenario, int run_index, EpisodeTrace* trace = nullptr) {
    const ScenarioConfig& c = scenario.config();
    const VelocityField& flow = scenario.flow();
    const IntegrationOptions& opts = scenario.integration();
    const GridSpec grid = c.grid();
    const double dt = c.dt_hours();
    const std::uint64_t run = static_cast<std::uint64_t>(run_index);

    EpisodeResult res;
    res.run_index = run_index;

    const auto seeded = sample_targets(scenario.regions(), static_cast<std::size_t>(c.n_targets), c.seed, run);
    double t_now = scenario.search_start();
    std::vector<Vec2> start_positions;
    for (const auto& [p, t0] : seeded) start_positions.push_back(integrate(flow, p, t0, t_now, opts));
    TargetSet targets(std::move(start_positions));

    if (scenario.days().empty()) {
        res.times.push_back(t_now);
        res.fractions.push_back(0.0);
        res.detection_times = targets.detection_time;
        return res;
    }

    CoverageState coverage;
    coverage.sigma_km = c.sigma_km;
    const double p_floor = default_p_floor(grid);
    const double kappa = c.effort_scale();
    const bool spectral = c.controller == Controller::Mdsmc || c.controller == Controller::Dsmc;
    std::optional<SpectralBasis> basis;
    if (spectral) basis.emplace(c.domain, c.modes, c.beta());

    std::vector<double> lawn_progress;  // arc length fraction per agent
    std::uint64_t global_step = 0;
    std::vector<AgentSegment> segments;

    for (std::size_t d = 0; d < scenario.days().size(); ++d) {
        const DayPlan& day = scenario.days()[d];
        const int day_i = static_cast<int>(d);
        try {
            detail::drift_targets(targets.positions, flow, t_now, day.t_start, opts);
            drift_coverage(coverage, flow, t_now, day.t_start, opts);
            if (c.merge_radius_sigma > 0.0) merge_colocated(coverage, c.merge_radius_sigma * c.sigma_km);
            t_now = day.t_start;
            const double detected_before = targets.detected_fraction();
            res.times.push_back(t_now);
            res.fractions.push_back(detected_before);

            std::vector<AgentState> agents;
            WaypointPlan plan;
            if (day.n_agents > 0) {
                if (spectral) {
                    agents = place_agents_on_edge(day.tracers_at_start, day.n_agents, c.speed_kmh, c.domain);
                } else {
                    plan = lawnmower_plan(lawnmower_region(c, day, day_i), day.n_agents, c.lawnmower_spacing_km);
                    lawn_progress.resize(static_cast<std::size_t>(day.n_agents), -1.0);
                    const std::size_t groups = std::min(plan.tracks.size(), plan.routes.size());
                    for (int i = 0; i < day.n_agents; ++i) {
                        const std::size_t ui = static_cast<std::size_t>(i);
                        // Agents sharing a track group start staggered along its loop.
                        if (lawn_progress[ui] < 0.0) {
                            const double sharing = std::ceil(double(plan.routes.size() - ui % groups) / groups);
                            lawn_progress[ui] = static_cast<double>(ui / groups) / sharing;
                        }
                        const Vec2 pos = place_on_route(plan, ui, lawn_progress[ui] * loop_length(plan.routes[ui]));
                        Vec2 heading{1, 0};
                        const Vec2 next = plan.routes[ui][plan.next[ui]];
                        if (distance(next, pos) > 0.0) heading = (next - pos) / distance(next, pos);
                        agents.push_back(make_agent(i, c.domain.clamp(pos), c.speed_kmh, heading));
                    }
                }
            }

            for (int k = 0; k < day.n_steps; ++k, ++global_step) {
                const double t = day.t_start + k * dt;
                if (!agents.empty()) {
                    segments.clear();
                    for (const AgentState& a : agents) segments.push_back({a.id, a.position, a.position, a.active});

                    if (spectral) {
                        const ScalarField& p = day.density[static_cast<std::size_t>(k)];
                        ScalarField c_sigma = smooth(coverage, grid);
                        if (c.controller == Controller::Mdsmc) {
                            const double budget =
                                c_sigma.integral() + static_cast<double>(agents.size()) * c.alpha_window_hours;
                            c_sigma *= kappa;
                            const KoopmanPlan kp = solve_alpha(p, kappa * budget, p_floor);
                            smc_step(agents, mismatch_mdsmc(p, kp.alpha, c_sigma, p_floor), *basis, dt);
                        } else {
                            smc_step(agents, mismatch_dsmc(p, c_sigma, coverage.total_searched()), *basis, dt);
                        }
                    } else {
                        follow_waypoints(agents, plan, dt);
                    }
                    for (std::size_t a = 0; a < agents.size(); ++a) segments[a].to = agents[a].position;
                    deposit(coverage, agents, dt);

                    const auto events = detect_step(c.detection, segments, targets, dt, t + dt,
                                                    {mix_keys({c.seed, kDetectionStream}), run, global_step});
                    if (trace) {
                        for (const AgentState& a : agents) trace->trajectories.push_back({t + dt, a.id, a.position});
                        trace->detections.insert(trace->detections.end(), events.begin(), events.end());
                    }
                }
                detail::drift_targets(targets.positions, flow, t, t + dt, opts);
                drift_coverage(coverage, flow, t, t + dt, opts);
                t_now = t + dt;
                res.times.push_back(t_now);
                res.fractions.push_back(targets.detected_fraction());
            }

            if (!spectral && !agents.empty()) {
                for (std::size_t i = 0; i < agents.size(); ++i) {
                    const double L = loop_length(plan.routes[i]);
                    if (L > 0.0) {
                        const double travelled = c.speed_kmh * dt * day.n_steps;
                        lawn_progress[i] = std::fmod(lawn_progress[i] + travelled / L, 1.0);
                    }
                }
            }

            DayAudit audit;
            audit.day = day_i;
            audit.coverage_integral = smooth(coverage, grid).integral();
            audit.searched_hours = coverage.total_searched();
            audit.relative_error = audit.searched_hours > 0.0
                                       ? std::abs(audit.coverage_integral - audit.searched_hours) / audit.searched_hours
                                       : std::abs(audit.coverage_integral);
            audit.detected_during_day = targets.detected_fraction() - detected_before;
            res.audits.push_back(audit);
        } catch (const std::exception& e) {
            throw SimulationError("run " + std::to_string(run_index) + ", search day " + std::to_string(day_i) +
                                  ": " + e.what());
        }
    }
    res.detection_times = targets.detection_time;
    res.final_fraction = targets.detected_fraction();
    return res;
}

inline EpisodeResult run_episode(const ScenarioConfig& config, int run_index, EpisodeTrace* trace = nullptr) {
    const PreparedScenario scenario(config);
    return run_episode(scenario, run_index, trace);
}

struct EnsembleStats {
    std::vector<double> finals;      // by run index
    std::vector<double> times;       // shared time axis
    std::vector<double> mean_curve;  // pointwise mean of run curves
    std::vector<int> histogram;      // kHistogramBins bins on [0, 1]
    std::vector<double> mean_daily;  // mean fraction detected during each search day
    double max_audit_error = 0.0;
    std::vector<EpisodeResult> episodes;

    double mean_final() const {
        double acc = 0.0;
        for (double f : finals) acc += f;
        return finals.empty() ? 0.0 : acc / static_cast<double>(finals.size());
    }
};

inline int histogram_bin(double fraction) {
    return std::clamp(static_cast<int>(fraction * kHistogramBins), 0, kHistogramBins - 1);
}

/// Reduces episodes (in run-index order) to ensemble statistics.
inline EnsembleStats aggregate(std::vector<EpisodeResult> episodes) {
    EnsembleStats s;
    s.histogram.assign(kHistogramBins, 0);
    if (episodes.empty()) return s;
    s.times = episodes.front().times;
    s.mean_curve.assign(s.times.size(), 0.0);
    s.mean_daily.assign(episodes.front().audits.size(), 0.0);
    for (const EpisodeResult& e : episodes) {
        ensure(e.times == s.times, "aggregate: episodes have different time axes");
        s.finals.push_back(e.final_fraction);
        ++s.histogram[static_cast<std::size_t>(histogram_bin(e.final_fraction))];
        for (std::size_t k = 0; k < e.fractions.size(); ++k) s.mean_curve[k] += e.fractions[k];
        for (std::size_t d = 0; d < e.audits.size(); ++d) {
            s.mean_daily[d] += e.audits[d].detected_during_day;
            s.max_audit_error = std::max(s.max_audit_error, e.audits[d].relative_error);
        }
    }
    const double n = static_cast<double>(episodes.size());
    for (double& v : s.mean_curve) v /= n;
    for (double& v : s.mean_daily) v /= n;
    s.episodes = std::move(episodes);
    return s;
}

/// n_runs episodes on up to `jobs` threads. Results are stored by run index,
/// so the statistics do not depend on scheduling.
inline EnsembleStats run_ensemble(const PreparedScenario& scenario, int jobs = 1, EpisodeTrace* trace_run0 = nullptr) {
    const int n = scenario.config().n_runs;
    std::vector<std::optional<EpisodeResult>> results(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    int first_error_run = n;

    auto worker = [&] {
        for (int r = next++; r < n; r = next++) {
            try {
                results[static_cast<std::size_t>(r)] = run_episode(scenario, r, r == 0 ? trace_run0 : nullptr);
            } catch (...) {
                std::lock_guard lock(err_mutex);
                if (r < first_error_run) {
                    first_error_run = r;
                    first_error = std::current_exception();
                }
            }
        }
    };
    const int threads = std::clamp(jobs, 1, n);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    std::vector<EpisodeResult> episodes;
    episodes.reserve(results.size());
    for (auto& r : results) episodes.push_back(std::move(*r));
    return aggregate(std::move(episodes));
}

inline EnsembleStats run_ensemble(const ScenarioConfig& config, int jobs = 1) {
    const PreparedScenario scenario(config);
    return run_ensemble(scenario, jobs);
}

struct DelayedRow {
    double offset_days = 0.0;
    EnsembleStats stats;
    std::vector<double> daily_delta;  // mean_daily minus the first row's
};

/// One ensemble per start offset; target seeds depend only on (seed, run),
/// so every offset searches the same targets.
inline std::vector<DelayedRow> delayed_start_experiment(const ScenarioConfig& base, const std::vector<double>& offsets,
                                                        int jobs = 1) {
    std::vector<DelayedRow> rows;
    for (double off : offsets) {
        ensure(off >= 0.0, "delayed_start_experiment: offsets must be non-negative");
        ScenarioConfig c = base;
        c.start_delay_days = base.start_delay_days + off;
        rows.push_back({off, run_ensemble(c, jobs), {}});
    }
    for (DelayedRow& row : rows) {
        row.daily_delta.resize(row.stats.mean_daily.size());
        for (std::size_t d = 0; d < row.daily_delta.size(); ++d)
            row.daily_delta[d] = row.stats.mean_daily[d] - rows.front().stats.mean_daily[d];
    }
    return rows;
}

}  // namespace driftsearch
