#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "driftsearch/simulation.hpp"

using namespace driftsearch;

namespace {

const char* kSmall = R"(
[domain]
x_min = 0
x_max = 200
y_min = 0
y_max = 100

[flow]
type = double_gyre
peak_speed_kmh = 3
epsilon = 0.25
period_hours = 48

[splash]
polygon = 80 40; 120 40; 120 60; 80 60

[schedule]
first_day = 1
window_start_hour = 14
window_end_hour = 15
agents = 3, 3

[search]
modes = 12

[grid]
nx = 32
ny = 32

[run]
n_tracers = 1000
n_targets = 200
n_runs = 3
seed = 5
)";

ScenarioConfig small(const std::vector<std::string>& overrides = {}) {
    auto c = parse_config_text(kSmall);
    for (const auto& o : overrides) apply_override(c, o);
    return c;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST(Simulation, ZeroSearchDaysDetectsNothing) {
    const auto r = run_episode(small({"schedule.agents="}), 0);
    EXPECT_EQ(r.final_fraction, 0.0);
    ASSERT_EQ(r.times.size(), 1u);
    EXPECT_EQ(r.fractions[0], 0.0);
    for (double t : r.detection_times) EXPECT_TRUE(std::isnan(t));
}

TEST(Simulation, HugeSensorSaturates) {
    const auto r = run_episode(small({"detection.radius_km=500", "detection.expected_time_s=1e-6",
                                      "schedule.agents=1"}),
                               0);
    EXPECT_EQ(r.final_fraction, 1.0);
    EXPECT_EQ(r.fractions[1], 1.0);
}

TEST(Simulation, EpisodeIsDeterministic) {
    const PreparedScenario s(small());
    const auto a = run_episode(s, 1), b = run_episode(s, 1);
    EXPECT_TRUE(same_bits(a.fractions, b.fractions));
    EXPECT_TRUE(same_bits(a.detection_times, b.detection_times));
    EXPECT_TRUE(same_bits(a.times, b.times));
    const auto fresh = run_episode(small(), 1);
    EXPECT_TRUE(same_bits(a.fractions, fresh.fractions));
}

TEST(Simulation, CurveMonotoneAndFlatBetweenWindows) {
    const auto c = small();
    const auto r = run_episode(c, 0);
    const int steps = 60;
    ASSERT_EQ(r.times.size(), std::size_t(2 * (steps + 1)));
    for (std::size_t k = 1; k < r.fractions.size(); ++k) EXPECT_GE(r.fractions[k], r.fractions[k - 1]);
    EXPECT_DOUBLE_EQ(r.times[0], c.window_start(0));
    EXPECT_DOUBLE_EQ(r.times[steps], c.window_end(0));
    EXPECT_DOUBLE_EQ(r.times[steps + 1], c.window_start(1));
    EXPECT_EQ(r.fractions[steps], r.fractions[steps + 1]);
    EXPECT_GT(r.final_fraction, 0.0);
}

TEST(Simulation, IdleDayIsFlat) {
    const auto r = run_episode(small({"schedule.agents=2,0,2"}), 0);
    ASSERT_EQ(r.audits.size(), 3u);
    EXPECT_EQ(r.audits[1].detected_during_day, 0.0);
    EXPECT_EQ(r.fractions[61], r.fractions[121]);
}

TEST(Simulation, CoverageAuditConserved) {
    const auto r = run_episode(small(), 2);
    ASSERT_EQ(r.audits.size(), 2u);
    EXPECT_NEAR(r.audits[0].searched_hours, 3.0, 1e-9);
    EXPECT_NEAR(r.audits[1].searched_hours, 6.0, 1e-9);
    for (const auto& a : r.audits) EXPECT_LT(a.relative_error, 2e-2);
}

TEST(Simulation, SingleRunEnsembleMatchesEpisode) {
    const auto one = run_ensemble(small({"run.n_runs=1"}));
    const auto ep = run_episode(small(), 0);
    ASSERT_EQ(one.finals.size(), 1u);
    EXPECT_EQ(one.finals[0], ep.final_fraction);
    EXPECT_TRUE(same_bits(one.mean_curve, ep.fractions));
    EXPECT_EQ(one.histogram[std::size_t(histogram_bin(ep.final_fraction))], 1);
}

TEST(Simulation, TwoRunMeanIsAverage) {
    const auto two = run_ensemble(small({"run.n_runs=2"}));
    const auto e0 = run_episode(small(), 0), e1 = run_episode(small(), 1);
    EXPECT_DOUBLE_EQ(two.mean_final(), (e0.final_fraction + e1.final_fraction) / 2);
    for (std::size_t k = 0; k < two.mean_curve.size(); ++k)
        EXPECT_DOUBLE_EQ(two.mean_curve[k], (e0.fractions[k] + e1.fractions[k]) / 2);
}

TEST(Simulation, ThreadCountDoesNotChangeResults) {
    const PreparedScenario s(small({"run.n_runs=5"}));
    const auto serial = run_ensemble(s, 1), parallel = run_ensemble(s, 3);
    EXPECT_TRUE(same_bits(serial.finals, parallel.finals));
    EXPECT_TRUE(same_bits(serial.mean_curve, parallel.mean_curve));
}

TEST(Simulation, AllControllersRun) {
    for (const char* ctl : {"dsmc", "lawnmower_reported", "lawnmower_drifted"}) {
        const auto r = run_episode(small({"flow.type=zero", std::string("search.controller=") + ctl}), 0);
        EXPECT_GT(r.final_fraction, 0.0) << ctl;
        for (const auto& a : r.audits) EXPECT_LT(a.relative_error, 2e-2) << ctl;
    }
}

TEST(Simulation, ReportedAreaIsUsed) {
    auto c = small({"search.controller=lawnmower_reported", "schedule.agents=2"});
    c.reported_areas.push_back({0, {{0, 0}, {10, 0}, {10, 10}, {0, 10}}});
    EpisodeTrace trace;
    run_episode(c, 0, &trace);
    ASSERT_FALSE(trace.trajectories.empty());
    for (const auto& rec : trace.trajectories) {
        EXPECT_LE(rec.position.x, 10 + 1e-9);
        EXPECT_LE(rec.position.y, 10 + 1e-9);
    }
}

TEST(Simulation, TraceRecordsEveryAgentStep) {
    EpisodeTrace trace;
    const auto r = run_episode(small(), 0, &trace);
    EXPECT_EQ(trace.trajectories.size(), std::size_t(2 * 60 * 3));
    std::size_t detected = 0;
    for (double t : r.detection_times) detected += !std::isnan(t);
    EXPECT_EQ(trace.detections.size(), detected);
}

TEST(Simulation, DelayedOffsets) {
    auto base = small({"run.n_runs=2"});
    const auto single = delayed_start_experiment(base, {0.0});
    const auto direct = run_ensemble(base);
    ASSERT_EQ(single.size(), 1u);
    EXPECT_TRUE(same_bits(single[0].stats.finals, direct.finals));
    const auto twice = delayed_start_experiment(base, {0.0, 0.0});
    ASSERT_EQ(twice.size(), 2u);
    EXPECT_TRUE(same_bits(twice[0].stats.mean_curve, twice[1].stats.mean_curve));
    for (double d : twice[1].daily_delta) EXPECT_EQ(d, 0.0);
    EXPECT_THROW(delayed_start_experiment(base, {-1.0}), ConfigError);
}

TEST(SampleTargets, InsideAndKeyedByRun) {
    const std::vector<SplashRegion> regions{SplashRegion({{0, 0}, {10, 0}, {0, 10}}, 1.0),
                                            SplashRegion({{50, 50}, {60, 50}, {60, 60}, {50, 60}}, 2.0)};
    const auto a = sample_targets(regions, 3000, 9, 0), b = sample_targets(regions, 3000, 9, 0);
    const auto other = sample_targets(regions, 3000, 9, 1);
    std::size_t in_square = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].first, b[k].first);
        const bool sq = regions[1].contains(a[k].first);
        EXPECT_TRUE(sq || regions[0].contains(a[k].first));
        EXPECT_EQ(a[k].second, sq ? 2.0 : 1.0);
        in_square += sq;
    }
    EXPECT_FALSE(a[0].first == other[0].first);
    // Square has twice the triangle's area.
    const double p = 2.0 / 3.0, sd = std::sqrt(p * (1 - p) / 3000);
    EXPECT_NEAR(double(in_square) / 3000, p, 4 * sd);
}

TEST(PlaceAgents, EvenlySpacedOnNearestEdge) {
    std::vector<Vec2> tracers{{0, 0}, {10, 0}, {10, 10}, {0, 10}, {1, 5}, {1, 6}};
    const auto agents = place_agents_on_edge(tracers, 4, 380, Domain(0, 100, 0, 100));
    ASSERT_EQ(agents.size(), 4u);
    for (int i = 0; i < 4; ++i) {
        EXPECT_EQ(agents[i].position.x, 0.0);
        EXPECT_NEAR(agents[i].position.y, 10 * (i + 0.5) / 4, 1e-12);
        EXPECT_EQ(agents[i].heading, (Vec2{1, 0}));
    }
}
