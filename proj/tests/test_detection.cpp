#include <gtest/gtest.h>

#include <cmath>

#include "driftsearch/detection.hpp"

using namespace driftsearch;

namespace {

constexpr double kSecond = 1.0 / 3600.0;

// Fraction of n co-located targets detected by one stationary agent after
// `steps` steps of length dt_s seconds.
double stationary_fraction(std::size_t n, int steps, double dt_s, std::uint64_t seed) {
    TargetSet targets(std::vector<Vec2>(n, Vec2{5, 5}));
    const std::vector<AgentSegment> agents{{0, {5, 5}, {5, 5}, true}};
    const DetectionModel model;
    for (int s = 0; s < steps; ++s)
        detect_step(model, agents, targets, dt_s * kSecond, (s + 1) * dt_s * kSecond, {seed, 0, std::uint64_t(s)});
    return targets.detected_fraction();
}

}  // namespace

TEST(DetectionChance, Law) {
    EXPECT_EQ(detection_chance(0.0, 2.0), 0.0);
    EXPECT_NEAR(detection_chance(2.0, 2.0), 1 - std::exp(-1.0), 1e-15);
    // Splitting the dwell into k parts gives the same compound probability.
    for (int k : {2, 7, 60}) {
        double miss = 1.0;
        for (int i = 0; i < k; ++i) miss *= 1.0 - detection_chance(4.0 / k, 2.0);
        EXPECT_NEAR(1.0 - miss, detection_chance(4.0, 2.0), 1e-12);
    }
}

TEST(DetectStep, OutsideRadiusNeverDetected) {
    TargetSet targets({{0, 0}, {0, 1.51}});
    const std::vector<AgentSegment> agents{{0, {0, 0}, {0, 0}, true}};
    DetectionModel model;
    for (std::uint64_t s = 0; s < 500; ++s) detect_step(model, agents, targets, 1.0 / 60, 0.0, {1, 0, s});
    EXPECT_TRUE(targets.detected[0]);
    EXPECT_FALSE(targets.detected[1]);
}

TEST(DetectStep, CoincidentOneExpectedTime) {
    const std::size_t n = 100000;
    const double f = stationary_fraction(n, 1, 2.0, 42);
    const double p = 1 - std::exp(-1.0), sd = std::sqrt(p * (1 - p) / n);
    EXPECT_NEAR(f, p, 3 * sd);
}

TEST(DetectStep, MemorylessAcrossSubsteps) {
    const std::size_t n = 100000;
    const double p = 1 - std::exp(-3.0 / 2.0), sd = std::sqrt(p * (1 - p) / n);
    EXPECT_NEAR(stationary_fraction(n, 1, 3.0, 7), p, 3 * sd);
    EXPECT_NEAR(stationary_fraction(n, 3, 1.0, 8), p, 3 * sd);
    EXPECT_NEAR(stationary_fraction(n, 30, 0.1, 9), p, 3 * sd);
}

TEST(DetectStep, OverlappingAgentsCountOnce) {
    const std::size_t n = 50000;
    TargetSet one(std::vector<Vec2>(n, Vec2{0, 0})), two(std::vector<Vec2>(n, Vec2{0, 0}));
    const std::vector<AgentSegment> a1{{0, {0, 0}, {0, 0}, true}};
    const std::vector<AgentSegment> a2{{0, {0, 0}, {0, 0}, true}, {1, {0.1, 0}, {0.1, 0}, true}};
    detect_step({}, a1, one, 2 * kSecond, 0.0, {3, 0, 0});
    detect_step({}, a2, two, 2 * kSecond, 0.0, {3, 0, 0});
    EXPECT_EQ(one.detected, two.detected);
}

TEST(DetectStep, FastPassIsSampled) {
    // 380 km/h for a minute covers 6.3 km; a target 0.5 km off the path must
    // still accumulate dwell.
    const std::size_t n = 20000;
    TargetSet targets(std::vector<Vec2>(n, Vec2{3.2, 0.5}));
    const std::vector<AgentSegment> agents{{0, {0, 0}, {380.0 / 60, 0}, true}};
    detect_step({}, agents, targets, 1.0 / 60, 1.0, {5, 0, 0});
    EXPECT_EQ(targets.count_detected(), n);  // dwell of tens of seconds vs T = 2 s
    EXPECT_EQ(targets.detected_by[0], 0);
    EXPECT_DOUBLE_EQ(targets.detection_time[0], 1.0);
}

TEST(DetectStep, InactiveAgentsIgnored) {
    TargetSet targets(std::vector<Vec2>(1000, Vec2{0, 0}));
    const std::vector<AgentSegment> agents{{0, {0, 0}, {0, 0}, false}};
    detect_step({}, agents, targets, 1.0, 1.0, {1, 0, 0});
    EXPECT_EQ(targets.count_detected(), 0u);
}

TEST(DetectStep, DeterministicAndMonotone) {
    std::vector<Vec2> pos;
    for (int i = 0; i < 400; ++i) pos.push_back({0.01 * i, 0.5 * std::sin(i)});
    TargetSet a(pos), b(pos);
    const std::vector<AgentSegment> agents{{0, {0, 0}, {4, 0}, true}, {1, {4, 0.3}, {0, 0.3}, true}};
    double last = 0.0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        detect_step({}, agents, a, 0.3 * kSecond, s, {77, 2, s});
        detect_step({}, agents, b, 0.3 * kSecond, s, {77, 2, s});
        EXPECT_EQ(a.detected, b.detected);
        EXPECT_GE(a.detected_fraction(), last);
        last = a.detected_fraction();
    }
    EXPECT_GT(last, 0.0);
    EXPECT_LT(last, 1.0);
}

TEST(DetectStep, OrderIndependentPerTarget) {
    // Reversing the target list must reverse the detection pattern exactly
    // when the per-target keys are permuted to match.
    const std::vector<AgentSegment> agents{{0, {0, 0}, {0, 0}, true}};
    TargetSet t(std::vector<Vec2>(64, Vec2{0, 0}));
    detect_step({}, agents, t, 1 * kSecond, 0.0, {9, 1, 4});
    for (std::size_t k = 0; k < 64; ++k) {
        const bool expected = keyed_uniform({9, 1, 4, k}) < detection_chance(1.0, 2.0);
        EXPECT_EQ(bool(t.detected[k]), expected);
    }
}

TEST(DetectionModel, Validation) {
    TargetSet t;
    EXPECT_THROW(detect_step({0.0, 2.0}, {}, t, 1.0, 0.0, {}), ConfigError);
    EXPECT_THROW(detect_step({1.0, 0.0}, {}, t, 1.0, 0.0, {}), ConfigError);
    EXPECT_THROW(detect_step({}, {}, t, 0.0, 0.0, {}), ConfigError);
}
