// Stochastic target detection with the exponential-saturation law: a target
// that stays within the sensor radius for tau seconds is detected with
// probability 1 - exp(-tau / T).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "driftsearch/errors.hpp"
#include "driftsearch/geometry.hpp"
#include "driftsearch/rng.hpp"

namespace driftsearch {

inline constexpr double kDwellSampleSpacingKm = 1.0;

struct DetectionModel {
    double radius_km = 1.5;
    double expected_time_s = 2.0;

    void validate() const {
        ensure(radius_km > 0.0, "detection radius must be positive");
        ensure(expected_time_s > 0.0, "expected detection time must be positive");
    }

    friend bool operator==(const DetectionModel&, const DetectionModel&) = default;
};

/// P(detect | dwell) = 1 - exp(-dwell / T).
inline double detection_chance(double dwell_s, double expected_time_s) {
    return dwell_s <= 0.0 ? 0.0 : -std::expm1(-dwell_s / expected_time_s);
}

struct TargetSet {
    std::vector<Vec2> positions;
    std::vector<char> detected;
    std::vector<double> detection_time;  // hours; NaN until detected
    std::vector<int> detected_by;        // agent id; -1 until detected

    explicit TargetSet(std::vector<Vec2> initial = {})
        : positions(std::move(initial)),
          detected(positions.size(), 0),
          detection_time(positions.size(), std::numeric_limits<double>::quiet_NaN()),
          detected_by(positions.size(), -1) {}

    std::size_t size() const { return positions.size(); }
    std::size_t count_detected() const {
        return static_cast<std::size_t>(std::count(detected.begin(), detected.end(), char{1}));
    }
    double detected_fraction() const {
        return positions.empty() ? 0.0 : static_cast<double>(count_detected()) / static_cast<double>(size());
    }
};

/// Where an agent was during the step.
struct AgentSegment {
    int id = 0;
    Vec2 from;
    Vec2 to;
    bool active = true;
};

/// Identifies the random stream of one step; each target draws
/// keyed_uniform(seed, run, step, target), so results are independent of
/// evaluation order.
struct DetectionKey {
    std::uint64_t seed = 0;
    std::uint64_t run = 0;
    std::uint64_t step = 0;
};

struct DetectionEvent {
    double t_hours = 0.0;
    std::size_t target_id = 0;
    int agent_id = -1;
    Vec2 position;
};

/// Tests every undetected target once per step. Agent paths are sampled at
/// <= 1 km spacing; the in-range dwell counts a sample once even when several
/// agents cover it. The detecting agent is the one with the most in-range
/// samples (lowest id on ties).
inline std::vector<DetectionEvent> detect_step(const DetectionModel& model, std::span<const AgentSegment> agents,
                                               TargetSet& targets, double dt_hours, double t_end_hours,
                                               const DetectionKey& key) {
    ensure(dt_hours > 0.0, "detect_step: dt must be positive");
    model.validate();
    std::vector<DetectionEvent> events;

    double longest = 0.0;
    for (const AgentSegment& a : agents)
        if (a.active) longest = std::max(longest, distance(a.from, a.to));
    const int samples = std::max(1, static_cast<int>(std::ceil(longest / kDwellSampleSpacingKm)));
    const double r2 = model.radius_km * model.radius_km;
    const double step_s = dt_hours * 3600.0;

    std::vector<int> hits(agents.size());
    for (std::size_t t = 0; t < targets.size(); ++t) {
        if (targets.detected[t]) continue;
        const Vec2 q = targets.positions[t];
        int in_range = 0;
        std::fill(hits.begin(), hits.end(), 0);
        bool near_any = false;
        for (std::size_t a = 0; a < agents.size(); ++a) {
            const AgentSegment& seg = agents[a];
            if (!seg.active) continue;
            const double lo_x = std::min(seg.from.x, seg.to.x) - model.radius_km;
            const double hi_x = std::max(seg.from.x, seg.to.x) + model.radius_km;
            const double lo_y = std::min(seg.from.y, seg.to.y) - model.radius_km;
            const double hi_y = std::max(seg.from.y, seg.to.y) + model.radius_km;
            if (q.x >= lo_x && q.x <= hi_x && q.y >= lo_y && q.y <= hi_y) near_any = true;
        }
        if (!near_any) continue;
        for (int s = 0; s < samples; ++s) {
            const double f = (s + 0.5) / samples;
            bool covered = false;
            for (std::size_t a = 0; a < agents.size(); ++a) {
                const AgentSegment& seg = agents[a];
                if (!seg.active) continue;
                const Vec2 p = seg.from + (seg.to - seg.from) * f;
                const Vec2 d = p - q;
                if (dot(d, d) <= r2) {
                    ++hits[a];
                    covered = true;
                }
            }
            if (covered) ++in_range;
        }
        if (in_range == 0) continue;
        const double dwell_s = step_s * in_range / samples;
        const double u = keyed_uniform({key.seed, key.run, key.step, static_cast<std::uint64_t>(t)});
        if (u < detection_chance(dwell_s, model.expected_time_s)) {
            std::size_t best = 0;
            for (std::size_t a = 1; a < agents.size(); ++a)
                if (hits[a] > hits[best] || (hits[a] == hits[best] && hits[a] > 0 && agents[a].id < agents[best].id))
                    best = a;
            targets.detected[t] = 1;
            targets.detection_time[t] = t_end_hours;
            targets.detected_by[t] = agents[best].id;
            events.push_back({t_end_hours, t, agents[best].id, q});
        }
    }
    return events;
}

}  // namespace driftsearch
