#pragma once

#include "driftsearch/errors.hpp"
#include "driftsearch/geometry.hpp"

namespace driftsearch {

/// First-order search agent moving at constant speed.
struct AgentState {
    int id = 0;
    Vec2 position;
    double speed_kmh = 380.0;
    Vec2 heading{1.0, 0.0};  // unit vector
    bool active = true;
};

inline AgentState make_agent(int id, Vec2 position, double speed_kmh, Vec2 heading) {
    ensure(speed_kmh > 0.0, "agent speed must be positive");
    const double n = norm(heading);
    ensure(n > 0.0, "agent heading must be non-zero");
    return {id, position, speed_kmh, heading / n, true};
}

}  // namespace driftsearch
