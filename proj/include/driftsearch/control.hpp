// Agent steering: spectral gradient ascent on the mismatch potential
// (mDSMC/DSMC) and the parallel-track lawnmower baseline.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "driftsearch/agent.hpp"
#include "driftsearch/domain_grid.hpp"
#include "driftsearch/geometry.hpp"
#include "driftsearch/search_theory.hpp"

namespace driftsearch {

inline constexpr double kMinGradientNorm = 1e-12;

/// Moves p by `step`, mirroring off the domain walls. Returns the new position
/// and flips the matching heading components.
inline Vec2 move_reflecting(const Domain& d, Vec2 p, Vec2& heading, double distance_km) {
    Vec2 q = p + heading * distance_km;
    auto fold = [](double v, double lo, double hi, double& h) {
        const double span = hi - lo;
        for (int guard = 0; guard < 64 && (v < lo || v > hi); ++guard) {
            if (v < lo) v = 2 * lo - v;
            else v = 2 * hi - v;
            h = -h;
        }
        return std::clamp(v, lo, lo + span);
    };
    q.x = fold(q.x, d.x_min(), d.x_max(), heading.x);
    q.y = fold(q.y, d.y_min(), d.y_max(), heading.y);
    return q;
}

/// Steers active agents up the gradient of u = sum Lambda_k s_k f_k and moves
/// them v dt along the new heading. A vanishing gradient keeps the old heading.
inline void steer_agents(std::span<AgentState> agents, const SpectralCoefficients& coeffs, const SpectralBasis& basis,
                         double dt_hours) {
    ensure(dt_hours > 0.0, "smc_step: dt must be positive");
    for (AgentState& a : agents) {
        if (!a.active) continue;
        const PotentialSample u = synthesize_potential(coeffs, basis, a.position);
        const double g = norm(u.gradient);
        if (g > kMinGradientNorm) a.heading = u.gradient / g;
        a.position = move_reflecting(basis.domain(), a.position, a.heading, a.speed_kmh * dt_hours);
    }
}

/// One control step of the spectral multiscale controller.
inline SpectralCoefficients smc_step(std::span<AgentState> agents, const ScalarField& mismatch,
                                     const SpectralBasis& basis, double dt_hours) {
    SpectralCoefficients coeffs = transform(mismatch, basis);
    steer_agents(agents, coeffs, basis, dt_hours);
    return coeffs;
}

inline SpectralCoefficients smc_step(std::span<AgentState> agents, const MismatchField& mismatch,
                                     const SpectralBasis& basis, double dt_hours) {
    return smc_step(agents, mismatch.field, basis, dt_hours);
}

// ---------------------------------------------------------------------------
// Lawnmower

struct Track {
    Vec2 start;
    Vec2 end;
    double length() const { return distance(start, end); }
};

/// Closed waypoint loop per agent plus the index of the waypoint each agent
/// is heading for.
struct WaypointPlan {
    std::vector<Track> tracks;                 // serpentine order
    std::vector<std::vector<Vec2>> routes;     // per agent
    std::vector<std::size_t> next;             // per agent

    bool empty() const { return routes.empty(); }
};

/// Length of the closed loop through a route (including the return leg).
inline double loop_length(const std::vector<Vec2>& route) {
    double len = 0.0;
    for (std::size_t k = 0; k < route.size(); ++k) len += distance(route[k], route[(k + 1) % route.size()]);
    return len;
}

namespace detail {

// Portion of the line base + t u inside a counterclockwise convex polygon.
inline bool clip_line(const Polygon& ccw, Vec2 base, Vec2 u, double& t0, double& t1) {
    t0 = -std::numeric_limits<double>::infinity();
    t1 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ccw.size(); ++i) {
        const Vec2 a = ccw[i], e = ccw[(i + 1) % ccw.size()] - a;
        const double c0 = cross(e, base - a);
        const double c1 = cross(e, u);
        if (std::abs(c1) < 1e-15 * norm(e)) {
            if (c0 < 0.0) return false;
            continue;
        }
        const double t = -c0 / c1;
        if (c1 > 0.0) t0 = std::max(t0, t);
        else t1 = std::min(t1, t);
    }
    return t1 > t0;
}

inline void push_distinct(std::vector<Vec2>& route, Vec2 p) {
    if (route.empty() || !(route.back() == p)) route.push_back(p);
}

}  // namespace detail

/// Boustrophedon sweep of the convex hull of `region`: tracks parallel to the
/// edge realising the minimum width, `spacing` apart with the first one
/// spacing/2 inside, serpentine-linked and split into n_agents contiguous
/// groups of near-equal length.
inline WaypointPlan lawnmower_plan(std::span<const Vec2> region, int n_agents, double spacing) {
    ensure(n_agents >= 1, "lawnmower_plan: need at least one agent");
    ensure(spacing > 0.0, "lawnmower_plan: spacing must be positive");
    const Polygon hull = convex_hull(region);

    WaypointPlan plan;
    if (hull.size() == 1) {
        plan.tracks.push_back({hull[0], hull[0]});
    } else if (hull.size() == 2) {
        plan.tracks.push_back({hull[0], hull[1]});
    } else {
        // Minimum-width direction: for a convex polygon it is attained
        // perpendicular to one of its edges.
        std::size_t best = 0;
        double best_width = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < hull.size(); ++i) {
            const Vec2 a = hull[i], e = hull[(i + 1) % hull.size()] - a;
            const Vec2 n = Vec2{-e.y, e.x} / norm(e);
            double w = 0.0;
            for (const Vec2& v : hull) w = std::max(w, dot(v - a, n));
            if (w < best_width) {
                best_width = w;
                best = i;
            }
        }
        const Vec2 a = hull[best];
        const Vec2 e = hull[(best + 1) % hull.size()] - a;
        const Vec2 u = e / norm(e);
        const Vec2 n{-u.y, u.x};

        std::vector<double> offsets;
        if (best_width <= spacing) {
            offsets.push_back(0.5 * best_width);
        } else {
            for (double o = 0.5 * spacing; o < best_width; o += spacing) offsets.push_back(o);
        }
        bool forward = true;
        for (double o : offsets) {
            double t0 = 0, t1 = 0;
            const Vec2 base = a + n * o;
            if (!detail::clip_line(hull, base, u, t0, t1)) continue;
            Track tr{base + u * t0, base + u * t1};
            if (!forward) std::swap(tr.start, tr.end);
            plan.tracks.push_back(tr);
            forward = !forward;
        }
        if (plan.tracks.empty()) {
            const Vec2 base = a + n * (0.5 * best_width);
            double t0 = 0, t1 = 0;
            if (detail::clip_line(hull, base, u, t0, t1)) plan.tracks.push_back({base + u * t0, base + u * t1});
            else plan.tracks.push_back({a, hull[(best + 1) % hull.size()]});
        }
    }

    // Contiguous partition by cumulative length.
    const std::size_t n_tracks = plan.tracks.size();
    const std::size_t groups = std::min<std::size_t>(n_tracks, static_cast<std::size_t>(n_agents));
    double total = 0.0;
    for (const Track& t : plan.tracks) total += t.length();
    std::vector<std::size_t> first(groups + 1, n_tracks);
    first[0] = 0;
    {
        std::size_t k = 0;
        double cum = 0.0;
        for (std::size_t g = 0; g < groups; ++g) {
            first[g] = k;
            const double goal = total * static_cast<double>(g + 1) / static_cast<double>(groups);
            // Always take one track; then keep taking while it brings us closer to the goal
            // and enough tracks remain for the other groups.
            cum += plan.tracks[k].length();
            ++k;
            while (k < n_tracks && n_tracks - k > groups - g - 1 &&
                   (g + 1 == groups || cum + 0.5 * plan.tracks[k].length() <= goal)) {
                cum += plan.tracks[k].length();
                ++k;
            }
        }
        first[groups] = n_tracks;
    }

    std::vector<std::vector<Vec2>> group_routes(groups);
    for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t k = first[g]; k < first[g + 1]; ++k) {
            detail::push_distinct(group_routes[g], plan.tracks[k].start);
            detail::push_distinct(group_routes[g], plan.tracks[k].end);
        }
        if (group_routes[g].size() > 1 && group_routes[g].front() == group_routes[g].back())
            group_routes[g].pop_back();
    }
    for (int i = 0; i < n_agents; ++i) plan.routes.push_back(group_routes[static_cast<std::size_t>(i) % groups]);
    plan.next.assign(plan.routes.size(), 0);
    return plan;
}

/// Puts agent i at arc length s (mod loop length) along its route and updates
/// its next-waypoint index. Returns the position.
inline Vec2 place_on_route(WaypointPlan& plan, std::size_t i, double arc_length) {
    const auto& route = plan.routes.at(i);
    ensure(!route.empty(), "place_on_route: empty route");
    const double L = loop_length(route);
    if (route.size() == 1 || L <= 0.0) {
        plan.next[i] = 0;
        return route[0];
    }
    double s = std::fmod(arc_length, L);
    if (s < 0) s += L;
    for (std::size_t k = 0; k < route.size(); ++k) {
        const Vec2 a = route[k], b = route[(k + 1) % route.size()];
        const double leg = distance(a, b);
        if (s < leg) {
            plan.next[i] = (k + 1) % route.size();
            return a + (b - a) * (s / leg);
        }
        s -= leg;
    }
    plan.next[i] = 1 % route.size();
    return route[0];
}

/// Advances each active agent v dt along its route, turning instantly at
/// waypoints and wrapping to the route start. Returns false (agents hold
/// position) when the plan has no routes.
inline bool follow_waypoints(std::span<AgentState> agents, WaypointPlan& plan, double dt_hours) {
    ensure(dt_hours > 0.0, "follow_waypoints: dt must be positive");
    if (plan.empty()) return false;
    for (std::size_t i = 0; i < agents.size(); ++i) {
        AgentState& a = agents[i];
        if (!a.active) continue;
        const std::size_t r = i % plan.routes.size();
        const auto& route = plan.routes[r];
        if (route.empty()) continue;
        double remaining = a.speed_kmh * dt_hours;
        const double loop = loop_length(route);
        if (loop > 0.0 && remaining > loop) remaining = std::fmod(remaining, loop) + loop;
        for (int guard = 0; remaining > 0.0 && guard < 1'000'000; ++guard) {
            const Vec2 target = route[plan.next[r]];
            const Vec2 delta = target - a.position;
            const double d = norm(delta);
            if (d <= remaining) {
                if (d > 0.0) a.heading = delta / d;
                a.position = target;
                remaining -= d;
                if (route.size() == 1) break;
                plan.next[r] = (plan.next[r] + 1) % route.size();
            } else {
                a.heading = delta / d;
                a.position += a.heading * remaining;
                remaining = 0.0;
            }
        }
    }
    return true;
}

}  // namespace driftsearch
