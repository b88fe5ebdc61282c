// Coverage as drifting deposit particles, and its sensor-smoothed grid field.
#pragma once

#include <cmath>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "driftsearch/agent.hpp"
#include "driftsearch/domain_grid.hpp"
#include "driftsearch/flow.hpp"
#include "driftsearch/splat.hpp"

namespace driftsearch {

struct CoverageParticle {
    Vec2 position;
    double weight = 0.0;  // agent-hours
};

struct CoverageState {
    std::vector<CoverageParticle> particles;
    std::vector<double> searched_hours;  // indexed by agent id
    double sigma_km = 3.0;

    double total_weight() const {
        double acc = 0.0;
        for (const auto& p : particles) acc += p.weight;
        return acc;
    }
    double total_searched() const {
        double acc = 0.0;
        for (double h : searched_hours) acc += h;
        return acc;
    }
};

/// One particle of weight dt per active agent at its current position.
inline void deposit(CoverageState& state, std::span<const AgentState> agents, double dt_hours) {
    ensure(dt_hours > 0.0, "deposit: dt must be positive");
    for (const AgentState& a : agents) {
        if (!a.active) continue;
        ensure(a.id >= 0, "deposit: negative agent id");
        if (state.searched_hours.size() <= static_cast<std::size_t>(a.id)) state.searched_hours.resize(a.id + 1, 0.0);
        state.particles.push_back({a.position, dt_hours});
        state.searched_hours[a.id] += dt_hours;
    }
}

inline void drift_coverage(CoverageState& state, const VelocityField& field, double t_from, double t_to,
                           const IntegrationOptions& opts = {}) {
    ensure(t_to >= t_from, "drift_coverage: negative interval");
    if (t_to == t_from) return;
    for (std::size_t k = 0; k < state.particles.size(); ++k) {
        try {
            state.particles[k].position = integrate(field, state.particles[k].position, t_from, t_to, opts);
        } catch (const IntegrationError& e) {
            throw IntegrationError("drift_coverage: particle " + std::to_string(k) + ": " + e.what());
        }
    }
}

/// c_sigma: every particle splatted with a truncated Gaussian of scale sigma,
/// rescaled so its grid integral equals its weight.
inline ScalarField smooth(const CoverageState& state, const GridSpec& grid) {
    ScalarField out(grid);
    for (const CoverageParticle& p : state.particles)
        splat_gaussian(out, p.position, p.weight, state.sigma_km, KernelBoundary::Rescale);
    return out;
}

/// Greedy merge of particles closer than `radius` into their weighted centroid.
/// Total weight is preserved exactly up to summation order.
inline void merge_colocated(CoverageState& state, double radius) {
    if (state.particles.size() < 2 || radius <= 0.0) return;
    struct Acc {
        Vec2 moment;
        double weight;
        Vec2 anchor;
    };
    std::vector<Acc> merged;
    std::unordered_map<long long, std::vector<std::size_t>> buckets;
    auto key = [](long long i, long long j) { return (i << 32) ^ (j & 0xffffffffLL); };
    for (const CoverageParticle& p : state.particles) {
        const long long ci = static_cast<long long>(std::floor(p.position.x / radius));
        const long long cj = static_cast<long long>(std::floor(p.position.y / radius));
        std::size_t target = merged.size();
        for (long long di = -1; di <= 1 && target == merged.size(); ++di) {
            for (long long dj = -1; dj <= 1 && target == merged.size(); ++dj) {
                auto it = buckets.find(key(ci + di, cj + dj));
                if (it == buckets.end()) continue;
                for (std::size_t m : it->second) {
                    if (distance(merged[m].anchor, p.position) < radius) {
                        target = m;
                        break;
                    }
                }
            }
        }
        if (target == merged.size()) {
            merged.push_back({p.position * p.weight, p.weight, p.position});
            buckets[key(ci, cj)].push_back(target);
        } else {
            merged[target].moment += p.position * p.weight;
            merged[target].weight += p.weight;
        }
    }
    std::vector<CoverageParticle> out;
    out.reserve(merged.size());
    for (const Acc& a : merged) out.push_back({a.moment / a.weight, a.weight});
    state.particles = std::move(out);
}

}  // namespace driftsearch
