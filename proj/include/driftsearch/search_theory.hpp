// Optimal-search quantities: exponential detection law, probability of
// detection, the log-density "water level" alpha for a coverage budget, and
// the two controller mismatch fields.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "driftsearch/domain_grid.hpp"
#include "driftsearch/errors.hpp"

namespace driftsearch {

/// F(c) = 1 - exp(-c).
inline double detection_function(double c) {
    if (!(c >= 0.0)) throw std::domain_error("detection_function: coverage must be non-negative");
    return -std::expm1(-c);
}

/// P_d = integral of p F(c_sigma).
inline double detection_probability(const ScalarField& p, const ScalarField& c_sigma) {
    require_same_grid(p, c_sigma, "detection_probability");
    double acc = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) acc += p[k] * detection_function(c_sigma[k]);
    return acc * p.grid().cell_area();
}

/// Cells with p at or below this are outside the support of p.
inline double default_p_floor(const GridSpec& grid) { return 1e-12 / grid.cell_area(); }

struct KoopmanPlan {
    double alpha = 0.0;
    ScalarField optimal_coverage;  // max(ln p - alpha, 0), zero off-support
    double budget = 0.0;           // agent-hours
};

/// Solves integral of max(ln p - alpha, 0) = budget over the support of p.
/// The left side is piecewise linear and decreasing in alpha, so the root is
/// found exactly by sorting the log-densities and locating the active segment.
inline KoopmanPlan solve_alpha(const ScalarField& p, double total_budget, double p_floor) {
    ensure(total_budget >= 0.0 && std::isfinite(total_budget), "solve_alpha: budget must be finite and >= 0");
    std::vector<double> logs;
    logs.reserve(p.size());
    for (std::size_t k = 0; k < p.size(); ++k)
        if (p[k] > p_floor) logs.push_back(std::log(p[k]));
    ensure(!logs.empty(), "solve_alpha: target density has no support above the floor");
    std::sort(logs.begin(), logs.end(), std::greater<>());

    const double dA = p.grid().cell_area();
    const double target = total_budget / dA;
    double alpha = logs.front();
    if (total_budget > 0.0) {
        double prefix = 0.0;
        for (std::size_t m = 1; m <= logs.size(); ++m) {
            prefix += logs[m - 1];
            const double next = m < logs.size() ? logs[m] : -std::numeric_limits<double>::infinity();
            // Coverage volume (in cell units) if alpha dropped to the next level.
            const double volume_at_next = prefix - static_cast<double>(m) * next;
            if (volume_at_next >= target) {
                alpha = (prefix - target) / static_cast<double>(m);
                break;
            }
        }
    }

    KoopmanPlan plan{alpha, ScalarField(p.grid()), total_budget};
    for (std::size_t k = 0; k < p.size(); ++k)
        if (p[k] > p_floor) plan.optimal_coverage[k] = std::max(std::log(p[k]) - alpha, 0.0);
    return plan;
}

/// Posterior target density after unsuccessful search with coverage c:
/// p e^{-c}, renormalised.
inline ScalarField posterior(const ScalarField& p, const ScalarField& c) {
    require_same_grid(p, c, "posterior");
    ScalarField out(p.grid());
    for (std::size_t k = 0; k < p.size(); ++k) out[k] = p[k] * std::exp(-c[k]);
    const double mass = out.integral();
    ensure(mass > 0.0, "posterior: no probability mass left");
    out *= 1.0 / mass;
    return out;
}

enum class MismatchKind { Mdsmc, Dsmc };

struct MismatchField {
    ScalarField field;
    MismatchKind kind;
};

/// s_sigma = max(ln p - alpha - c_sigma, 0); zero where p is below the floor.
inline MismatchField mismatch_mdsmc(const ScalarField& p, double alpha, const ScalarField& c_sigma, double p_floor) {
    require_same_grid(p, c_sigma, "mismatch_mdsmc");
    MismatchField out{ScalarField(p.grid()), MismatchKind::Mdsmc};
    for (std::size_t k = 0; k < p.size(); ++k)
        if (p[k] > p_floor) out.field[k] = std::max(std::log(p[k]) - alpha - c_sigma[k], 0.0);
    return out;
}

/// s = p - coverage / effort, where effort = N t in agent-hours. Zero effort
/// means no search yet, so s = p.
inline MismatchField mismatch_dsmc(const ScalarField& p, const ScalarField& coverage, double effort_agent_hours) {
    require_same_grid(p, coverage, "mismatch_dsmc");
    ensure(effort_agent_hours >= 0.0, "mismatch_dsmc: effort must be non-negative");
    MismatchField out{p, MismatchKind::Dsmc};
    if (effort_agent_hours == 0.0) return out;
    const double inv = 1.0 / effort_agent_hours;
    for (std::size_t k = 0; k < p.size(); ++k) out.field[k] -= coverage[k] * inv;
    return out;
}

inline MismatchField mismatch_dsmc(const ScalarField& p, const ScalarField& coverage, int n_agents, double t_hours) {
    ensure(n_agents >= 0 && t_hours >= 0.0, "mismatch_dsmc: N and t must be non-negative");
    return mismatch_dsmc(p, coverage, n_agents * t_hours);
}

}  // namespace driftsearch
