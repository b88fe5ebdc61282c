// Finite-time mixing classes ("hypergraph") from the determinant of the
// gradient of the time-averaged velocity
//   vbar(x) = (T^{t1,t2}(x) - x) / (t2 - t1).
// Cells with 0 <= det(grad vbar) <= 4 / (t2 - t1)^2 are mesoelliptic
// (rotation dominated); everything else is mesohyperbolic.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "driftsearch/domain_grid.hpp"
#include "driftsearch/errors.hpp"
#include "driftsearch/flow.hpp"

namespace driftsearch {

enum class MixingClass : unsigned char { Mesoelliptic = 0, Mesohyperbolic = 1 };

inline const char* to_string(MixingClass c) {
    return c == MixingClass::Mesoelliptic ? "mesoelliptic" : "mesohyperbolic";
}

/// Boundary values of d fall in the elliptic class.
inline MixingClass classify_determinant(double d, double interval_hours) {
    const double upper = 4.0 / (interval_hours * interval_hours);
    return (d >= 0.0 && d <= upper) ? MixingClass::Mesoelliptic : MixingClass::Mesohyperbolic;
}

struct HypergraphField {
    GridSpec grid;
    std::vector<double> determinant;  // per cell, 1/h^2
    std::vector<MixingClass> labels;
    double t1 = 0.0;
    double t2 = 0.0;

    double hyperbolic_fraction() const {
        std::size_t n = 0;
        for (MixingClass c : labels) n += c == MixingClass::Mesohyperbolic;
        return labels.empty() ? 0.0 : static_cast<double>(n) / static_cast<double>(labels.size());
    }
};

/// det of grad vbar at x. Falls back to a one-sided difference along any axis
/// where x +/- h leaves the domain.
inline double averaged_velocity_gradient_det(const VelocityField& field, const Domain& domain, Vec2 x, double t1,
                                             double t2, double h, const IntegrationOptions& opts = {}) {
    const double dt = t2 - t1;
    auto flow = [&](Vec2 p) { return integrate(field, p, t1, t2, opts); };
    Vec2 center{};
    bool have_center = false;
    auto column = [&](Vec2 e) {
        const Vec2 plus = x + e * h, minus = x - e * h;
        const bool has_plus = domain.contains(plus), has_minus = domain.contains(minus);
        if (has_plus && has_minus) return (flow(plus) - flow(minus)) / (2 * h);
        if (!have_center) {
            center = flow(x);
            have_center = true;
        }
        if (has_plus) return (flow(plus) - center) / h;
        if (has_minus) return (center - flow(minus)) / h;
        throw ConfigError("hypergraph: stencil h exceeds the domain size");
    };
    const Vec2 cx = column({1, 0});
    const Vec2 cy = column({0, 1});
    const Mat2 g{(cx.x - 1.0) / dt, cy.x / dt, cx.y / dt, (cy.y - 1.0) / dt};
    return g.det();
}

inline HypergraphField classify(const VelocityField& field, const GridSpec& grid, double t1, double t2,
                                double h = 0.5, const IntegrationOptions& opts = {}) {
    ensure(t2 > t1, "hypergraph: requires t2 > t1");
    ensure(h > 0.0, "hypergraph: stencil must be positive");
    HypergraphField out{grid, std::vector<double>(grid.size()), std::vector<MixingClass>(grid.size()), t1, t2};
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            const std::size_t k = grid.index(i, j);
            try {
                out.determinant[k] =
                    averaged_velocity_gradient_det(field, grid.domain(), grid.center(i, j), t1, t2, h, opts);
            } catch (const IntegrationError& e) {
                throw IntegrationError("hypergraph: cell (" + std::to_string(i) + ", " + std::to_string(j) +
                                       "): " + e.what());
            }
            out.labels[k] = classify_determinant(out.determinant[k], t2 - t1);
        }
    }
    return out;
}

}  // namespace driftsearch
