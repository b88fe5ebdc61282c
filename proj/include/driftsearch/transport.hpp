// Semi-Lagrangian target distribution: Halton-seeded tracers, advection by a
// velocity field, and kernel density estimation back onto the grid.
#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "driftsearch/domain_grid.hpp"
#include "driftsearch/errors.hpp"
#include "driftsearch/flow.hpp"
#include "driftsearch/geometry.hpp"
#include "driftsearch/splat.hpp"

namespace driftsearch {

/// Radical inverse of `index` in `base` (index >= 1 gives the usual Halton points).
inline double radical_inverse(std::uint64_t index, unsigned base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (index > 0) {
        r += f * static_cast<double>(index % base);
        index /= base;
        f *= inv;
    }
    return r;
}

inline Vec2 halton_point(std::uint64_t index) { return {radical_inverse(index, 2), radical_inverse(index, 3)}; }

/// Convex splash polygon (stored counterclockwise) entered at time t0.
class SplashRegion {
public:
    SplashRegion(Polygon vertices, double t0_hours) : t0_(t0_hours) {
        ensure(vertices.size() >= 3, "splash region needs at least 3 vertices");
        ensure(is_convex(vertices), "splash region polygon must be convex and non-degenerate");
        vertices_ = counterclockwise(std::move(vertices));
        ensure(polygon_area(vertices_) > 0.0, "splash region has zero area");
    }

    const Polygon& vertices() const { return vertices_; }
    double t0() const { return t0_; }
    double area() const { return polygon_area(vertices_); }
    bool contains(Vec2 p) const { return driftsearch::contains(vertices_, p); }

private:
    Polygon vertices_;
    double t0_;
};

/// Equal-weight particle set; each tracer carries mass 1/size().
struct TracerEnsemble {
    std::vector<Vec2> positions;
    double epoch = 0.0;  // hours

    std::size_t size() const { return positions.size(); }
    bool empty() const { return positions.empty(); }
    double weight() const { return positions.empty() ? 0.0 : 1.0 / static_cast<double>(positions.size()); }
};

/// First n accepted points of the (2,3)-Halton sequence over the region's
/// bounding box, keeping only points inside the polygon. The sequence index
/// keeps running across rejections.
inline TracerEnsemble seed_halton(const SplashRegion& region, std::size_t n) {
    TracerEnsemble out;
    out.epoch = region.t0();
    out.positions.reserve(n);
    const BoundingBox box = bounding_box(region.vertices());
    std::uint64_t index = 1;
    const std::uint64_t cap = 1000 * static_cast<std::uint64_t>(n) + 1000;
    while (out.positions.size() < n) {
        ensure(index < cap, "seed_halton: rejection sampling made no progress (degenerate polygon?)");
        const Vec2 h = halton_point(index++);
        const Vec2 p{box.lo.x + h.x * box.width(), box.lo.y + h.y * box.height()};
        if (region.contains(p)) out.positions.push_back(p);
    }
    return out;
}

inline TracerEnsemble advect(const TracerEnsemble& ensemble, const VelocityField& field, double t_end,
                             const IntegrationOptions& opts = {}) {
    ensure(t_end >= ensemble.epoch, "advect: t_end precedes ensemble epoch");
    TracerEnsemble out;
    out.epoch = t_end;
    out.positions.resize(ensemble.size());
    for (std::size_t k = 0; k < ensemble.size(); ++k) {
        try {
            out.positions[k] = integrate(field, ensemble.positions[k], ensemble.epoch, t_end, opts);
        } catch (const IntegrationError& e) {
            throw IntegrationError("advect: tracer " + std::to_string(k) + ": " + e.what());
        }
    }
    return out;
}

struct DensityEstimate {
    ScalarField field;
    bool degenerate = false;  // empty ensemble; field is identically zero
};

/// Truncated-Gaussian kernel density with mirror images at the domain edges.
/// Each tracer contributes exactly its weight, then the total is pinned to 1.
inline DensityEstimate density(const TracerEnsemble& ensemble, const GridSpec& grid, double bandwidth_km) {
    ensure(bandwidth_km > 0.0, "density: bandwidth must be positive");
    DensityEstimate out{ScalarField(grid)};
    if (ensemble.empty()) {
        out.degenerate = true;
        return out;
    }
    const double w = ensemble.weight();
    for (const Vec2& p : ensemble.positions) splat_gaussian(out.field, p, w, bandwidth_km, KernelBoundary::Reflect);
    out.field *= 1.0 / out.field.integral();
    return out;
}

// CSV: "# epoch_hours=<t>" then "id,x_km,y_km,weight".
inline std::string ensemble_to_csv(const TracerEnsemble& e) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "# epoch_hours=" << e.epoch << "\n";
    os << "id,x_km,y_km,weight\n";
    for (std::size_t k = 0; k < e.size(); ++k)
        os << k << ',' << e.positions[k].x << ',' << e.positions[k].y << ',' << e.weight() << '\n';
    return os.str();
}

inline TracerEnsemble ensemble_from_csv(std::istream& in, const std::string& origin = "<stream>") {
    TracerEnsemble e;
    std::string line;
    int line_no = 0;
    bool have_epoch = false, have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fail = [&](const std::string& why) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + why);
        };
        if (line[0] == '#') {
            const auto pos = line.find("epoch_hours=");
            if (pos == std::string::npos) continue;
            try {
                e.epoch = std::stod(line.substr(pos + 12));
            } catch (const std::exception&) {
                fail("bad epoch");
            }
            have_epoch = true;
            continue;
        }
        if (!have_header) {
            if (line != "id,x_km,y_km,weight") fail("expected header id,x_km,y_km,weight");
            have_header = true;
            continue;
        }
        std::istringstream row(line);
        std::string id, xs, ys, ws;
        if (!std::getline(row, id, ',') || !std::getline(row, xs, ',') || !std::getline(row, ys, ',') ||
            !std::getline(row, ws))
            fail("expected 4 columns");
        try {
            e.positions.push_back({std::stod(xs), std::stod(ys)});
        } catch (const std::exception&) {
            fail("non-numeric coordinate");
        }
        if (!std::isfinite(e.positions.back().x) || !std::isfinite(e.positions.back().y)) fail("non-finite position");
    }
    if (!have_epoch) throw ConfigError(origin + ": missing '# epoch_hours=' comment");
    return e;
}

}  // namespace driftsearch
