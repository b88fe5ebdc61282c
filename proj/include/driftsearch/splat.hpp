// Mass-conserving deposition of truncated Gaussian kernels onto a grid.
#pragma once

#include <cmath>
#include <vector>

#include "driftsearch/domain_grid.hpp"

namespace driftsearch {

enum class KernelBoundary {
    Rescale,  // truncated mass is redistributed over the in-grid footprint
    Reflect,  // mirror images across the domain edges, then rescale the residual
};

inline constexpr double kKernelTruncation = 4.0;  // support radius in units of sigma

/// Adds a kernel of total grid-integral `mass` centred at `center`. Points
/// outside the domain are deposited from their clamped position. If the
/// kernel misses every cell centre the mass goes into the containing cell.
inline void splat_gaussian(ScalarField& field, Vec2 center, double mass, double sigma, KernelBoundary boundary) {
    const GridSpec& g = field.grid();
    const Domain& d = g.domain();
    const Vec2 c = d.clamp(center);
    const double radius = kKernelTruncation * sigma;
    const double r2max = radius * radius;
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);

    const int i0 = g.cell_i(c.x - radius), i1 = g.cell_i(c.x + radius);
    const int j0 = g.cell_j(c.y - radius), j1 = g.cell_j(c.y + radius);

    // Mirror images only matter within one kernel radius of an edge.
    double xs[3] = {c.x}, ys[3] = {c.y};
    int nx_img = 1, ny_img = 1;
    if (boundary == KernelBoundary::Reflect) {
        if (c.x - d.x_min() < radius) xs[nx_img++] = 2.0 * d.x_min() - c.x;
        if (d.x_max() - c.x < radius) xs[nx_img++] = 2.0 * d.x_max() - c.x;
        if (c.y - d.y_min() < radius) ys[ny_img++] = 2.0 * d.y_min() - c.y;
        if (d.y_max() - c.y < radius) ys[ny_img++] = 2.0 * d.y_max() - c.y;
    }

    thread_local std::vector<double> w;
    w.assign(static_cast<std::size_t>(i1 - i0 + 1) * static_cast<std::size_t>(j1 - j0 + 1), 0.0);
    double total = 0.0;
    std::size_t k = 0;
    for (int j = j0; j <= j1; ++j) {
        const double yc = g.y_center(j);
        for (int i = i0; i <= i1; ++i, ++k) {
            const double xc = g.x_center(i);
            double acc = 0.0;
            for (int a = 0; a < nx_img; ++a) {
                const double ddx = xc - xs[a];
                for (int b = 0; b < ny_img; ++b) {
                    const double ddy = yc - ys[b];
                    const double r2 = ddx * ddx + ddy * ddy;
                    if (r2 <= r2max) acc += std::exp(-r2 * inv2s2);
                }
            }
            w[k] = acc;
            total += acc;
        }
    }

    const double dA = g.cell_area();
    if (total <= 0.0) {
        field.at(g.cell_i(c.x), g.cell_j(c.y)) += mass / dA;
        return;
    }
    const double scale = mass / (total * dA);
    k = 0;
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i, ++k)
            if (w[k] != 0.0) field.at(i, j) += w[k] * scale;
}

}  // namespace driftsearch
