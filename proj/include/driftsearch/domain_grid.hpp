// Rectangular search domain, cell-centred scalar fields and the cosine
// spectral basis with negative-index Sobolev weights.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "driftsearch/errors.hpp"
#include "driftsearch/geometry.hpp"

namespace driftsearch {

/// Axis-aligned rectangle in km.
class Domain {
public:
    Domain(double x_min, double x_max, double y_min, double y_max)
        : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max) {
        ensure(std::isfinite(x_min) && std::isfinite(x_max) && std::isfinite(y_min) && std::isfinite(y_max),
               "domain bounds must be finite");
        ensure(x_max > x_min, "domain requires x_max > x_min");
        ensure(y_max > y_min, "domain requires y_max > y_min");
    }

    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    double y_min() const { return y_min_; }
    double y_max() const { return y_max_; }
    double width() const { return x_max_ - x_min_; }
    double height() const { return y_max_ - y_min_; }
    double area() const { return width() * height(); }
    Vec2 center() const { return {0.5 * (x_min_ + x_max_), 0.5 * (y_min_ + y_max_)}; }

    bool contains(Vec2 p) const {
        return p.x >= x_min_ && p.x <= x_max_ && p.y >= y_min_ && p.y <= y_max_;
    }
    Vec2 clamp(Vec2 p) const {
        return {std::clamp(p.x, x_min_, x_max_), std::clamp(p.y, y_min_, y_max_)};
    }

    friend bool operator==(const Domain&, const Domain&) = default;

private:
    double x_min_, x_max_, y_min_, y_max_;
};

/// Cell-centred uniform grid over a domain.
class GridSpec {
public:
    GridSpec(Domain domain, int nx, int ny) : domain_(domain), nx_(nx), ny_(ny) {
        ensure(nx >= 2 && ny >= 2, "grid requires nx >= 2 and ny >= 2");
    }

    const Domain& domain() const { return domain_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::size_t size() const { return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_); }
    double dx() const { return domain_.width() / nx_; }
    double dy() const { return domain_.height() / ny_; }
    double cell_area() const { return dx() * dy(); }

    double x_center(int i) const { return domain_.x_min() + (i + 0.5) * dx(); }
    double y_center(int j) const { return domain_.y_min() + (j + 0.5) * dy(); }
    Vec2 center(int i, int j) const { return {x_center(i), y_center(j)}; }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i);
    }

    // Cell containing p after clamping into the domain.
    int cell_i(double x) const {
        return std::clamp(static_cast<int>(std::floor((x - domain_.x_min()) / dx())), 0, nx_ - 1);
    }
    int cell_j(double y) const {
        return std::clamp(static_cast<int>(std::floor((y - domain_.y_min()) / dy())), 0, ny_ - 1);
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
    Domain domain_;
    int nx_, ny_;
};

/// Grid-sampled function; values stored row-major with x fastest.
class ScalarField {
public:
    explicit ScalarField(GridSpec grid, double fill = 0.0) : grid_(grid), values_(grid.size(), fill) {}
    ScalarField(GridSpec grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        ensure(values_.size() == grid_.size(), "field value count does not match grid");
    }

    const GridSpec& grid() const { return grid_; }
    const Domain& domain() const { return grid_.domain(); }

    double& at(int i, int j) { return values_[grid_.index(i, j)]; }
    double at(int i, int j) const { return values_[grid_.index(i, j)]; }
    double& operator[](std::size_t k) { return values_[k]; }
    double operator[](std::size_t k) const { return values_[k]; }
    std::size_t size() const { return values_.size(); }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    /// Midpoint-rule integral over the domain, summed in index order.
    double integral() const {
        double acc = 0.0;
        for (double v : values_) acc += v;
        return acc * grid_.cell_area();
    }

    double max_value() const { return *std::max_element(values_.begin(), values_.end()); }
    double min_value() const { return *std::min_element(values_.begin(), values_.end()); }

    ScalarField& operator*=(double s) {
        for (double& v : values_) v *= s;
        return *this;
    }
    ScalarField& operator+=(const ScalarField& o) {
        ensure(o.grid_ == grid_, "field grids differ");
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
        return *this;
    }

private:
    GridSpec grid_;
    std::vector<double> values_;
};

inline void require_same_grid(const ScalarField& a, const ScalarField& b, const char* op) {
    if (!(a.grid() == b.grid())) throw ConfigError(std::string(op) + ": fields are on different grids");
}

/// Negative-index Sobolev weight (1 + |k|^2)^beta.
inline double sobolev_weight(double k_norm_sq, double beta) { return std::pow(1.0 + k_norm_sq, beta); }

/// L2-orthonormal cosine basis
///   f_k(x, y) = h_kx h_ky cos(kx pi (x - x_min) / Lx) cos(ky pi (y - y_min) / Ly)
/// for integer wave numbers 0 <= kx, ky < modes. Every f_k has zero normal
/// derivative on the domain boundary.
class SpectralBasis {
public:
    SpectralBasis(Domain domain, int modes, double beta) : domain_(domain), modes_(modes), beta_(beta) {
        ensure(modes >= 1, "spectral basis needs at least one mode");
        ensure(beta < 0.0, "Sobolev index beta must be negative");
        weights_.resize(static_cast<std::size_t>(modes) * static_cast<std::size_t>(modes));
        for (int ky = 0; ky < modes; ++ky)
            for (int kx = 0; kx < modes; ++kx)
                weights_[index(kx, ky)] = sobolev_weight(double(kx * kx + ky * ky), beta);
    }

    const Domain& domain() const { return domain_; }
    int modes() const { return modes_; }
    double beta() const { return beta_; }
    std::size_t size() const { return weights_.size(); }
    std::size_t index(int kx, int ky) const {
        return static_cast<std::size_t>(ky) * static_cast<std::size_t>(modes_) + static_cast<std::size_t>(kx);
    }
    double weight(int kx, int ky) const { return weights_[index(kx, ky)]; }

    double x_norm(int k) const { return std::sqrt((k == 0 ? 1.0 : 2.0) / domain_.width()); }
    double y_norm(int k) const { return std::sqrt((k == 0 ? 1.0 : 2.0) / domain_.height()); }
    double x_wavenumber(int k) const { return k * std::numbers::pi / domain_.width(); }
    double y_wavenumber(int k) const { return k * std::numbers::pi / domain_.height(); }

    double evaluate(int kx, int ky, Vec2 p) const {
        return x_norm(kx) * std::cos(x_wavenumber(kx) * (p.x - domain_.x_min())) * y_norm(ky) *
               std::cos(y_wavenumber(ky) * (p.y - domain_.y_min()));
    }

private:
    Domain domain_;
    int modes_;
    double beta_;
    std::vector<double> weights_;
};

struct SpectralCoefficients {
    int modes = 0;
    std::vector<double> values;  // indexed like SpectralBasis::index

    double at(int kx, int ky) const {
        return values[static_cast<std::size_t>(ky) * static_cast<std::size_t>(modes) + static_cast<std::size_t>(kx)];
    }
    double& at(int kx, int ky) {
        return values[static_cast<std::size_t>(ky) * static_cast<std::size_t>(modes) + static_cast<std::size_t>(kx)];
    }
};

/// s_k = integral of f_k * field over the domain, by midpoint quadrature.
/// Separable evaluation: O(K nx ny + K^2 ny).
inline SpectralCoefficients transform(const ScalarField& field, const SpectralBasis& basis) {
    if (!(field.domain() == basis.domain())) throw ConfigError("transform: field and basis domains differ");
    const GridSpec& g = field.grid();
    const int K = basis.modes(), nx = g.nx(), ny = g.ny();

    std::vector<double> cx(static_cast<std::size_t>(K) * nx), cy(static_cast<std::size_t>(K) * ny);
    for (int k = 0; k < K; ++k) {
        for (int i = 0; i < nx; ++i)
            cx[static_cast<std::size_t>(k) * nx + i] =
                basis.x_norm(k) * std::cos(basis.x_wavenumber(k) * (g.x_center(i) - g.domain().x_min()));
        for (int j = 0; j < ny; ++j)
            cy[static_cast<std::size_t>(k) * ny + j] =
                basis.y_norm(k) * std::cos(basis.y_wavenumber(k) * (g.y_center(j) - g.domain().y_min()));
    }

    // Row transforms: partial[j][kx] = sum_i cx[kx][i] * field(i, j)
    std::vector<double> partial(static_cast<std::size_t>(ny) * K, 0.0);
    for (int j = 0; j < ny; ++j) {
        const double* row = field.values().data() + g.index(0, j);
        for (int kx = 0; kx < K; ++kx) {
            const double* c = cx.data() + static_cast<std::size_t>(kx) * nx;
            double acc = 0.0;
            for (int i = 0; i < nx; ++i) acc += c[i] * row[i];
            partial[static_cast<std::size_t>(j) * K + kx] = acc;
        }
    }

    SpectralCoefficients out{K, std::vector<double>(basis.size(), 0.0)};
    const double dA = g.cell_area();
    for (int ky = 0; ky < K; ++ky) {
        const double* c = cy.data() + static_cast<std::size_t>(ky) * ny;
        for (int kx = 0; kx < K; ++kx) {
            double acc = 0.0;
            for (int j = 0; j < ny; ++j) acc += c[j] * partial[static_cast<std::size_t>(j) * K + kx];
            out.at(kx, ky) = acc * dA;
        }
    }
    return out;
}

/// Phi = sum_k Lambda_k s_k^2.
inline double sobolev_norm(const SpectralCoefficients& coeffs, const SpectralBasis& basis) {
    ensure(coeffs.modes == basis.modes(), "sobolev_norm: coefficient/basis mode count differs");
    double acc = 0.0;
    for (std::size_t k = 0; k < coeffs.values.size(); ++k) {
        const double s = coeffs.values[k];
        acc += basis.weight(static_cast<int>(k % basis.modes()), static_cast<int>(k / basis.modes())) * s * s;
    }
    return acc;
}

struct PotentialSample {
    double value = 0.0;
    Vec2 gradient;
    bool clamped = false;  // query point was outside the domain
};

/// u(p) = sum_k Lambda_k s_k f_k(p) and its analytic gradient.
inline PotentialSample synthesize_potential(const SpectralCoefficients& coeffs, const SpectralBasis& basis, Vec2 point) {
    ensure(coeffs.modes == basis.modes(), "synthesize_potential: coefficient/basis mode count differs");
    const Domain& d = basis.domain();
    PotentialSample out;
    out.clamped = !d.contains(point);
    const Vec2 p = d.clamp(point);

    const int K = basis.modes();
    std::vector<double> fx(K), dfx(K), fy(K), dfy(K);
    for (int k = 0; k < K; ++k) {
        const double wx = basis.x_wavenumber(k), ax = wx * (p.x - d.x_min());
        fx[k] = basis.x_norm(k) * std::cos(ax);
        dfx[k] = -basis.x_norm(k) * wx * std::sin(ax);
        const double wy = basis.y_wavenumber(k), ay = wy * (p.y - d.y_min());
        fy[k] = basis.y_norm(k) * std::cos(ay);
        dfy[k] = -basis.y_norm(k) * wy * std::sin(ay);
    }
    for (int ky = 0; ky < K; ++ky) {
        for (int kx = 0; kx < K; ++kx) {
            const double c = basis.weight(kx, ky) * coeffs.at(kx, ky);
            if (c == 0.0) continue;
            out.value += c * fx[kx] * fy[ky];
            out.gradient.x += c * dfx[kx] * fy[ky];
            out.gradient.y += c * fx[kx] * dfy[ky];
        }
    }
    return out;
}

}  // namespace driftsearch
