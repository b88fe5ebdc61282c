// Planar vector and convex-polygon helpers shared by every module.
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace driftsearch {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.y * s}; }
    friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
    friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

// Row-major 2x2 matrix, used for flow-map Jacobians.
struct Mat2 {
    double a = 1.0, b = 0.0;
    double c = 0.0, d = 1.0;

    constexpr double det() const { return a * d - b * c; }
    static constexpr Mat2 identity() { return {}; }
};

using Polygon = std::vector<Vec2>;

struct BoundingBox {
    Vec2 lo;
    Vec2 hi;

    double width() const { return hi.x - lo.x; }
    double height() const { return hi.y - lo.y; }
    Vec2 center() const { return (lo + hi) * 0.5; }
};

inline BoundingBox bounding_box(std::span<const Vec2> pts) {
    if (pts.empty()) throw std::invalid_argument("bounding_box: no points");
    BoundingBox box{pts[0], pts[0]};
    for (const Vec2& p : pts) {
        box.lo.x = std::min(box.lo.x, p.x);
        box.lo.y = std::min(box.lo.y, p.y);
        box.hi.x = std::max(box.hi.x, p.x);
        box.hi.y = std::max(box.hi.y, p.y);
    }
    return box;
}

// Shoelace formula; positive for counterclockwise vertex order.
inline double signed_area(std::span<const Vec2> poly) {
    double acc = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) acc += cross(poly[i], poly[(i + 1) % n]);
    return 0.5 * acc;
}

inline double polygon_area(std::span<const Vec2> poly) { return std::abs(signed_area(poly)); }

// Strict convexity check allowing either orientation; collinear runs are rejected.
inline bool is_convex(std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    int sign = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 e1 = poly[(i + 1) % n] - poly[i];
        const Vec2 e2 = poly[(i + 2) % n] - poly[(i + 1) % n];
        const double z = cross(e1, e2);
        if (z == 0.0) return false;
        const int s = z > 0 ? 1 : -1;
        if (sign == 0) sign = s;
        else if (s != sign) return false;
    }
    return true;
}

// Inclusive point test for a counterclockwise convex polygon.
inline bool contains(std::span<const Vec2> ccw_poly, Vec2 p) {
    const std::size_t n = ccw_poly.size();
    if (n == 0) return false;
    if (n == 1) return p == ccw_poly[0];
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = ccw_poly[i];
        const Vec2 b = ccw_poly[(i + 1) % n];
        if (cross(b - a, p - a) < -1e-12 * std::max(1.0, norm(b - a) * norm(p - a))) return false;
    }
    return true;
}

inline Polygon counterclockwise(Polygon poly) {
    if (signed_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
    return poly;
}

/// Andrew's monotone chain. Returns the hull counterclockwise without repeated
/// endpoints. Degenerate inputs give one vertex (all points equal) or two
/// vertices (all points collinear).
inline Polygon convex_hull(std::span<const Vec2> points) {
    if (points.empty()) throw std::invalid_argument("convex_hull: no points");
    std::vector<Vec2> pts(points.begin(), points.end());
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;

    Polygon hull(2 * pts.size());
    std::size_t k = 0;
    for (const Vec2& p : pts) {
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    if (hull.size() == 2 && hull[0] == hull[1]) hull.resize(1);
    return hull;
}

}  // namespace driftsearch
