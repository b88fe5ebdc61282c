// Velocity fields and numerical flow maps.
//
// Positions are in km, times in hours, velocities in km/h. Flow maps are
// computed with an embedded Dormand-Prince 5(4) pair (local error per step
// bounded by an absolute tolerance in km); a fixed-step classical RK4 path is
// kept alongside for order verification.
#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "driftsearch/domain_grid.hpp"
#include "driftsearch/errors.hpp"
#include "driftsearch/geometry.hpp"

namespace driftsearch {

class VelocityField {
public:
    virtual ~VelocityField() = default;
    virtual Vec2 velocity(Vec2 x, double t) const = 0;
    /// False where the field has no data; velocity is zero there.
    virtual bool inside(Vec2 /*x*/) const { return true; }
};

class ZeroFlow final : public VelocityField {
public:
    Vec2 velocity(Vec2, double) const override { return {}; }
};

class UniformFlow final : public VelocityField {
public:
    explicit UniformFlow(Vec2 v) : v_(v) {}
    Vec2 velocity(Vec2, double) const override { return v_; }

private:
    Vec2 v_;
};

/// Solid-body rotation at angular rate omega (rad/h) about `center`.
class RigidRotation final : public VelocityField {
public:
    RigidRotation(Vec2 center, double omega) : center_(center), omega_(omega) {}
    Vec2 velocity(Vec2 x, double) const override {
        const Vec2 r = x - center_;
        return {-omega_ * r.y, omega_ * r.x};
    }

private:
    Vec2 center_;
    double omega_;
};

/// Hyperbolic stagnation point: v = (rate (x - cx), -rate (y - cy)).
class SaddleFlow final : public VelocityField {
public:
    SaddleFlow(Vec2 center, double rate) : center_(center), rate_(rate) {}
    Vec2 velocity(Vec2 x, double) const override {
        const Vec2 r = x - center_;
        return {rate_ * r.x, -rate_ * r.y};
    }

private:
    Vec2 center_;
    double rate_;
};

/// Periodically perturbed double gyre on a 2:1 rectangle. With s = (x - x0)/L,
/// r = (y - y0)/L and f(s, t) = eps sin(omega t) s^2 + (1 - 2 eps sin(omega t)) s:
///   u = -U sin(pi f) cos(pi r),  v = U cos(pi f) sin(pi r) df/ds
/// where L is the domain height and U the peak speed (km/h). The flow is
/// divergence-free and has no normal component on the rectangle boundary.
class DoubleGyre final : public VelocityField {
public:
    DoubleGyre(Domain domain, double peak_speed, double epsilon, double omega)
        : domain_(domain), speed_(peak_speed), epsilon_(epsilon), omega_(omega) {}

    Vec2 velocity(Vec2 x, double t) const override {
        const double L = domain_.height();
        const double s = (x.x - domain_.x_min()) / L;
        const double r = (x.y - domain_.y_min()) / L;
        const double a = epsilon_ * std::sin(omega_ * t);
        const double b = 1.0 - 2.0 * a;
        const double f = a * s * s + b * s;
        const double dfds = 2.0 * a * s + b;
        const double pi = std::numbers::pi;
        return {-speed_ * std::sin(pi * f) * std::cos(pi * r), speed_ * std::cos(pi * f) * std::sin(pi * r) * dfds};
    }

private:
    Domain domain_;
    double speed_, epsilon_, omega_;
};

/// Wraps another field and zeroes it outside a domain, so tracers that leave
/// the search domain freeze where they exit.
class DomainRestricted final : public VelocityField {
public:
    DomainRestricted(const VelocityField& inner, Domain domain) : inner_(&inner), domain_(domain) {}
    Vec2 velocity(Vec2 x, double t) const override {
        return domain_.contains(x) ? inner_->velocity(x, t) : Vec2{};
    }
    bool inside(Vec2 x) const override { return domain_.contains(x) && inner_->inside(x); }

private:
    const VelocityField* inner_;
    Domain domain_;
};

// ---------------------------------------------------------------------------
// Gridded velocity (OVF1 files)

inline constexpr double kKmPerDegree = 6371.0 * std::numbers::pi / 180.0;
inline constexpr double kKmhPerMs = 3.6;

namespace detail {

template <class T>
T to_little_endian(T v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        std::reverse(b, b + sizeof(T));
        std::memcpy(&v, b, sizeof(T));
        return v;
    }
}

template <class T>
void write_le(std::ostream& os, T v) {
    v = to_little_endian(v);
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_le(std::istream& is, const std::string& path) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw ConfigError("OVF1 file truncated: " + path);
    return to_little_endian(v);
}

}  // namespace detail

struct OvfHeader {
    std::int32_t nx = 0, ny = 0, nt = 0;
    double lon0 = 0, lat0 = 0, dlon = 0, dlat = 0, ref_lat = 0, t0_hours = 0, dt_hours = 0;
};

/// Velocity sampled on a lon/lat grid and converted to a local tangent plane:
/// node (i, j) sits at x = i dlon k cos(ref_lat), y = j dlat k (km, with k km
/// per degree). Bilinear in space, linear in time; times outside the frame
/// range clamp to the nearest frame, positions outside the grid give zero.
class GriddedVelocity final : public VelocityField {
public:
    GriddedVelocity(OvfHeader header, std::vector<float> u_ms, std::vector<float> v_ms)
        : h_(header) {
        ensure(h_.nx >= 2 && h_.ny >= 2 && h_.nt >= 1, "gridded velocity needs nx, ny >= 2 and nt >= 1");
        ensure(h_.dlon > 0 && h_.dlat > 0, "gridded velocity spacing must be positive");
        ensure(h_.nt == 1 || h_.dt_hours > 0, "gridded velocity time step must be positive");
        const std::size_t n = frame_size() * static_cast<std::size_t>(h_.nt);
        ensure(u_ms.size() == n && v_ms.size() == n, "gridded velocity array sizes do not match header");
        u_.resize(n);
        v_.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            u_[k] = kKmhPerMs * u_ms[k];
            v_[k] = kKmhPerMs * v_ms[k];
        }
        dx_ = h_.dlon * kKmPerDegree * std::cos(h_.ref_lat * std::numbers::pi / 180.0);
        dy_ = h_.dlat * kKmPerDegree;
    }

    const OvfHeader& header() const { return h_; }
    double dx_km() const { return dx_; }
    double dy_km() const { return dy_; }

    Vec2 to_local_km(double lon, double lat) const {
        return {(lon - h_.lon0) * kKmPerDegree * std::cos(h_.ref_lat * std::numbers::pi / 180.0),
                (lat - h_.lat0) * kKmPerDegree};
    }

    bool inside(Vec2 x) const override {
        return x.x >= 0.0 && x.y >= 0.0 && x.x <= dx_ * (h_.nx - 1) && x.y <= dy_ * (h_.ny - 1);
    }

    Vec2 velocity(Vec2 x, double t) const override {
        if (!inside(x)) return {};
        double ft = h_.nt == 1 ? 0.0 : (t - h_.t0_hours) / h_.dt_hours;
        ft = std::clamp(ft, 0.0, double(h_.nt - 1));
        const int f0 = std::min(static_cast<int>(ft), h_.nt - 1);
        const int f1 = std::min(f0 + 1, h_.nt - 1);
        const double wt = ft - f0;
        const Vec2 a = spatial(f0, x);
        if (f1 == f0 || wt == 0.0) return a;
        return a * (1.0 - wt) + spatial(f1, x) * wt;
    }

    /// Velocity components in m/s as stored on disk.
    std::vector<float> u_ms() const { return to_ms(u_); }
    std::vector<float> v_ms() const { return to_ms(v_); }

private:
    std::size_t frame_size() const { return static_cast<std::size_t>(h_.nx) * static_cast<std::size_t>(h_.ny); }

    Vec2 spatial(int frame, Vec2 x) const {
        const double fx = std::clamp(x.x / dx_, 0.0, double(h_.nx - 1));
        const double fy = std::clamp(x.y / dy_, 0.0, double(h_.ny - 1));
        const int i0 = std::min(static_cast<int>(fx), h_.nx - 2);
        const int j0 = std::min(static_cast<int>(fy), h_.ny - 2);
        const double wx = fx - i0, wy = fy - j0;
        const std::size_t base = frame_size() * static_cast<std::size_t>(frame);
        auto at = [&](const std::vector<double>& a, int i, int j) {
            return a[base + static_cast<std::size_t>(j) * h_.nx + static_cast<std::size_t>(i)];
        };
        auto bilinear = [&](const std::vector<double>& a) {
            return (1 - wx) * (1 - wy) * at(a, i0, j0) + wx * (1 - wy) * at(a, i0 + 1, j0) +
                   (1 - wx) * wy * at(a, i0, j0 + 1) + wx * wy * at(a, i0 + 1, j0 + 1);
        };
        return {bilinear(u_), bilinear(v_)};
    }

    static std::vector<float> to_ms(const std::vector<double>& a) {
        std::vector<float> out(a.size());
        for (std::size_t k = 0; k < a.size(); ++k) out[k] = static_cast<float>(a[k] / kKmhPerMs);
        return out;
    }

    OvfHeader h_;
    std::vector<double> u_, v_;  // km/h, frame-major, row-major south to north
    double dx_ = 0, dy_ = 0;
};

inline constexpr char kOvfMagic[4] = {'O', 'V', 'F', '1'};

inline GriddedVelocity read_ovf1(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open OVF1 file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kOvfMagic, 4) != 0) throw ConfigError("not an OVF1 file (bad magic): " + path);
    OvfHeader h;
    h.nx = detail::read_le<std::int32_t>(in, path);
    h.ny = detail::read_le<std::int32_t>(in, path);
    h.nt = detail::read_le<std::int32_t>(in, path);
    ensure(h.nx > 0 && h.ny > 0 && h.nt > 0, "OVF1 header has non-positive dimensions: " + path);
    for (double* f : {&h.lon0, &h.lat0, &h.dlon, &h.dlat, &h.ref_lat, &h.t0_hours, &h.dt_hours})
        *f = detail::read_le<double>(in, path);

    const std::size_t frame = static_cast<std::size_t>(h.nx) * static_cast<std::size_t>(h.ny);
    std::vector<float> u(frame * h.nt), v(frame * h.nt);
    for (int t = 0; t < h.nt; ++t) {
        for (std::size_t k = 0; k < frame; ++k) u[t * frame + k] = detail::read_le<float>(in, path);
        for (std::size_t k = 0; k < frame; ++k) v[t * frame + k] = detail::read_le<float>(in, path);
    }
    return GriddedVelocity(h, std::move(u), std::move(v));
}

inline void write_ovf1(std::ostream& out, const GriddedVelocity& field) {
    const OvfHeader& h = field.header();
    out.write(kOvfMagic, 4);
    detail::write_le(out, h.nx);
    detail::write_le(out, h.ny);
    detail::write_le(out, h.nt);
    for (double f : {h.lon0, h.lat0, h.dlon, h.dlat, h.ref_lat, h.t0_hours, h.dt_hours}) detail::write_le(out, f);
    const std::size_t frame = static_cast<std::size_t>(h.nx) * static_cast<std::size_t>(h.ny);
    const auto u = field.u_ms(), v = field.v_ms();
    for (int t = 0; t < h.nt; ++t) {
        for (std::size_t k = 0; k < frame; ++k) detail::write_le(out, u[t * frame + k]);
        for (std::size_t k = 0; k < frame; ++k) detail::write_le(out, v[t * frame + k]);
    }
}

// ---------------------------------------------------------------------------
// Integration

struct IntegrationOptions {
    double tol = 1e-6;              // local error bound per accepted step, km
    long max_steps = 1'000'000;     // accepted + rejected
};

struct IntegrationResult {
    Vec2 position;
    long steps = 0;
    bool left_field = false;  // stopped because the tracer exited the field's support
};

/// Adaptive Dormand-Prince 5(4) from t1 to t2 (t2 >= t1).
inline IntegrationResult integrate_detailed(const VelocityField& field, Vec2 x0, double t1, double t2,
                                            const IntegrationOptions& opts = {}) {
    if (!(t2 >= t1)) throw IntegrationError("integrate: requires t2 >= t1");
    IntegrationResult res{x0};
    if (t2 == t1) return res;
    if (!field.inside(x0)) {
        res.left_field = true;
        return res;
    }

    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    Vec2 x = x0;
    double t = t1;
    double h = t2 - t1;
    Vec2 k1 = field.velocity(x, t);
    long steps = 0;
    while (t < t2) {
        if (++steps > opts.max_steps) {
            std::ostringstream msg;
            msg << "integrate: step cap " << opts.max_steps << " exceeded at t=" << t << " h, x=(" << x.x << ", "
                << x.y << ") km, start=(" << x0.x << ", " << x0.y << "), h=" << h;
            throw IntegrationError(msg.str());
        }
        const bool last = t + h >= t2;
        if (last) h = t2 - t;

        const Vec2 k2 = field.velocity(x + h * (a21 * k1), t + h / 5);
        const Vec2 k3 = field.velocity(x + h * (a31 * k1 + a32 * k2), t + 3 * h / 10);
        const Vec2 k4 = field.velocity(x + h * (a41 * k1 + a42 * k2 + a43 * k3), t + 4 * h / 5);
        const Vec2 k5 = field.velocity(x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), t + 8 * h / 9);
        const Vec2 k6 = field.velocity(x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), t + h);
        const Vec2 xn = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Vec2 k7 = field.velocity(xn, t + h);
        const double err = h * norm(e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        if (!std::isfinite(err) || !std::isfinite(xn.x) || !std::isfinite(xn.y))
            throw IntegrationError("integrate: non-finite state");

        // Steps are sized for tol/2: sized for tol itself, a rotation period
        // drifts by about 1.3 tol.
        const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(0.5 * opts.tol / err, 0.2), 0.2, 5.0);
        if (err <= opts.tol) {
            t = last ? t2 : t + h;
            x = xn;
            k1 = k7;
            if (!field.inside(x)) {
                res.left_field = true;
                break;
            }
        }
        h *= factor;
        if (!(h > 0.0) || t + h == t) {
            if (t >= t2) break;
            throw IntegrationError("integrate: step size underflow");
        }
    }
    res.position = x;
    res.steps = steps;
    return res;
}

inline Vec2 integrate(const VelocityField& field, Vec2 x0, double t1, double t2, const IntegrationOptions& opts = {}) {
    return integrate_detailed(field, x0, t1, t2, opts).position;
}

/// Classical RK4 with n equal steps.
inline Vec2 integrate_rk4(const VelocityField& field, Vec2 x0, double t1, double t2, int n_steps) {
    ensure(n_steps >= 1, "integrate_rk4: n_steps must be positive");
    const double h = (t2 - t1) / n_steps;
    Vec2 x = x0;
    for (int s = 0; s < n_steps; ++s) {
        const double t = t1 + s * h;
        const Vec2 k1 = field.velocity(x, t);
        const Vec2 k2 = field.velocity(x + 0.5 * h * k1, t + 0.5 * h);
        const Vec2 k3 = field.velocity(x + 0.5 * h * k2, t + 0.5 * h);
        const Vec2 k4 = field.velocity(x + h * k3, t + h);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return x;
}

/// Jacobian of the flow map by central differences on a 4-point stencil.
inline Mat2 flow_map_gradient(const VelocityField& field, Vec2 x0, double t1, double t2, double h = 0.5,
                              const IntegrationOptions& opts = {}) {
    ensure(h > 0.0, "flow_map_gradient: stencil h must be positive");
    const Vec2 xp = integrate(field, x0 + Vec2{h, 0}, t1, t2, opts);
    const Vec2 xm = integrate(field, x0 - Vec2{h, 0}, t1, t2, opts);
    const Vec2 yp = integrate(field, x0 + Vec2{0, h}, t1, t2, opts);
    const Vec2 ym = integrate(field, x0 - Vec2{0, h}, t1, t2, opts);
    const Vec2 dx = (xp - xm) / (2 * h);
    const Vec2 dy = (yp - ym) / (2 * h);
    return {dx.x, dy.x, dx.y, dy.y};
}

}  // namespace driftsearch
