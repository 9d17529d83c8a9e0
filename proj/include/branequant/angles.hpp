#pragma once

#include <cmath>
#include <stdexcept>

namespace branequant {

struct Vec2 {
    double x = 0, y = 0;
    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    double norm2() const { return x * x + y * y; }
};

/// Gradient of arg(u) with respect to (u.x, u.y).
inline Vec2 grad_arg(Vec2 u) {
    double n = u.norm2();
    return {-u.y / n, u.x / n};
}

/// Angle function on the closed upper half-plane:
///   phi(z, w) = arg(z - w) + arg(z - conj(w)).
/// Identically zero (mod 2pi) when z lies on the real axis. A straight
/// edge a -> b contributes d phi(z_a, z_b), a wavy edge d phi(z_b, z_a).
inline double angle_halfplane(Vec2 z, Vec2 w) {
    Vec2 a = z - w;
    Vec2 b = z - Vec2{w.x, -w.y};
    if (a.norm2() == 0 || b.norm2() == 0)
        throw std::domain_error("angle_halfplane: coincident points");
    return std::atan2(a.y, a.x) + std::atan2(b.y, b.x);
}

/// d phi / d z for the half-plane angle.
inline Vec2 angle_halfplane_dz(Vec2 z, Vec2 w) {
    Vec2 g1 = grad_arg(z - w);
    Vec2 g2 = grad_arg(z - Vec2{w.x, -w.y});
    return g1 + g2;
}

/// d phi / d w for the half-plane angle.
inline Vec2 angle_halfplane_dw(Vec2 z, Vec2 w) {
    Vec2 g1 = grad_arg(z - w);
    Vec2 g2 = grad_arg(z - Vec2{w.x, -w.y});
    // z - conj(w) depends on w as (-1, +1) per component
    return {-g1.x - g2.x, -g1.y + g2.y};
}

/// Reflected angle function on the closed first quadrant:
///   phi_{sigma,tau}(z, w) = arg(z-w) + sigma arg(z-conj(w))
///                         + tau arg(z+conj(w)) + sigma tau arg(z+w).
/// As a form it vanishes in z on the real axis iff sigma=+1, in z on the
/// imaginary axis iff tau=+1, in w on the real axis iff sigma=-1 and in w
/// on the imaginary axis iff tau=-1.
inline double angle_quadrant(int sigma, int tau, Vec2 z, Vec2 w) {
    if ((sigma != 1 && sigma != -1) || (tau != 1 && tau != -1))
        throw std::invalid_argument("angle_quadrant: signs must be +-1");
    Vec2 r1 = z - w;
    Vec2 r2 = z - Vec2{w.x, -w.y};
    Vec2 r3 = z + Vec2{w.x, -w.y};
    Vec2 r4 = z + w;
    if (r1.norm2() == 0 || r2.norm2() == 0 || r3.norm2() == 0 || r4.norm2() == 0)
        throw std::domain_error("angle_quadrant: coincident points");
    return std::atan2(r1.y, r1.x) + sigma * std::atan2(r2.y, r2.x) +
           tau * std::atan2(r3.y, r3.x) + sigma * tau * std::atan2(r4.y, r4.x);
}

inline Vec2 angle_quadrant_dz(int sigma, int tau, Vec2 z, Vec2 w) {
    Vec2 g1 = grad_arg(z - w);
    Vec2 g2 = grad_arg(z - Vec2{w.x, -w.y});
    Vec2 g3 = grad_arg(z + Vec2{w.x, -w.y});
    Vec2 g4 = grad_arg(z + w);
    return g1 + sigma * g2 + tau * g3 + (sigma * tau) * g4;
}

inline Vec2 angle_quadrant_dw(int sigma, int tau, Vec2 z, Vec2 w) {
    Vec2 g1 = grad_arg(z - w);
    Vec2 g2 = grad_arg(z - Vec2{w.x, -w.y});
    Vec2 g3 = grad_arg(z + Vec2{w.x, -w.y});
    Vec2 g4 = grad_arg(z + w);
    // per-reflection dependence of the argument on (w.x, w.y)
    return Vec2{-g1.x, -g1.y} + sigma * Vec2{-g2.x, +g2.y} +
           tau * Vec2{+g3.x, -g3.y} + (sigma * tau) * Vec2{+g4.x, +g4.y};
}

} // namespace branequant
