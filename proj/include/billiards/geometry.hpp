#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace billiards {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2& operator+=(Vec2 o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    Vec2& operator-=(Vec2 o) {
        x -= o.x;
        y -= o.y;
        return *this;
    }
    friend Vec2 operator+(Vec2 a, Vec2 b) { return a += b; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return a -= b; }
    friend Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Unit tangent of a counterclockwise curve at tangent angle phi.
inline Vec2 unit_tangent(double phi) { return {std::cos(phi), std::sin(phi)}; }
/// Inward unit normal, the tangent rotated by +pi/2.
inline Vec2 unit_normal(double phi) { return {-std::sin(phi), std::cos(phi)}; }

/// Reduces an angle to [0, 2*pi).
inline double reduce_angle(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r -= kTwoPi;
    return r;
}

/// Reduces an angle to (-pi, pi].
inline double wrap_angle(double a) {
    double r = reduce_angle(a + kPi) - kPi;
    if (r <= -kPi) r += kTwoPi;
    return r;
}

/// Distance between two angles on a circle of the given period.
inline double circular_distance(double a, double b, double period = kTwoPi) {
    double d = std::fmod(std::abs(a - b), period);
    return std::min(d, period - d);
}

}  // namespace billiards
