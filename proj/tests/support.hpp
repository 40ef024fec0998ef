#pragma once

#include <cmath>
#include <deque>
#include <random>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "billiards/billiard_map.hpp"
#include "billiards/curve.hpp"
#include "billiards/geometry.hpp"

namespace testing {

using namespace billiards;

inline ConvexCurve circle(double r = 1.0, Vec2 base = {0.0, 0.0}) {
    return build_from_curvature(CurvatureProfile{TrigPoly(r)}, base);
}

// Built once per process; fitting fig2 is the slowest constructor.
inline const ConvexCurve& fig2() {
    static const ConvexCurve c = build_from_parametric(fig2_spec());
    return c;
}

inline const ConvexCurve& ellipse(double a, double b) {
    struct Entry {
        double a, b;
        ConvexCurve curve;
    };
    static std::deque<Entry> cache;
    for (const Entry& e : cache)
        if (e.a == a && e.b == b) return e.curve;
    cache.push_back({a, b, build_from_parametric(ellipse_spec(a, b))});
    return cache.back().curve;
}

struct NamedCurve {
    std::string name;
    const ConvexCurve* curve;
};

inline std::vector<NamedCurve> test_curves() {
    static const ConvexCurve unit = circle();
    return {{"circle", &unit},
            {"ellipse(1.5,1)", &ellipse(1.5, 1.0)},
            {"ellipse(2,1)", &ellipse(2.0, 1.0)},
            {"fig2", &fig2()}};
}

// Curvature radius of x = a cos t, y = b sin t at tangent angle phi.
inline double ellipse_radius(double a, double b, double phi) {
    const double q = a * a * std::sin(phi) * std::sin(phi) + b * b * std::cos(phi) * std::cos(phi);
    return a * a * b * b / std::pow(q, 1.5);
}

// Point of the centred ellipse whose outward normal is (sin phi, -cos phi).
inline Vec2 ellipse_point(double a, double b, double phi) {
    const double nx = std::sin(phi);
    const double ny = -std::cos(phi);
    const double q = std::sqrt(a * a * nx * nx + b * b * ny * ny);
    return {a * a * nx / q, b * b * ny / q};
}

// Signed arclength difference, folded into a half period.
inline double arclength_gap(const ConvexCurve& c, double s1, double s0) {
    const double total = c.total_arclength();
    double d = std::fmod(s1 - s0, total);
    if (d > 0.5 * total) d -= total;
    if (d < -0.5 * total) d += total;
    return d;
}

// Jacobian of T in (s, p) by central differences at h and h/2 with one Richardson level.
inline TangentMatrix richardson_jacobian(const ConvexCurve& c, SPState x, double h = 1e-5) {
    const SPState base = next_impact_sp(c, x);
    auto column = [&](int which, double step) {
        SPState plus = x;
        SPState minus = x;
        (which == 0 ? plus.s : plus.p) += step;
        (which == 0 ? minus.s : minus.p) -= step;
        const SPState a = next_impact_sp(c, plus);
        const SPState b = next_impact_sp(c, minus);
        const double ds = arclength_gap(c, a.s, base.s) - arclength_gap(c, b.s, base.s);
        return Eigen::Vector2d(ds / (2 * step), (a.p - b.p) / (2 * step));
    };
    TangentMatrix m;
    for (int j = 0; j < 2; ++j) m.col(j) = (4.0 * column(j, 0.5 * h) - column(j, h)) / 3.0;
    return m;
}

// Uniform phi, p uniform in (-pmax, pmax).
inline std::vector<PhaseState> random_states(std::mt19937_64& rng, int n, double pmax = 0.99) {
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    std::uniform_real_distribution<double> sine(-pmax, pmax);
    std::vector<PhaseState> out(n);
    for (auto& s : out) s = {angle(rng), std::asin(sine(rng))};
    return out;
}

// Impact by plain bisection on the side-of-ray function; slow and independent of the Newton solver.
inline double impact_by_bisection(const ConvexCurve& c, PhaseState s) {
    const Vec2 p0 = c.point(s.phi);
    const Vec2 d = std::cos(s.theta) * unit_normal(s.phi) + std::sin(s.theta) * unit_tangent(s.phi);
    auto side = [&](double u) { return cross(d, c.point(s.phi + u) - p0) / std::sin(0.5 * u); };
    double lo = 1e-9;
    double hi = kTwoPi - 1e-9;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (side(mid) < 0.0) lo = mid; else hi = mid;
    }
    return s.phi + 0.5 * (lo + hi);
}

inline double max_abs(const TangentMatrix& m) { return m.cwiseAbs().maxCoeff(); }

// Relative error per entry with a unit floor for entries that vanish.
inline double entry_error(const TangentMatrix& exact, const TangentMatrix& approx) {
    double worst = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            worst = std::max(worst, std::abs(exact(i, j) - approx(i, j)) / std::max(1.0, std::abs(exact(i, j))));
    return worst;
}

}  // namespace testing
