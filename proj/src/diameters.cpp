#include "billiards/diameters.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "billiards/error.hpp"

namespace billiards {

namespace {

struct ChordJet {
    double l = 0.0;
    double dl = 0.0;
    double d2l = 0.0;
};

ChordJet chord_jet(const ConvexCurve& curve, double phi) {
    std::array<double, 2> ra{};
    std::array<double, 2> rb{};
    curve.radius_derivatives(phi, ra);
    curve.radius_derivatives(phi + kPi, rb);
    const Vec2 diff = curve.point(phi) - curve.point(phi + kPi);
    const Vec2 t = unit_tangent(phi);
    const Vec2 n = unit_normal(phi);
    const double sum = ra[0] + rb[0];
    ChordJet j;
    j.l = norm(diff);
    j.dl = sum * dot(t, diff) / j.l;
    const double second = dot((ra[1] + rb[1]) * t + sum * n, diff);
    j.d2l = (second + sum * sum - j.dl * j.dl) / j.l;
    return j;
}

double refine_root(const ConvexCurve& curve, double lo, double hi, double flo) {
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
        const ChordJet j = chord_jet(curve, x);
        if ((j.dl < 0.0) == (flo < 0.0)) lo = x; else hi = x;
        double next = j.d2l != 0.0 ? x - j.dl / j.d2l : 0.5 * (lo + hi);
        if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - x);
        x = next;
        if (step < 1e-15 || hi - lo < 1e-15) break;
    }
    return x;
}

}  // namespace

ChordValue chord_function(const ConvexCurve& curve, double phi) {
    const ChordJet j = chord_jet(curve, phi);
    return {j.l, j.dl};
}

StabilityClass classify(double length, double r0, double rpi, double tol) {
    StabilityClass c;
    c.sum_gap = length - (r0 + rpi);
    c.product_gap = (length - r0) * (length - rpi);
    if (std::abs(c.sum_gap) <= tol * length) {
        c.kind = Stability::Parabolic;
    } else if (c.sum_gap > 0.0) {
        c.kind = Stability::Hyperbolic;
    } else if (std::abs(c.product_gap) <= tol * length * length) {
        c.kind = Stability::Parabolic;
    } else {
        c.kind = c.product_gap < 0.0 ? Stability::Hyperbolic : Stability::Elliptic;
    }
    return c;
}

StabilityClass classify(const Diameter& d, double tol) { return classify(d.length, d.r0, d.rpi, tol); }

Diameter diameter_at(const ConvexCurve& curve, double phi0, double tol) {
    Diameter d;
    d.phi0 = phi0;
    d.length = chord_function(curve, phi0).length;
    d.r0 = curve.radius(phi0);
    d.rpi = curve.radius(phi0 + kPi);
    d.lpp = second_derivative_at(d);
    d.stability = classify(d, tol);
    if (d.stability.kind == Stability::Elliptic) d.gamma = rotation_angle(d);
    return d;
}

std::vector<Diameter> find_diameters(const ConvexCurve& curve, int grid, double tol) {
    if (grid < 64) fail(ErrorCode::InvalidArgument, "diameter scan grid must have at least 64 points");
    std::vector<double> xs(grid + 1);
    std::vector<double> fs(grid + 1);
    double biggest = 0.0;
    for (int k = 0; k <= grid; ++k) {
        xs[k] = kPi * k / grid;
        fs[k] = k < grid ? chord_function(curve, xs[k]).derivative : fs[0];
        biggest = std::max(biggest, std::abs(fs[k]));
    }
    const double total = curve.total_arclength();
    if (biggest < 1e-10 * total) {
        fail(ErrorCode::Continuum, "chord function is constant: every antipodal pair is a diameter");
    }

    std::vector<double> roots;
    for (int k = 0; k < grid; ++k) {
        if (fs[k] == 0.0) {
            roots.push_back(xs[k]);
            continue;
        }
        if ((fs[k] < 0.0) == (fs[k + 1] < 0.0) || fs[k + 1] == 0.0) continue;
        roots.push_back(refine_root(curve, xs[k], xs[k + 1], fs[k]));
    }
    for (double& r : roots) {
        r = std::fmod(r, kPi);
        if (r < 0.0) r += kPi;
        if (kPi - r < 1e-13) r = 0.0;
    }
    std::sort(roots.begin(), roots.end());
    std::vector<double> unique;
    for (double r : roots) {
        const bool seen = std::any_of(unique.begin(), unique.end(),
                                      [&](double u) { return circular_distance(u, r, kPi) < 1e-9; });
        if (!seen) unique.push_back(r);
    }

    std::vector<Diameter> out;
    out.reserve(unique.size());
    for (double r : unique) out.push_back(diameter_at(curve, r, tol));
    return out;
}

double second_derivative_at(const Diameter& d) {
    const double sum = d.r0 + d.rpi;
    return -sum * (d.length - sum) / d.length;
}

TangentMatrix dt2_matrix(const Diameter& d) {
    const double l = d.length;
    TangentMatrix first;
    first << l - d.r0, l, l - (d.r0 + d.rpi), l - d.rpi;
    TangentMatrix second;
    second << l - d.rpi, l, l - (d.r0 + d.rpi), l - d.r0;
    return (second * first) / (d.r0 * d.rpi);
}

TangentMatrix dt2_matrix_sp(const Diameter& d) {
    // s = R0 (phi - phi0) and p = -theta to first order at the base point.
    const Eigen::Vector2d scale(d.r0, -1.0);
    return scale.asDiagonal() * dt2_matrix(d) * scale.cwiseInverse().asDiagonal();
}

double rotation_cosine(double length, double r0, double rpi) {
    return 2.0 * (length - r0) * (length - rpi) / (r0 * rpi) - 1.0;
}

double rotation_angle(const Diameter& d) {
    if (d.stability.kind != Stability::Elliptic) {
        fail(ErrorCode::NotElliptic, "rotation angle requires an elliptic diameter");
    }
    return std::acos(std::clamp(rotation_cosine(d.length, d.r0, d.rpi), -1.0, 1.0));
}

Resonance is_resonant(double gamma, double tol) {
    double g = reduce_angle(gamma);
    if (g > kPi) g = kTwoPi - g;
    const double d4 = std::abs(g - 0.5 * kPi);
    const double d3 = std::abs(g - 2.0 * kPi / 3.0);
    Resonance r;
    r.distance = std::min(d3, d4);
    if (r.distance < tol) {
        r.resonant = true;
        r.order = d3 <= d4 ? 3 : 4;
    }
    return r;
}

}  // namespace billiards
