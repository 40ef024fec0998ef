#include "billiards/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "billiards/error.hpp"

namespace billiards {

namespace {

// Grid minimum of a trigonometric polynomial, refined until the Lipschitz
// slack from the derivative bound cannot flip its sign.
double certified_minimum(const TrigPoly& p) {
    const double lip = p.sup_bound(1);
    for (int n = std::max(2048, 32 * p.degree()); n <= (1 << 22); n *= 4) {
        double m = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) m = std::min(m, p(kTwoPi * j / n));
        const double slack = lip * kPi / n;
        if (m <= 0.0 || m - slack > 0.0) return m;
    }
    double m = std::numeric_limits<double>::infinity();
    const int n = 1 << 22;
    for (int j = 0; j < n; ++j) m = std::min(m, p(kTwoPi * j / n));
    return m;
}

// Drops the round-off plateau of a converged fit: harmonics past the last one
// that stands clearly above the noise level of the top quarter.
TrigPoly chop_noise_tail(const TrigPoly& p) {
    const int deg = p.degree();
    if (deg < 16) return p;
    auto median_mag = [&](int from, int to) {
        std::vector<double> m;
        for (int k = from; k <= to; ++k) m.push_back(std::hypot(p.cos_coeff(k), p.sin_coeff(k)));
        std::nth_element(m.begin(), m.begin() + m.size() / 2, m.end());
        return m[m.size() / 2];
    };
    const double noise = median_mag(3 * deg / 4, deg);
    const double before = median_mag(deg / 2, 3 * deg / 4 - 1);
    const double scale = std::abs(p.cos_coeff(0));
    // Keep everything unless the tail is a flat round-off plateau.
    if (noise > 1e-13 * scale || before > 10.0 * noise) return p;
    const double threshold = std::max(4.0 * noise, 1e-17 * scale);
    int last = 0;
    for (int k = 1; k <= deg; ++k) {
        if (std::hypot(p.cos_coeff(k), p.sin_coeff(k)) > threshold) last = k;
    }
    std::vector<double> a(p.cos_coeffs().begin(), p.cos_coeffs().begin() + last + 1);
    std::vector<double> b(p.sin_coeffs().begin(), p.sin_coeffs().begin() + last + 1);
    return TrigPoly(std::move(a), std::move(b));
}

}  // namespace

FrameSample ConvexCurve::evaluate(double phi) const {
    return {point(phi), unit_tangent(phi), unit_normal(phi), radius_(phi)};
}

Vec2 ConvexCurve::point(double phi) const {
    const auto [x, y] = evaluate_pair(x_, y_, phi);
    return Vec2{x, y} + offset_;
}

void ConvexCurve::point_derivatives(double phi, std::span<Vec2> out) const {
    if (out.size() == 2) {
        const auto v = evaluate_pair_with_slope(x_, y_, phi);
        out[0] = Vec2{v[0], v[1]} + offset_;
        out[1] = {v[2], v[3]};
        return;
    }
    std::vector<double> dx(out.size());
    std::vector<double> dy(out.size());
    x_.derivatives(phi, dx);
    y_.derivatives(phi, dy);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = {dx[k], dy[k]};
    if (!out.empty()) out[0] += offset_;
}

CurvatureDerivatives ConvexCurve::curvature_derivatives(double phi) const {
    std::array<double, 3> d{};
    radius_.derivatives(phi, d);
    CurvatureDerivatives c;
    c.r = d[0];
    c.dr_dphi = d[1];
    c.d2r_dphi2 = d[2];
    // ds = R dphi
    c.dr_ds = d[1] / d[0];
    c.d2r_ds2 = (d[2] * d[0] - d[1] * d[1]) / (d[0] * d[0] * d[0]);
    return c;
}

double ConvexCurve::arclength(double phi) const {
    return radius_.cos_coeff(0) * phi + s_periodic_(phi) - s_offset_;
}

double ConvexCurve::angle_of_arclength(double s) const {
    const double mean = radius_.cos_coeff(0);
    double lo = (s - s_bound_) / mean - 1e-12;
    double hi = (s + s_bound_) / mean + 1e-12;
    double phi = std::clamp(s / mean, lo, hi);
    for (int it = 0; it < 100; ++it) {
        const double f = arclength(phi) - s;
        if (f > 0.0) hi = phi; else lo = phi;
        double next = phi - f / radius_(phi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - phi);
        phi = next;
        if (step <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(phi))) break;
    }
    return phi;
}

ConvexCurve build_from_curvature(const CurvatureProfile& profile, Vec2 basepoint,
                                 const BuildOptions& options) {
    const TrigPoly& r = profile.radius;
    const double mean = r.cos_coeff(0);
    if (!(mean > 0.0)) fail(ErrorCode::NonConvex, "mean curvature radius must be positive");
    const double h1 = std::hypot(r.cos_coeff(1), r.sin_coeff(1));
    if (h1 > options.closure_tol * mean) {
        fail(ErrorCode::NotClosed, "closure violated: first-harmonic coefficient " + std::to_string(h1) +
                                       " exceeds tolerance");
    }
    ConvexCurve c;
    c.radius_ = r;
    if (c.radius_.degree() >= 1) c.radius_.set_coeff(1, 0.0, 0.0);
    c.radius_ = c.radius_.trimmed();

    c.min_radius_ = certified_minimum(c.radius_);
    if (!(c.min_radius_ > 0.0)) {
        fail(ErrorCode::NonConvex, "curvature radius is not positive everywhere (min " +
                                       std::to_string(c.min_radius_) + ")");
    }

    c.x_ = (c.radius_ * TrigPoly::cosine(1)).antiderivative();
    c.y_ = (c.radius_ * TrigPoly::sine(1)).antiderivative();
    TrigPoly fluct = c.radius_;
    fluct.set_coeff(0, 0.0, 0.0);
    c.s_periodic_ = fluct.antiderivative();
    c.s_offset_ = c.s_periodic_(0.0);
    c.s_bound_ = 2.0 * c.s_periodic_.sup_bound(0);
    c.base_ = basepoint;
    c.offset_ = basepoint - Vec2{c.x_(0.0), c.y_(0.0)};
    c.closure_residual_ = norm(c.point(kTwoPi) - c.point(0.0));
    return c;
}

ParametricSpec ellipse_spec(double a, double b) {
    if (!(a > 0.0 && b > 0.0)) fail(ErrorCode::InvalidArgument, "ellipse half-axes must be positive");
    ParametricSpec s;
    s.x = [a](double t) { return std::array<double, 3>{a * std::cos(t), -a * std::sin(t), -a * std::cos(t)}; };
    s.y = [b](double t) { return std::array<double, 3>{b * std::sin(t), b * std::cos(t), -b * std::sin(t)}; };
    return s;
}

ParametricSpec fig2_spec() {
    ParametricSpec s;
    s.x = [](double t) { return std::array<double, 3>{std::cos(t), -std::sin(t), -std::cos(t)}; };
    s.y = [](double t) {
        const double q = 2.0 - std::sin(t);
        const double c = std::cos(t);
        return std::array<double, 3>{3.0 / q, 3.0 * c / (q * q),
                                     -3.0 * std::sin(t) / (q * q) + 6.0 * c * c / (q * q * q)};
    };
    return s;
}

ProfileFit fit_periodic(const std::function<double(double)>& f, const FitOptions& options) {
    ProfileFit best;
    best.residual = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int deg = options.min_degree; deg <= options.max_degree; deg *= 2) {
        const int n = 4 * deg;
        std::vector<double> samples(n);
        double scale = 0.0;
        for (int j = 0; j < n; ++j) {
            samples[j] = f(kTwoPi * j / n);
            scale = std::max(scale, std::abs(samples[j]));
        }
        TrigPoly p = fit_uniform(samples, deg);
        double res = 0.0;
        for (int j = 0; j < n; ++j) {
            const double x = kTwoPi * (j + 0.5) / n;
            res = std::max(res, std::abs(f(x) - p(x)));
        }
        res /= std::max(scale, std::numeric_limits<double>::min());
        if (res < best.residual) {
            stalled = (res > 0.5 * best.residual) ? stalled + 1 : 0;
            best = {std::move(p), res};
        } else {
            ++stalled;
        }
        if (best.residual < options.target_residual) break;
        // Round-off floor reached: more harmonics only add noise.
        if (stalled >= 2 && best.residual < options.accept_residual) break;
    }
    if (!(best.residual < options.accept_residual)) {
        fail(ErrorCode::ResamplingFailure,
             "trigonometric fit residual " + std::to_string(best.residual) + " above tolerance");
    }
    return {chop_noise_tail(best.profile), best.residual};
}

namespace {

struct OrientedSample {
    Vec2 p, d1, d2;
};

class ParametricInverter {
public:
    explicit ParametricInverter(const ParametricSpec& spec) : spec_(spec) {
        const int m = 4096;
        const double span = spec.t1 - spec.t0;
        if (!(span > 0.0)) fail(ErrorCode::InvalidArgument, "empty parameter interval");

        int positive = 0;
        int negative = 0;
        double perimeter = 0.0;
        std::vector<double> kappa(m);
        for (int j = 0; j < m; ++j) {
            const auto s = raw(spec.t0 + span * j / m);
            const double speed = norm(s.d1);
            if (!(speed > 0.0)) fail(ErrorCode::NonConvex, "parametrization is not regular");
            kappa[j] = cross(s.d1, s.d2) / (speed * speed * speed);
            perimeter += speed * span / m;
        }
        perimeter_ = perimeter;
        for (double k : kappa) {
            if (k * perimeter > 1e-9) ++positive;
            else if (k * perimeter < -1e-9) ++negative;
        }
        if (positive != m && negative != m) fail(ErrorCode::NonConvex, "curvature changes sign or vanishes");
        reversed_ = negative == m;

        if (norm(raw(spec.t1).p - raw(spec.t0).p) > 1e-9 * perimeter) {
            fail(ErrorCode::NotClosed, "parametric curve is not closed");
        }

        ts_.resize(m + 1);
        phis_.resize(m + 1);
        for (int j = 0; j <= m; ++j) {
            ts_[j] = spec.t0 + span * j / m;
            const auto s = sample(ts_[j]);
            const double a = std::atan2(s.d1.y, s.d1.x);
            phis_[j] = j == 0 ? a : phis_[j - 1] + wrap_angle(a - phis_[j - 1]);
        }
        if (std::abs(phis_[m] - phis_[0] - kTwoPi) > 1e-6) {
            fail(ErrorCode::NonConvex, "tangent does not turn exactly once");
        }
    }

    double perimeter() const { return perimeter_; }

    OrientedSample sample(double t) const {
        if (!reversed_) return raw(t);
        auto s = raw(spec_.t0 + spec_.t1 - t);
        s.d1 = -s.d1;
        return s;
    }

    /// Parameter t at which the tangent angle equals psi (mod 2pi).
    double param_of_angle(double psi) const {
        const double target = phis_.front() + reduce_angle(psi - phis_.front());
        auto it = std::upper_bound(phis_.begin(), phis_.end(), target);
        std::size_t j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - phis_.begin())) - 1;
        j = std::min(j, phis_.size() - 2);
        double lo = ts_[j];
        double hi = ts_[j + 1];
        double t = lo + (hi - lo) * std::clamp((target - phis_[j]) / (phis_[j + 1] - phis_[j]), 0.0, 1.0);
        for (int it2 = 0; it2 < 60; ++it2) {
            const auto s = sample(t);
            const double ang = phis_[j] + wrap_angle(std::atan2(s.d1.y, s.d1.x) - phis_[j]);
            const double f = ang - target;
            if (f > 0.0) hi = t; else lo = t;
            const double dphi = cross(s.d1, s.d2) / dot(s.d1, s.d1);
            double next = t - f / dphi;
            if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
            const double step = std::abs(next - t);
            t = next;
            if (step <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) break;
        }
        return t;
    }

    double radius_at(double psi) const {
        const auto s = sample(param_of_angle(psi));
        const double speed = norm(s.d1);
        return speed * speed * speed / cross(s.d1, s.d2);
    }

private:
    OrientedSample raw(double t) const {
        const auto x = spec_.x(t);
        const auto y = spec_.y(t);
        return {{x[0], y[0]}, {x[1], y[1]}, {x[2], y[2]}};
    }

    const ParametricSpec& spec_;
    bool reversed_ = false;
    double perimeter_ = 0.0;
    std::vector<double> ts_;
    std::vector<double> phis_;
};

}  // namespace

ConvexCurve build_from_parametric(const ParametricSpec& spec, const FitOptions& options) {
    const ParametricInverter inv(spec);
    const ProfileFit fit = fit_periodic([&](double psi) { return inv.radius_at(psi); }, options);

    const Vec2 base = inv.sample(inv.param_of_angle(0.0)).p;
    BuildOptions build;
    build.closure_tol = std::max(build.closure_tol, 10.0 * fit.residual);
    ConvexCurve curve = build_from_curvature(CurvatureProfile{fit.profile}, base, build);

    double worst = 0.0;
    for (int j = 0; j < 64; ++j) {
        const double psi = kTwoPi * (j + 0.37) / 64.0;
        worst = std::max(worst, norm(curve.point(psi) - inv.sample(inv.param_of_angle(psi)).p));
    }
    if (worst > 1e-8 * inv.perimeter()) {
        fail(ErrorCode::ResamplingFailure,
             "reconstructed curve deviates from the input by " + std::to_string(worst));
    }
    return curve;
}

}  // namespace billiards
