#include "doctest.h"

#include <random>

#include "billiards/curve.hpp"
#include "billiards/error.hpp"
#include "support.hpp"

using namespace billiards;
using namespace testing;

namespace {

template <typename F>
ErrorCode error_of(F&& f) {
    try {
        f();
    } catch (const BilliardError& e) {
        return e.code();
    }
    FAIL("expected a BilliardError");
    return ErrorCode::InvalidArgument;
}

TrigPoly random_poly(std::mt19937_64& rng, int degree) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(degree + 1), b(degree + 1, 0.0);
    for (int k = 0; k <= degree; ++k) {
        a[k] = u(rng);
        if (k > 0) b[k] = u(rng);
    }
    return TrigPoly(a, b);
}

}  // namespace

TEST_SUITE("trig_poly") {

TEST_CASE("evaluation matches the defining sum") {
    std::mt19937_64 rng(7);
    const TrigPoly f = random_poly(rng, 9);
    for (double x : {-3.0, 0.0, 0.4, 2.5, 11.0}) {
        double direct = f.cos_coeff(0);
        for (int k = 1; k <= 9; ++k) direct += f.cos_coeff(k) * std::cos(k * x) + f.sin_coeff(k) * std::sin(k * x);
        CHECK(std::abs(f(x) - direct) < 1e-13);
    }
}

TEST_CASE("paired evaluation agrees with single evaluations") {
    std::mt19937_64 rng(8);
    const TrigPoly f = random_poly(rng, 200);
    const TrigPoly g = random_poly(rng, 130);
    for (double x : {0.1, 1.7, 4.0}) {
        const auto [fv, gv] = evaluate_pair(f, g, x);
        const auto slope = evaluate_pair_with_slope(f, g, x);
        CHECK(std::abs(fv - f(x)) < 1e-11);
        CHECK(std::abs(gv - g(x)) < 1e-11);
        CHECK(std::abs(slope[2] - f.derivative(x, 1)) < 1e-9);
        CHECK(std::abs(slope[3] - g.derivative(x, 1)) < 1e-9);
    }
}

TEST_CASE("derivatives agree with finite differences") {
    std::mt19937_64 rng(9);
    const TrigPoly f = random_poly(rng, 6);
    const double h = 1e-4;
    for (double x : {0.3, 2.0, 5.5}) {
        std::array<double, 5> d{};
        f.derivatives(x, d);
        for (int k = 1; k < 5; ++k) {
            const double fd = (f.derivative(x + h, k - 1) - f.derivative(x - h, k - 1)) / (2 * h);
            CHECK(std::abs(fd - d[k]) < 1e-6 * std::max(1.0, std::abs(d[k])));
            CHECK(std::abs(f.derivative(k)(x) - d[k]) < 1e-10 * std::max(1.0, std::abs(d[k])));
        }
    }
}

TEST_CASE("antiderivative, shift and product") {
    std::mt19937_64 rng(10);
    TrigPoly f = random_poly(rng, 5);
    f.set_coeff(0, 0.0, 0.0);
    const TrigPoly F = f.antiderivative();
    const TrigPoly g = random_poly(rng, 4);
    for (double x : {0.2, 1.1, 3.9}) {
        CHECK(std::abs(F.derivative(x, 1) - f(x)) < 1e-13);
        CHECK(std::abs(f.shifted(0.7)(x) - f(x - 0.7)) < 1e-13);
        CHECK(std::abs((f * g)(x) - f(x) * g(x)) < 1e-12);
    }
}

TEST_CASE("uniform least-squares fit reproduces a polynomial") {
    std::mt19937_64 rng(11);
    const TrigPoly f = random_poly(rng, 7);
    std::vector<double> samples(64);
    for (int j = 0; j < 64; ++j) samples[j] = f(kTwoPi * j / 64);
    const TrigPoly g = fit_uniform(samples, 7);
    for (int k = 0; k <= 7; ++k) {
        CHECK(std::abs(g.cos_coeff(k) - f.cos_coeff(k)) < 1e-13);
        CHECK(std::abs(g.sin_coeff(k) - f.sin_coeff(k)) < 1e-13);
    }
}

TEST_CASE("sup bound dominates the sampled maximum") {
    std::mt19937_64 rng(12);
    const TrigPoly f = random_poly(rng, 8);
    for (int order = 0; order <= 2; ++order) {
        double sampled = 0.0;
        for (int j = 0; j < 1000; ++j) sampled = std::max(sampled, std::abs(f.derivative(kTwoPi * j / 1000, order)));
        CHECK(sampled <= f.sup_bound(order));
    }
}

}  // TEST_SUITE

TEST_SUITE("curve_model") {

TEST_CASE("unit circle from constant curvature radius") {
    const ConvexCurve c = circle();
    for (double phi : {0.0, 0.5, 2.0, 4.0, 6.0}) {
        const Vec2 p = c.point(phi);
        CHECK(std::abs(p.x - std::sin(phi)) < 1e-14);
        CHECK(std::abs(p.y - (1 - std::cos(phi))) < 1e-14);
    }
    const FrameSample at = c.evaluate(kPi / 2);
    CHECK(std::abs(at.point.x - 1) < 1e-14);
    CHECK(std::abs(at.point.y - 1) < 1e-14);
    CHECK(std::abs(at.tangent.x) < 1e-15);
    CHECK(std::abs(at.tangent.y - 1) < 1e-15);
    CHECK(std::abs(at.normal.x + 1) < 1e-15);
    CHECK(std::abs(at.normal.y) < 1e-15);
    CHECK(at.radius == 1.0);
    const FrameSample zero = c.evaluate(0.0);
    CHECK(std::abs(zero.point.x) < 1e-15);
    CHECK(std::abs(zero.point.y) < 1e-15);
    CHECK(zero.normal.y == 1.0);
}

TEST_CASE("two-fold profile closes and keeps its mean length") {
    const ConvexCurve c = build_from_curvature(CurvatureProfile{TrigPoly({1, 0, 0.3}, {0, 0, 0})}, {0, 0});
    CHECK(c.closure_residual() < 1e-12);
    const Vec2 gap = c.point(kTwoPi) - c.point(0.0);
    CHECK(norm(gap) < 1e-12);
    CHECK(std::abs(c.arclength(kTwoPi) - kTwoPi) < 1e-12);
    CHECK(std::abs(c.total_arclength() - kTwoPi) < 1e-12);

    const CurvatureDerivatives d = c.curvature_derivatives(0.0);
    CHECK(std::abs(d.r - 1.3) < 1e-14);
    CHECK(std::abs(d.dr_dphi) < 1e-14);
    CHECK(std::abs(d.d2r_dphi2 + 1.2) < 1e-14);
    CHECK(std::abs(d.d2r_ds2 + 1.2 / (1.3 * 1.3)) < 1e-14);
}

TEST_CASE("construction errors") {
    CHECK(error_of([] { build_from_curvature(CurvatureProfile{TrigPoly({1, 0.5}, {0, 0})}, {0, 0}); }) ==
          ErrorCode::NotClosed);
    CHECK(error_of([] { build_from_curvature(CurvatureProfile{TrigPoly({1, 0, 1.5}, {0, 0, 0})}, {0, 0}); }) ==
          ErrorCode::NonConvex);
    ParametricSpec line;
    line.x = [](double t) { return std::array<double, 3>{t, 1.0, 0.0}; };
    line.y = [](double) { return std::array<double, 3>{0.0, 0.0, 0.0}; };
    line.t0 = 0.0;
    line.t1 = 1.0;
    CHECK(error_of([&] { build_from_parametric(line); }) == ErrorCode::NonConvex);
}

TEST_CASE("circle curvature derivatives vanish") {
    const CurvatureDerivatives d = circle().curvature_derivatives(1.3);
    CHECK(d.r == 1.0);
    CHECK(d.dr_dphi == 0.0);
    CHECK(d.d2r_dphi2 == 0.0);
    CHECK(d.dr_ds == 0.0);
    CHECK(d.d2r_ds2 == 0.0);
}

TEST_CASE("ellipse matches the closed-form curvature radius and support points") {
    for (auto [a, b] : {std::pair{2.0, 1.0}, std::pair{1.5, 1.0}}) {
        const ConvexCurve& c = ellipse(a, b);
        double worst_r = 0.0;
        double worst_p = 0.0;
        for (int j = 0; j < 997; ++j) {
            const double phi = kTwoPi * j / 997;
            worst_r = std::max(worst_r, std::abs(c.radius(phi) - ellipse_radius(a, b, phi)));
            worst_p = std::max(worst_p, norm(c.point(phi) - ellipse_point(a, b, phi)));
        }
        CHECK(worst_r < 1e-9);
        CHECK(worst_p < 1e-9);
    }
    const ConvexCurve& c = ellipse(2.0, 1.0);
    CHECK(std::abs(c.radius(kPi / 2) - 0.5) < 1e-9);
    CHECK(std::abs(c.curvature_derivatives(0.0).dr_ds) < 1e-9);
}

TEST_CASE("fig2 curve is accepted and reproduces its points") {
    const ConvexCurve& c = fig2();
    CHECK(c.convexity_margin() > 0.0);
    CHECK(c.closure_residual() < 1e-10 * c.total_arclength());
    // Top and bottom of x = cos t, y = 3/(2 - sin t) have tangent angles pi and 0.
    CHECK(norm(c.point(0.0) - Vec2{0.0, 1.0}) < 1e-9);
    CHECK(norm(c.point(kPi) - Vec2{0.0, 3.0}) < 1e-9);
}

TEST_CASE("arclength and its inverse") {
    const ConvexCurve c = circle();
    for (double phi : {0.0, 1.0, 3.0, 6.2}) CHECK(std::abs(c.arclength(phi) - phi) < 1e-14);
    for (const auto& nc : test_curves()) {
        for (double phi : {-2.0, 0.0, 0.7, 3.3, 6.0, 9.5}) {
            CHECK(std::abs(nc.curve->angle_of_arclength(nc.curve->arclength(phi)) - phi) < 1e-12);
        }
        double prev = nc.curve->arclength(0.0);
        for (int j = 1; j <= 400; ++j) {
            const double s = nc.curve->arclength(kTwoPi * j / 400);
            CHECK(s > prev);
            prev = s;
        }
        CHECK(std::abs(prev - nc.curve->total_arclength()) < 1e-12 * prev);
    }
}

TEST_CASE("property: arclength derivatives of the curvature radius") {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> coeff(-0.1, 0.1);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> a{1.0, 0.0}, b{0.0, 0.0};
        for (int k = 2; k <= 4; ++k) {
            a.push_back(coeff(rng));
            b.push_back(coeff(rng));
        }
        const ConvexCurve c = build_from_curvature(CurvatureProfile{TrigPoly(a, b)}, {0, 0});
        // d/ds = R^-1 d/dphi; central differences in phi at h and h/2, extrapolated.
        auto ds_of = [&](auto g, double phi) {
            auto central = [&](double h) { return (g(phi + h) - g(phi - h)) / (2 * h); };
            return (4 * central(5e-4) - central(1e-3)) / 3 / c.radius(phi);
        };
        for (double phi : {0.3, 1.7, 4.0}) {
            const CurvatureDerivatives d = c.curvature_derivatives(phi);
            const double dr_ds = ds_of([&](double x) { return c.radius(x); }, phi);
            const double d2r_ds2 = ds_of([&](double x) { return c.curvature_derivatives(x).dr_ds; }, phi);
            CHECK(std::abs(dr_ds - d.dr_ds) < 1e-9);
            CHECK(std::abs(d2r_ds2 - d.d2r_ds2) < 1e-9);
        }
    }
}

TEST_CASE("property: closure, frame consistency and parametric round trip") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> coeff(-0.05, 0.05);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> a{1.0, 0.0}, b{0.0, 0.0};
        for (int k = 2; k <= 5; ++k) {
            a.push_back(coeff(rng));
            b.push_back(coeff(rng));
        }
        const ConvexCurve c = build_from_curvature(CurvatureProfile{TrigPoly(a, b)}, {0.3, -0.2});
        CHECK(norm(c.point(kTwoPi) - c.point(0.0)) < 1e-10 * c.total_arclength());

        const double h = 1e-5;
        for (double phi : {0.4, 2.2, 4.9}) {
            const Vec2 fd = (1.0 / (2 * h)) * (c.point(phi + h) - c.point(phi - h));
            const Vec2 exact = c.radius(phi) * unit_tangent(phi);
            CHECK(norm(fd - exact) < 1e-8 * norm(exact));
        }

        ParametricSpec spec;
        spec.x = [&c](double t) {
            std::array<double, 2> r{};
            c.radius_derivatives(t, r);
            const Vec2 d1 = r[0] * unit_tangent(t);
            const Vec2 d2 = r[1] * unit_tangent(t) + r[0] * unit_normal(t);
            return std::array<double, 3>{c.point(t).x, d1.x, d2.x};
        };
        spec.y = [&c](double t) {
            std::array<double, 2> r{};
            c.radius_derivatives(t, r);
            const Vec2 d1 = r[0] * unit_tangent(t);
            const Vec2 d2 = r[1] * unit_tangent(t) + r[0] * unit_normal(t);
            return std::array<double, 3>{c.point(t).y, d1.y, d2.y};
        };
        const ConvexCurve back = build_from_parametric(spec);
        double worst = 0.0;
        for (int j = 0; j < 500; ++j) {
            const double phi = kTwoPi * j / 500;
            worst = std::max(worst, std::abs(back.radius(phi) - c.radius(phi)));
        }
        CHECK(worst < 1e-8);
    }
}

}  // TEST_SUITE
