#include "billiards/birkhoff.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <random>
#include <string>
#include <tuple>

#include <Eigen/Dense>

#include "billiards/error.hpp"

namespace billiards {

using cd = std::complex<double>;

TangentMatrix Jet2D::linear() const {
    TangentMatrix m;
    m << s.coeff(1, 0), s.coeff(0, 1), p.coeff(1, 0), p.coeff(0, 1);
    return m;
}

namespace {

struct SeriesVec {
    Series3 x;
    Series3 y;
};

SeriesVec operator-(const SeriesVec& a, const SeriesVec& b) { return {a.x - b.x, a.y - b.y}; }
Series3 cross(const SeriesVec& a, const SeriesVec& b) { return a.x * b.y - a.y * b.x; }
Series3 dot(const SeriesVec& a, const SeriesVec& b) { return a.x * b.x + a.y * b.y; }

constexpr int kTaylor = Series3::kDegree + 1;

Series3 arclength_series(const ConvexCurve& curve, const Series3& phi) {
    const double c = phi.constant();
    std::array<double, kTaylor> t{};
    t[0] = curve.arclength(c);
    std::array<double, kTaylor - 1> r{};
    curve.radius_derivatives(c, r);
    for (int k = 1; k < kTaylor; ++k) t[k] = r[k - 1];
    to_taylor(t);
    return compose<double, 3>(phi, t);
}

Series3 radius_series(const ConvexCurve& curve, const Series3& phi) {
    std::array<double, kTaylor> t{};
    curve.radius_derivatives(phi.constant(), t);
    to_taylor(t);
    return compose<double, 3>(phi, t);
}

SeriesVec point_series(const ConvexCurve& curve, const Series3& phi) {
    std::array<Vec2, kTaylor> d{};
    curve.point_derivatives(phi.constant(), d);
    std::array<double, kTaylor> tx{};
    std::array<double, kTaylor> ty{};
    for (int k = 0; k < kTaylor; ++k) {
        tx[k] = d[k].x;
        ty[k] = d[k].y;
    }
    to_taylor(tx);
    to_taylor(ty);
    return {compose<double, 3>(phi, tx), compose<double, 3>(phi, ty)};
}

SeriesVec tangent_series(const Series3& phi) { return {cos(phi), sin(phi)}; }
SeriesVec normal_series(const Series3& phi) { return {-sin(phi), cos(phi)}; }

bool finite(const Series3& x) {
    for (int d = 0; d <= 3; ++d) {
        for (int b = 0; b <= d; ++b) {
            if (!std::isfinite(x.coeff(d - b, b))) return false;
        }
    }
    return true;
}

}  // namespace

std::pair<Series3, Series3> bounce_series(const ConvexCurve& curve, const Series3& s, const Series3& p) {
    if (!(std::abs(p.constant()) < 1.0)) fail(ErrorCode::SeriesSolveFailure, "|p| must be below 1");

    // Tangent angle of the departure point: Newton on s(phi) = s.
    Series3 phi0(curve.angle_of_arclength(s.constant()));
    for (int it = 0; it < 5; ++it) {
        const Series3 step = (arclength_series(curve, phi0) - s) / radius_series(curve, phi0);
        if (!finite(step)) fail(ErrorCode::SeriesSolveFailure, "departure angle series diverged");
        phi0 -= step;
    }
    const SeriesVec a0 = point_series(curve, phi0);
    const Series3 cos_theta = sqrt(1.0 - p * p);
    const SeriesVec t0 = tangent_series(phi0);
    const SeriesVec n0 = normal_series(phi0);
    const SeriesVec dir{cos_theta * n0.x + p * t0.x, cos_theta * n0.y + p * t0.y};

    const double base = reduce_angle(phi0.constant());
    const Impact hit = next_impact_detail(curve, {base, std::asin(p.constant())});
    Series3 phi1(phi0.constant() + (hit.phi_unreduced - base));
    for (int it = 0; it < 5; ++it) {
        const Series3 g = cross(dir, point_series(curve, phi1) - a0);
        const Series3 dg = radius_series(curve, phi1) * cross(dir, tangent_series(phi1));
        const Series3 step = g / dg;
        if (!finite(step)) fail(ErrorCode::SeriesSolveFailure, "impact angle series diverged");
        phi1 -= step;
    }
    return {arclength_series(curve, phi1), dot(dir, tangent_series(phi1))};
}

Jet2D jet3_orbit(const ConvexCurve& curve, const std::vector<PhaseState>& orbit) {
    if (orbit.empty()) fail(ErrorCode::InvalidArgument, "empty orbit");
    const SPState start = to_sp(curve, orbit.front());
    Series3 s = Series3::variable(0, start.s);
    Series3 p = Series3::variable(1, start.p);
    for (std::size_t k = 0; k < orbit.size(); ++k) std::tie(s, p) = bounce_series(curve, s, p);

    const double total = curve.total_arclength();
    double ds = s.constant() - start.s;
    ds -= total * std::round(ds / total);
    const double dp = p.constant() - start.p;
    if (std::abs(ds) > 1e-8 * total || std::abs(dp) > 1e-8) {
        fail(ErrorCode::SeriesSolveFailure, "orbit does not close: not a periodic point");
    }
    Jet2D jet{s, p};
    jet.s.set_constant(0.0);
    jet.p.set_constant(0.0);
    return jet;
}

namespace {

std::vector<PhaseState> diameter_orbit(const Diameter& d) {
    return {{reduce_angle(d.phi0), 0.0}, {reduce_angle(d.phi0 + kPi), 0.0}};
}

void require_elliptic(const Diameter& d) {
    if (d.stability.kind != Stability::Elliptic) {
        fail(ErrorCode::NotElliptic, "the diameter is " + std::string(to_string(d.stability.kind)));
    }
}

// 5-point central stencils on offsets -2..2 for derivative orders 0..3.
constexpr std::array<std::array<double, 5>, 4> kStencil = {{
    {0.0, 0.0, 1.0, 0.0, 0.0},
    {1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0},
    {-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0},
    {-0.5, 1.0, 0.0, -1.0, 0.5},
}};

Jet2D fd_jet_at_step(const ConvexCurve& curve, SPState base, int period, double h) {
    const double total = curve.total_arclength();
    std::array<std::array<double, 5>, 5> fs{};
    std::array<std::array<double, 5>, 5> fp{};
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            SPState x{base.s + (i - 2) * h, base.p + (j - 2) * h};
            for (int k = 0; k < period; ++k) x = next_impact_sp(curve, x);
            double ds = x.s - base.s;
            ds -= total * std::round(ds / total);
            fs[i][j] = ds;
            fp[i][j] = x.p - base.p;
        }
    }
    Jet2D jet;
    const double fact[4] = {1.0, 1.0, 2.0, 6.0};
    for (int deg = 1; deg <= 3; ++deg) {
        for (int b = 0; b <= deg; ++b) {
            const int a = deg - b;
            double vs = 0.0;
            double vp = 0.0;
            for (int i = 0; i < 5; ++i) {
                for (int j = 0; j < 5; ++j) {
                    const double w = kStencil[a][i] * kStencil[b][j];
                    vs += w * fs[i][j];
                    vp += w * fp[i][j];
                }
            }
            const double scale = std::pow(h, deg) * fact[a] * fact[b];
            jet.s.coeff(a, b) = vs / scale;
            jet.p.coeff(a, b) = vp / scale;
        }
    }
    return jet;
}

}  // namespace

Jet2D jet3_T2(const ConvexCurve& curve, const Diameter& d) {
    require_elliptic(d);
    return jet3_orbit(curve, diameter_orbit(d));
}

Jet2D jet3_T2_finite_difference(const ConvexCurve& curve, const Diameter& d, const FiniteDifferenceOptions& options) {
    require_elliptic(d);
    const SPState base = to_sp(curve, {reduce_angle(d.phi0), 0.0});
    const Jet2D coarse = fd_jet_at_step(curve, base, 2, options.step);
    const Jet2D fine = fd_jet_at_step(curve, base, 2, 0.5 * options.step);
    Jet2D out;
    for (int deg = 1; deg <= 3; ++deg) {
        for (int b = 0; b <= deg; ++b) {
            const int a = deg - b;
            // Third-derivative stencils are second order; the rest fourth order.
            const double w = (a == 3 || b == 3) ? 4.0 : 16.0;
            out.s.coeff(a, b) = (w * fine.s.coeff(a, b) - coarse.s.coeff(a, b)) / (w - 1.0);
            out.p.coeff(a, b) = (w * fine.p.coeff(a, b) - coarse.p.coeff(a, b)) / (w - 1.0);
        }
    }
    return out;
}

cd ComplexNormalCoeffs::coeff(int i, int j) const {
    switch (10 * i + j) {
        case 20: return c20;
        case 11: return c11;
        case 2: return c02;
        case 30: return c30;
        case 21: return c21;
        case 12: return c12;
        case 3: return c03;
        default: return {};
    }
}

namespace {

// Row vector l with l . x = z when x = w z + conj(w z).
std::pair<cd, cd> coordinate_functional(cd ws, cd wp) {
    const cd det = ws * std::conj(wp) - std::conj(ws) * wp;
    return {std::conj(wp) / det, -std::conj(ws) / det};
}

}  // namespace

ComplexNormalCoeffs complexify(const Jet2D& jet, const ComplexifyOptions& options) {
    const TangentMatrix a = jet.linear();
    const double half_trace = 0.5 * a.trace();
    if (!(std::abs(half_trace) < 1.0)) fail(ErrorCode::NotElliptic, "linear part is not elliptic");
    double gamma = std::acos(half_trace);
    const Resonance res = is_resonant(gamma, options.resonance_tol);
    if (res.resonant) {
        fail(ErrorCode::Resonant, "rotation angle is resonant (order " + std::to_string(res.order) + ")");
    }

    cd lambda = std::polar(1.0, gamma);
    // Two candidate kernel vectors of A - lambda I; keep the better scaled one.
    cd ws = a(0, 1);
    cd wp = lambda - a(0, 0);
    const cd ws2 = lambda - a(1, 1);
    const cd wp2 = a(1, 0);
    if (std::norm(ws2) + std::norm(wp2) > std::norm(ws) + std::norm(wp)) {
        ws = ws2;
        wp = wp2;
    }
    // omega(w, conj w) = 2i Im(ws conj(wp)) must be a positive multiple of i;
    // otherwise the conjugate eigenvector, with angle 2pi - gamma, is the right one.
    if ((ws * std::conj(wp)).imag() < 0.0) {
        gamma = kTwoPi - gamma;
        lambda = std::conj(lambda);
        ws = std::conj(ws);
        wp = std::conj(wp);
    }
    // Canonical phase: real positive s-component (p-component when s vanishes).
    const cd anchor = std::abs(ws) > 1e-12 * std::abs(wp) ? ws : wp;
    const cd rot = std::conj(anchor) / std::abs(anchor) * std::polar(1.0, options.phase);
    ws *= rot;
    wp *= rot;
    const double scale = 1.0 / std::sqrt(2.0 * (ws * std::conj(wp)).imag());
    ws *= scale;
    wp *= scale;

    ComplexNormalCoeffs out;
    out.gamma = gamma;
    out.w_s = ws;
    out.w_p = wp;

    const ComplexSeries3 z = ComplexSeries3::variable(0, 0.0);
    const ComplexSeries3 zb = ComplexSeries3::variable(1, 0.0);
    const ComplexSeries3 ds = z * ws + zb * std::conj(ws);
    const ComplexSeries3 dp = z * wp + zb * std::conj(wp);
    const ComplexSeries3 s1 = substitute(jet.s, ds, dp);
    const ComplexSeries3 p1 = substitute(jet.p, ds, dp);
    const auto [ls, lp] = coordinate_functional(ws, wp);
    const ComplexSeries3 zz = s1 * ls + p1 * lp;
    const cd unrot = std::conj(lambda);
    out.c20 = unrot * zz.coeff(2, 0);
    out.c11 = unrot * zz.coeff(1, 1);
    out.c02 = unrot * zz.coeff(0, 2);
    out.c30 = unrot * zz.coeff(3, 0);
    out.c21 = unrot * zz.coeff(2, 1);
    out.c12 = unrot * zz.coeff(1, 2);
    out.c03 = unrot * zz.coeff(0, 3);
    return out;
}

Jet2D reconstruct(const ComplexNormalCoeffs& c) {
    const auto [ls, lp] = coordinate_functional(c.w_s, c.w_p);
    const ComplexSeries3 ds = ComplexSeries3::variable(0, 0.0);
    const ComplexSeries3 dp = ComplexSeries3::variable(1, 0.0);
    const ComplexSeries3 z = ds * ls + dp * lp;
    const ComplexSeries3 zb = ds * std::conj(ls) + dp * std::conj(lp);
    ComplexSeries3 form;
    form.coeff(1, 0) = 1.0;
    for (int deg = 2; deg <= 3; ++deg) {
        for (int j = 0; j <= deg; ++j) form.coeff(deg - j, j) = c.coeff(deg - j, j);
    }
    const ComplexSeries3 zz = substitute(form, z, zb) * std::polar(1.0, c.gamma);
    Jet2D out;
    for (int deg = 1; deg <= 3; ++deg) {
        for (int b = 0; b <= deg; ++b) {
            const cd v = zz.coeff(deg - b, b);
            out.s.coeff(deg - b, b) = 2.0 * (c.w_s * v).real();
            out.p.coeff(deg - b, b) = 2.0 * (c.w_p * v).real();
        }
    }
    return out;
}

TwistResult tau1(const ComplexNormalCoeffs& c, double resonance_tol) {
    const Resonance res = is_resonant(c.gamma, resonance_tol);
    if (res.resonant) fail(ErrorCode::Resonant, "rotation angle is resonant (order " + std::to_string(res.order) + ")");
    const cd e = std::polar(1.0, c.gamma);
    const cd first = (2.0 * e + 1.0) / (e - 1.0);
    const cd second = 1.0 / (e * e * e - 1.0);
    const cd i(0.0, 1.0);
    const cd value = (c.c21 + 2.0 * std::norm(c.c20) * first + 2.0 * std::norm(c.c02) * second) / i;
    TwistResult r;
    r.tau1 = value.real();
    r.imag_residue = std::abs(value.imag());
    r.printed_form = (c.c21 + 2.0 * std::norm(c.c20) * (first + second)) / i;
    r.gamma = c.gamma;
    r.c20 = c.c20;
    r.c21 = c.c21;
    return r;
}

double tau1_real_form(const ComplexNormalCoeffs& c) {
    const double g = c.gamma;
    return c.c21.imag() - 3.0 * std::norm(c.c20) / std::tan(0.5 * g) - std::norm(c.c02) / std::tan(1.5 * g);
}

TwistResult twist_coefficient(const ConvexCurve& curve, const Diameter& d, const TwistOptions& options) {
    const Jet2D jet = jet3_T2(curve, d);
    ComplexifyOptions copt;
    copt.resonance_tol = options.resonance_tol;
    TwistResult r = tau1(complexify(jet, copt), options.resonance_tol);
    if (!options.cross_check) return r;

    const Jet2D fd = jet3_T2_finite_difference(curve, d);
    const double fd_tau = tau1(complexify(fd, copt), options.resonance_tol).tau1;
    r.oracle_residual = std::abs(fd_tau - r.tau1) / std::max(std::abs(r.tau1), 1e-300);

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    for (int k = 0; k < options.phases; ++k) {
        copt.phase = angle(rng);
        const double t = tau1(complexify(jet, copt), options.resonance_tol).tau1;
        r.phase_residual = std::max(r.phase_residual, std::abs(t - r.tau1));
    }
    return r;
}

double tau1_slope(double length, double r0, double rpi) {
    const double l = length;
    const double eps = 1e-12 * std::max({std::abs(l), std::abs(r0), std::abs(rpi)});
    if (std::abs(l) <= eps || std::abs(l - r0) <= eps || std::abs(l - rpi) <= eps || std::abs(l - r0 - rpi) <= eps) {
        fail(ErrorCode::Degenerate, "slope undefined: L, L - R0, L - Rpi or L - R0 - Rpi vanishes");
    }
    return -(1.0 / 16.0) * l * (l - rpi) / ((l - r0) * (l - r0 - rpi));
}

IslandProbe island_probe(const ConvexCurve& curve, const std::vector<PhaseState>& orbit, double delta,
                         int iterations, int ring) {
    if (orbit.empty()) fail(ErrorCode::InvalidArgument, "empty orbit");
    if (delta < 0.0 || iterations < 0 || ring < 1) fail(ErrorCode::InvalidArgument, "invalid probe parameters");
    IslandProbe out;
    out.iterations = iterations;
    if (delta == 0.0) return out;

    const SPState center = to_sp(curve, orbit.front());
    const double total = curve.total_arclength();
    const int period = static_cast<int>(orbit.size());

    // Real normal coordinates of the linearized return map, when elliptic.
    const TangentMatrix m = orbit_monodromy(curve, orbit);
    std::optional<Eigen::Matrix2d> to_normal;
    if (std::abs(0.5 * m.trace()) < 1.0) {
        const double gamma = std::acos(0.5 * m.trace());
        const cd lambda = std::polar(1.0, gamma);
        const cd ws = m(0, 1);
        const cd wp = lambda - m(0, 0);
        Eigen::Matrix2d basis;
        basis << ws.real(), -ws.imag(), wp.real(), -wp.imag();
        if (std::abs(basis.determinant()) > 0.0) to_normal = basis.inverse();
    }

    struct Track {
        double excursion = 0.0;
        double turns = 0.0;
    };
    auto run = [&](int k) {
        const double a = kTwoPi * k / ring;
        SPState x{center.s + delta * std::cos(a), center.p + delta * std::sin(a)};
        PhaseState st = to_phase(curve, x);
        Track t;
        Eigen::Vector2d dev(delta * std::cos(a), delta * std::sin(a));
        double angle = to_normal ? std::atan2((*to_normal * dev)(1), (*to_normal * dev)(0)) : 0.0;
        for (int it = 0; it < iterations; ++it) {
            for (int j = 0; j < period; ++j) st = next_impact(curve, st);
            const SPState y = to_sp(curve, st);
            double ds = y.s - center.s;
            ds -= total * std::round(ds / total);
            dev << ds, y.p - center.p;
            t.excursion = std::max(t.excursion, dev.norm());
            if (to_normal) {
                const Eigen::Vector2d q = *to_normal * dev;
                const double next = std::atan2(q(1), q(0));
                t.turns += wrap_angle(next - angle);
                angle = next;
            }
        }
        t.turns /= kTwoPi;
        return t;
    };

    std::vector<std::future<Track>> jobs;
    jobs.reserve(ring);
    for (int k = 0; k < ring; ++k) jobs.push_back(std::async(std::launch::async, run, k));
    double turns = 0.0;
    for (auto& j : jobs) {
        const Track t = j.get();
        out.max_excursion = std::max(out.max_excursion, t.excursion);
        turns += t.turns;
    }
    if (to_normal && iterations > 0) out.rotation = turns / (static_cast<double>(ring) * iterations);
    return out;
}

IslandProbe island_probe(const ConvexCurve& curve, const Diameter& d, double delta, int iterations, int ring) {
    return island_probe(curve, diameter_orbit(d), delta, iterations, ring);
}

}  // namespace billiards
