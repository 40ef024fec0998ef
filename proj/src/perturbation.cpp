#include "billiards/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "billiards/error.hpp"

namespace billiards {

bool PerturbationField::is_zero() const {
    const auto& a = lambda_.cos_coeffs();
    const auto& b = lambda_.sin_coeffs();
    return std::all_of(a.begin(), a.end(), [](double v) { return v == 0.0; }) &&
           std::all_of(b.begin(), b.end(), [](double v) { return v == 0.0; });
}

ContactData contact_data(const PerturbationField& field, double phi0) {
    std::array<double, 5> a{};
    std::array<double, 5> b{};
    field.profile().derivatives(phi0, a);
    field.profile().derivatives(phi0 + kPi, b);
    return {a[0], b[0], a[2], b[2], a[4], b[4]};
}

C2Norm c2_norm(const PerturbationField& field) {
    C2Norm out;
    if (field.is_zero()) return out;
    const TrigPoly& f = field.profile();
    // At an extremum the slope vanishes, so a grid point within h/2 of it is
    // off by at most h^2/8 times the sup of the next-but-one derivative.
    std::array<double, 3> curvature_bound{};
    for (int k = 0; k < 3; ++k) curvature_bound[k] = f.sup_bound(k + 2);
    int n = std::max(1024, 32 * (f.degree() + 1));
    for (;;) {
        std::array<double, 3> peak{};
        std::array<double, 3> d{};
        for (int j = 0; j < n; ++j) {
            f.derivatives(kTwoPi * j / n, d);
            for (int k = 0; k < 3; ++k) peak[k] = std::max(peak[k], std::abs(d[k]));
        }
        const double h = kTwoPi / n;
        out.value = *std::max_element(peak.begin(), peak.end());
        out.bound = 0.0;
        for (int k = 0; k < 3; ++k) out.bound = std::max(out.bound, peak[k] + h * h / 8.0 * curvature_bound[k]);
        if (out.bound <= 1.01 * out.value || n >= (1 << 22)) break;
        n *= 4;
    }
    return out;
}

namespace {

struct LocalData {
    double r[4];    // R and derivatives
    double lam[4];  // lambda and derivatives
};

LocalData local(const ConvexCurve& base, const PerturbationField& field, double phi) {
    LocalData d{};
    base.radius_derivatives(phi, std::span<double>(d.r, 4));
    field.profile().derivatives(phi, std::span<double>(d.lam, 4));
    return d;
}

double denominator(const LocalData& d) {
    const double q = d.r[0] - d.lam[0];
    return q * (q + d.lam[2]) - d.lam[1] * (d.r[1] - 2.0 * d.lam[1]);
}

double speed_sq(const LocalData& d) {
    const double q = d.r[0] - d.lam[0];
    return q * q + d.lam[1] * d.lam[1];
}

double h_second(const LocalData& d) {
    const double q = d.r[0] - d.lam[0];
    const double q1 = d.r[1] - d.lam[1];
    const double num = denominator(d);
    const double num1 = q1 * (q + d.lam[2]) + q * (q1 + d.lam[3]) - d.lam[2] * (d.r[1] - 2.0 * d.lam[1]) -
                        d.lam[1] * (d.r[2] - 2.0 * d.lam[2]);
    const double den = speed_sq(d);
    const double den1 = 2.0 * q * q1 + 2.0 * d.lam[1] * d.lam[2];
    return (num1 * den - num * den1) / (den * den);
}

int check_grid(const ConvexCurve& base, const PerturbationField& field) {
    return std::max(4096, 16 * (base.radius_profile().degree() + field.profile().degree()));
}

}  // namespace

bool admissible(const ConvexCurve& base, const PerturbationField& field) {
    const int n = check_grid(base, field);
    for (int j = 0; j < n; ++j) {
        const LocalData d = local(base, field, kTwoPi * j / n);
        if (!(d.r[0] - d.lam[0] > 0.0) || !(denominator(d) > 0.0)) return false;
    }
    return true;
}

double perturbed_radius(const ConvexCurve& base, const PerturbationField& field, double phi) {
    const LocalData d = local(base, field, phi);
    return std::pow(speed_sq(d), 1.5) / denominator(d);
}

double h_map(const ConvexCurve& base, const PerturbationField& field, double phi) {
    const LocalData d = local(base, field, phi);
    return phi + std::atan(d.lam[1] / (d.r[0] - d.lam[0]));
}

double h_derivative(const ConvexCurve& base, const PerturbationField& field, double phi) {
    const LocalData d = local(base, field, phi);
    return denominator(d) / speed_sq(d);
}

double h_inverse(const ConvexCurve& base, const PerturbationField& field, double psi) {
    // h(phi) - phi lies in (-pi/2, pi/2).
    double lo = psi - 0.5 * kPi;
    double hi = psi + 0.5 * kPi;
    double x = psi;
    for (int it = 0; it < 200; ++it) {
        const double gx = h_map(base, field, x) - psi;
        if (gx < 0.0) lo = x; else hi = x;
        const double dh = h_derivative(base, field, x);
        if (!(dh > 0.0)) fail(ErrorCode::NotDiffeo, "h' is not positive: the field is too large");
        double next = x - gx / dh;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - x);
        x = next;
        if (step <= 2.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(x)) || hi - lo <= 1e-300) break;
    }
    return x;
}

Vec2 PerturbedCurve::beta(double phi) const { return base.point(phi) + field(phi) * unit_normal(phi); }

PerturbedCurve apply(const ConvexCurve& base, const PerturbationField& field) {
    if (field.is_zero()) return {base, field, base};
    if (!admissible(base, field)) {
        fail(ErrorCode::Inadmissible, "perturbed curve would not be regular and strictly convex");
    }
    const int n = check_grid(base, field);
    for (int j = 0; j < n; ++j) {
        if (!(h_derivative(base, field, kTwoPi * j / n) > 0.0)) fail(ErrorCode::NotDiffeo, "h is not monotone");
    }
    const ProfileFit fit = fit_periodic(
        [&](double psi) { return perturbed_radius(base, field, h_inverse(base, field, psi)); });
    const double start = h_inverse(base, field, 0.0);
    const Vec2 basepoint = base.point(start) + field(start) * unit_normal(start);
    BuildOptions build;
    build.closure_tol = std::max(build.closure_tol, 10.0 * fit.residual);
    PerturbedCurve out{base, field, build_from_curvature(CurvatureProfile{fit.profile}, basepoint, build)};
    return out;
}

AntipodalDeviation antipodal_deviation(const ConvexCurve& base, const PerturbationField& field) {
    AntipodalDeviation out;
    if (field.is_zero()) return out;
    const int n = 2048;
    for (int j = 0; j < n; ++j) {
        const double phi = kTwoPi * j / n;
        const double f = h_inverse(base, field, h_map(base, field, phi) + kPi);
        const LocalData at = local(base, field, phi);
        const LocalData op = local(base, field, f);
        const double h1 = denominator(at) / speed_sq(at);
        const double hf1 = denominator(op) / speed_sq(op);
        const double f1 = h1 / hf1;
        const double f2 = (h_second(at) - h_second(op) * f1 * f1) / hf1;
        out.offset = std::max(out.offset, std::abs(wrap_angle(f - phi - kPi)));
        out.slope = std::max(out.slope, std::abs(f1 - 1.0));
        out.bend = std::max(out.bend, std::abs(f2));
    }
    return out;
}

double resonance_gap_function(const Diameter& d, const ContactData& c) {
    const double l = d.length;
    const double tiny = 1e-14 * l;
    const double den0 = d.r0 - c.lambda0 + c.d2_0;
    const double denp = d.rpi - c.lambda_pi + c.d2_pi;
    if (std::abs(den0) <= tiny || std::abs(denp) <= tiny) fail(ErrorCode::Degenerate, "contact ratio undefined");
    const double delta0 = (d.r0 - c.lambda0) / den0;
    const double deltap = (d.rpi - c.lambda_pi) / denp;
    const double r0 = d.r0 - c.lambda0 - c.d2_0 * delta0;
    const double rp = d.rpi - c.lambda_pi - c.d2_pi * deltap;
    if (std::abs(r0) <= tiny || std::abs(rp) <= tiny) fail(ErrorCode::Degenerate, "perturbed radius vanishes");
    return 2.0 * (l - d.r0 - c.lambda_pi + c.d2_0 * delta0) * (l - d.rpi - c.lambda0 + c.d2_pi * deltap) / (r0 * rp) -
           1.0;
}

std::array<double, 4> resonance_gap_gradient(const Diameter& d) {
    const double l = d.length;
    const double r0 = d.r0;
    const double rp = d.rpi;
    return {
        2.0 * (l - r0) * (l - r0 - rp) / (r0 * r0 * rp),
        2.0 * (l - rp) * (l - r0 - rp) / (rp * rp * r0),
        2.0 * (l - rp) * l / (r0 * r0 * rp),
        2.0 * (l - r0) * l / (rp * rp * r0),
    };
}

namespace {

constexpr int kBreakBasis = 3;  // cos(k (phi - phi0)), k = 0, 1, 2

TrigPoly cosine_field(const std::array<double, kBreakBasis>& c, double phi0) {
    TrigPoly f(c[0]);
    for (int k = 1; k < kBreakBasis; ++k) f += TrigPoly::cosine(k, c[k]);
    return f.shifted(phi0);
}

ContactData cosine_contact(const std::array<double, kBreakBasis>& c) {
    ContactData d;
    for (int k = 0; k < kBreakBasis; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        d.lambda0 += c[k];
        d.lambda_pi += sign * c[k];
        d.d2_0 -= k * k * c[k];
        d.d2_pi -= sign * k * k * c[k];
    }
    return d;
}

std::array<double, kBreakBasis> scaled(const std::array<double, kBreakBasis>& v, double t) {
    return {v[0] * t, v[1] * t, v[2] * t};
}

double resonance_distance(double gamma) { return is_resonant(gamma, 0.0).distance; }

// The diameter of a perturbed curve closest to phi0 (mod pi).
std::optional<Diameter> diameter_near(const ConvexCurve& curve, double phi0, double tol) {
    std::vector<Diameter> all;
    try {
        all = find_diameters(curve, 512, tol);
    } catch (const BilliardError&) {
        return std::nullopt;
    }
    const double ref = std::fmod(std::fmod(phi0, kPi) + kPi, kPi);
    std::optional<Diameter> best;
    for (const auto& d : all) {
        if (!best || circular_distance(d.phi0, ref, kPi) < circular_distance(best->phi0, ref, kPi)) best = d;
    }
    return best;
}

}  // namespace

BreakResonanceResult break_resonance(const ConvexCurve& base, const Diameter& d, double margin,
                                     const BreakResonanceOptions& options) {
    if (!(margin >= 0.0)) fail(ErrorCode::InvalidArgument, "margin must be non-negative");
    if (d.stability.kind != Stability::Elliptic) fail(ErrorCode::NotElliptic, "diameter is not elliptic");
    const double gamma = rotation_angle(d);
    if (!is_resonant(gamma, options.resonance_tol).resonant) {
        fail(ErrorCode::NotResonant, "diameter is not resonant");
    }
    BreakResonanceResult out;
    out.gamma_before = gamma;
    out.gamma_after = gamma;
    out.distance_after = resonance_distance(gamma);
    out.diameter = d;
    if (margin == 0.0) return out;

    const auto grad = resonance_gap_gradient(d);
    auto rate = [&](const std::array<double, kBreakBasis>& v) {
        const ContactData c = cosine_contact(v);
        return grad[0] * c.lambda0 + grad[1] * c.lambda_pi + grad[2] * c.d2_0 + grad[3] * c.d2_pi;
    };

    // Direction with the largest first-order change of cos(gamma) per unit C2 norm.
    std::array<double, kBreakBasis> best{};
    double best_gain = 0.0;
    const int rings = 48;
    const int sectors = 96;
    for (int i = 0; i <= rings; ++i) {
        const double polar = kPi * i / rings;
        for (int j = 0; j < (i == 0 || i == rings ? 1 : sectors); ++j) {
            const double az = kTwoPi * j / sectors;
            std::array<double, kBreakBasis> v{std::cos(polar), std::sin(polar) * std::cos(az),
                                              std::sin(polar) * std::sin(az)};
            const double norm = c2_norm(PerturbationField(cosine_field(v, 0.0))).value;
            if (norm == 0.0) continue;
            const double gain = std::abs(rate(v)) / norm;
            if (gain > best_gain * (1.0 + 1e-12)) {
                best_gain = gain;
                best = scaled(v, 1.0 / norm);
            }
        }
    }
    if (best_gain == 0.0) fail(ErrorCode::MarginUnreachable, "no admissible direction moves gamma");

    const double target = 1.02 * margin;
    std::optional<BreakResonanceResult> chosen;
    for (const double sign : {1.0, -1.0}) {
        const auto dir = scaled(best, sign);
        auto predicted = [&](double t) {
            const double cg = resonance_gap_function(d, cosine_contact(scaled(dir, t)));
            return std::abs(cg) < 1.0 ? resonance_distance(std::acos(cg)) : -1.0;
        };
        // Smallest t whose predicted distance reaches the target.
        double lo = 0.0;
        double hi = options.budget;
        if (predicted(hi) < target) continue;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (predicted(mid) >= target) hi = mid; else lo = mid;
        }
        for (double t = hi; t <= options.budget * (1.0 + 1e-12); t *= 1.05) {
            const PerturbationField field(cosine_field(scaled(dir, t), d.phi0));
            if (!admissible(base, field)) break;
            const PerturbedCurve beta = apply(base, field);
            const auto nd = diameter_near(beta.curve, d.phi0, kDefaultClassTol);
            if (!nd || nd->stability.kind != Stability::Elliptic) continue;
            const double dist = resonance_distance(*nd->gamma);
            if (dist < margin) continue;
            BreakResonanceResult r;
            r.field = field;
            r.norm = c2_norm(field).value;
            r.gamma_before = gamma;
            r.gamma_after = *nd->gamma;
            r.distance_after = dist;
            r.diameter = *nd;
            if (!chosen || r.norm < chosen->norm) chosen = r;
            break;
        }
    }
    if (!chosen) fail(ErrorCode::MarginUnreachable, "margin not reached within the norm budget");
    return *chosen;
}

PerturbationField third_order_contact(double a, double b, double phi0) {
    const TrigPoly s = TrigPoly::sine(1);
    const TrigPoly c = TrigPoly::cosine(1);
    const TrigPoly s4 = (s * s) * (s * s);
    const TrigPoly plus = s4 * (TrigPoly(1.0) + c);
    const TrigPoly minus = s4 * (TrigPoly(1.0) - c);
    TrigPoly f = (a / 48.0) * plus + (b / 48.0) * minus;
    return PerturbationField(f.trimmed().shifted(phi0));
}

TwistCertificate ensure_twist(const ConvexCurve& base, const EnsureTwistOptions& options) {
    const auto all = find_diameters(base, 512, kDefaultClassTol);
    std::optional<Diameter> pick;
    for (const auto& d : all) {
        if (d.stability.kind != Stability::Elliptic) continue;
        const bool resonant = is_resonant(*d.gamma, options.resonance_tol).resonant;
        if (!pick || (!resonant && is_resonant(*pick->gamma, options.resonance_tol).resonant)) pick = d;
    }
    if (!pick) fail(ErrorCode::NotElliptic, "the curve has no elliptic diameter");

    TwistCertificate cert;
    cert.curve = base;
    cert.diameter = *pick;
    TwistOptions topt;
    topt.cross_check = false;
    topt.resonance_tol = options.resonance_tol;

    auto measure = [&](const ConvexCurve& curve, const Diameter& d, double& threshold) {
        const TwistResult t = twist_coefficient(curve, d, topt);
        threshold = options.tol * std::max(1.0, std::abs(t.c21));
        return t.tau1;
    };

    if (is_resonant(*pick->gamma, options.resonance_tol).resonant) {
        const BreakResonanceResult br = break_resonance(base, *pick, options.margin);
        cert.path = 3;
        cert.stages.push_back({br.field, "break-resonance"});
        cert.curve = apply(base, br.field).curve;
        cert.diameter = br.diameter;
    } else {
        cert.path = 1;
    }

    double threshold = 0.0;
    double tau = measure(cert.curve, cert.diameter, threshold);
    cert.tau1_before = tau;
    if (std::abs(tau) <= threshold) {
        if (cert.path == 1) cert.path = 2;
        const double slope = tau1_slope(cert.diameter.length, cert.diameter.r0, cert.diameter.rpi);
        double amp = 20.0 * threshold / std::abs(slope);
        const ConvexCurve before = cert.curve;
        for (int attempt = 0; attempt < 8 && std::abs(tau) <= threshold; ++attempt, amp *= 10.0) {
            const PerturbationField field = third_order_contact(amp, 0.0, cert.diameter.phi0);
            const ConvexCurve next = apply(before, field).curve;
            const auto nd = diameter_near(next, cert.diameter.phi0, kDefaultClassTol);
            if (!nd || nd->stability.kind != Stability::Elliptic) continue;
            double th = 0.0;
            const double t = measure(next, *nd, th);
            if (std::abs(t) > th) {
                cert.stages.push_back({field, "third-order-contact"});
                cert.curve = next;
                cert.diameter = *nd;
                tau = t;
                threshold = th;
            }
        }
        if (std::abs(tau) <= threshold) fail(ErrorCode::MarginUnreachable, "could not create a nonzero twist");
    }
    cert.tau1 = tau;
    cert.tol = threshold;
    return cert;
}

}  // namespace billiards
