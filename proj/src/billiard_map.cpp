#include "billiards/billiard_map.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "billiards/error.hpp"

namespace billiards {

std::string_view to_string(Stability s) {
    switch (s) {
        case Stability::Elliptic: return "Elliptic";
        case Stability::Hyperbolic: return "Hyperbolic";
        case Stability::Parabolic: return "Parabolic";
    }
    return "Unknown";
}

Stability classify_trace(double trace, double parabolic_tol) {
    const double excess = std::abs(trace) - 2.0;
    if (std::abs(excess) <= parabolic_tol) return Stability::Parabolic;
    return excess < 0.0 ? Stability::Elliptic : Stability::Hyperbolic;
}

namespace {

constexpr int kImpactGrid = 64;

// Direction of the ray leaving the boundary at phi with reflection angle theta.
Vec2 ray_direction(double phi, double theta) {
    return std::cos(theta) * unit_normal(phi) + std::sin(theta) * unit_tangent(phi);
}

}  // namespace

Impact next_impact_detail(const ConvexCurve& curve, PhaseState state) {
    if (!(std::abs(state.theta) < 0.5 * kPi)) {
        fail(ErrorCode::InvalidArgument, "reflection angle must satisfy |theta| < pi/2");
    }
    const double phi0 = reduce_angle(state.phi);
    const Vec2 p0 = curve.point(phi0);
    const Vec2 d = ray_direction(phi0, state.theta);

    // g(u) = d x (alpha(phi0 + u) - alpha(phi0)) is negative on (0, u*) and
    // positive on (u*, 2pi). Dividing by sin(u/2) removes the trivial zeros at
    // the ends, leaving a single sign change.
    auto g = [&](double u) { return cross(d, curve.point(phi0 + u) - p0); };
    auto gdiv = [&](double u) { return g(u) / std::sin(0.5 * u); };

    // Walk the 64-point grid from the grid node nearest the circle guess
    // pi - 2 theta until the sign changes.
    int k = std::clamp(static_cast<int>(std::lround((kPi - 2.0 * state.theta) / kTwoPi * kImpactGrid)), 1,
                       kImpactGrid - 1);
    double lo = 0.0;
    double hi = kTwoPi;
    if (gdiv(kTwoPi * k / kImpactGrid) >= 0.0) {
        hi = kTwoPi * k / kImpactGrid;
        for (--k; k >= 1; --k) {
            const double u = kTwoPi * k / kImpactGrid;
            if (gdiv(u) < 0.0) {
                lo = u;
                break;
            }
            hi = u;
        }
    } else {
        lo = kTwoPi * k / kImpactGrid;
        for (++k; k < kImpactGrid; ++k) {
            const double u = kTwoPi * k / kImpactGrid;
            if (gdiv(u) >= 0.0) {
                hi = u;
                break;
            }
            lo = u;
        }
    }

    double u = 0.5 * (lo + hi);
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
        std::array<Vec2, 2> at{};
        curve.point_derivatives(phi0 + u, at);
        const double gu = cross(d, at[0] - p0);
        if (gu == 0.0) {
            converged = true;
            break;
        }
        const double gd = gu / std::sin(0.5 * u);
        if (gd < 0.0) lo = u; else hi = u;
        const double dg = cross(d, at[1]);
        double next = u - gu / dg;
        const bool newton = next > lo && next < hi;
        if (!newton) next = 0.5 * (lo + hi);
        const double step = std::abs(next - u);
        u = next;
        // Quadratic convergence: after a Newton step below 1e-12 the error is at roundoff.
        if ((newton && step <= 1e-12 * (1.0 + std::abs(phi0 + u))) ||
            hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(phi0 + u))) {
            converged = true;
            break;
        }
    }
    if (!converged || !(u > 0.0 && u < kTwoPi)) {
        fail(ErrorCode::SolveFailure, "impact root refinement did not converge");
    }

    const double phi1 = phi0 + u;
    const Vec2 chord_vec = curve.point(phi1) - p0;
    const double l = norm(chord_vec);
    if (!(l > 0.0)) fail(ErrorCode::SolveFailure, "degenerate chord");
    const double sin1 = dot(d, unit_tangent(phi1));
    const double cos1 = -dot(d, unit_normal(phi1));
    if (!(cos1 > 0.0)) fail(ErrorCode::SolveFailure, "ray does not arrive from inside the table");
    Impact out;
    out.phi_unreduced = phi1;
    out.next = {reduce_angle(phi1), std::atan2(sin1, cos1)};
    out.chord = l;
    return out;
}

PhaseState next_impact(const ConvexCurve& curve, PhaseState state) {
    return next_impact_detail(curve, state).next;
}

double chord(const ConvexCurve& curve, PhaseState state) {
    return next_impact_detail(curve, state).chord;
}

SPState to_sp(const ConvexCurve& curve, PhaseState state) {
    return {curve.arclength(reduce_angle(state.phi)), std::sin(state.theta)};
}

PhaseState to_phase(const ConvexCurve& curve, SPState sp) {
    if (!(std::abs(sp.p) < 1.0)) fail(ErrorCode::InvalidArgument, "|p| must be below 1");
    return {reduce_angle(curve.angle_of_arclength(sp.s)), std::asin(sp.p)};
}

SPState next_impact_sp(const ConvexCurve& curve, SPState sp) {
    return to_sp(curve, next_impact(curve, to_phase(curve, sp)));
}

TangentMatrix tangent_map(const ConvexCurve& curve, SPState sp) {
    const PhaseState st = to_phase(curve, sp);
    const Impact imp = next_impact_detail(curve, st);
    const double r0 = curve.radius(st.phi);
    const double r1 = curve.radius(imp.next.phi);
    const double c0 = std::cos(st.theta);
    const double c1 = std::cos(imp.next.theta);
    const double l = imp.chord;
    // With theta measured toward the forward tangent, both off-diagonal
    // entries carry a minus sign relative to the textbook convention.
    TangentMatrix m;
    m(0, 0) = (l - r0 * c0) / (r0 * c1);
    m(0, 1) = -l / (c0 * c1);
    m(1, 0) = -(l - r0 * c0 - r1 * c1) / (r0 * r1);
    m(1, 1) = (l - r1 * c1) / (r1 * c0);
    return m;
}

std::vector<PhaseState> iterate(const ConvexCurve& curve, PhaseState state, int n) {
    if (n < 0) fail(ErrorCode::InvalidArgument, "iteration count must be non-negative");
    std::vector<PhaseState> orbit;
    orbit.reserve(static_cast<std::size_t>(n) + 1);
    orbit.push_back({reduce_angle(state.phi), state.theta});
    for (int k = 0; k < n; ++k) {
        try {
            orbit.push_back(next_impact(curve, orbit.back()));
        } catch (const BilliardError& e) {
            fail(ErrorCode::SolveFailure, "iteration step " + std::to_string(k) + ": " + e.what());
        }
    }
    return orbit;
}

double invariant_density(const ConvexCurve& curve, PhaseState state) {
    return curve.radius(state.phi) * std::cos(state.theta);
}

TangentMatrix orbit_monodromy(const ConvexCurve& curve, const std::vector<PhaseState>& states) {
    TangentMatrix m = TangentMatrix::Identity();
    for (const auto& st : states) m = tangent_map(curve, to_sp(curve, st)) * m;
    return m;
}

namespace {

struct Polygon {
    Eigen::VectorXd phi;  // phi[i+1] - phi[i] in (0, 2pi), closing with phi[0] + 2pi m
};

class GeneratingFunction {
public:
    GeneratingFunction(const ConvexCurve& curve, int n, int m) : curve_(curve), n_(n), m_(m) {}

    double value(const Eigen::VectorXd& phi) const {
        double total = 0.0;
        for (int i = 0; i < n_; ++i) total += norm(curve_.point(next_angle(phi, i)) - curve_.point(phi[i]));
        return total;
    }

    void gradient_hessian(const Eigen::VectorXd& phi, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
        grad.setZero(n_);
        hess.setZero(n_, n_);
        for (int i = 0; i < n_; ++i) {
            const int j = (i + 1) % n_;
            std::array<Vec2, 3> da{};
            std::array<Vec2, 3> db{};
            curve_.point_derivatives(phi[i], da);
            curve_.point_derivatives(next_angle(phi, i), db);
            const Vec2 diff = db[0] - da[0];
            const double l = norm(diff);
            const Vec2 u = (1.0 / l) * diff;
            const double au = dot(da[1], u);
            const double bu = dot(db[1], u);
            grad[i] += -au;
            grad[j] += bu;
            hess(i, i) += -dot(da[2], u) + (dot(da[1], da[1]) - au * au) / l;
            hess(j, j) += dot(db[2], u) + (dot(db[1], db[1]) - bu * bu) / l;
            const double ab = -(dot(da[1], db[1]) - au * bu) / l;
            hess(i, j) += ab;
            hess(j, i) += ab;
        }
    }

    double next_angle(const Eigen::VectorXd& phi, int i) const {
        return i + 1 < n_ ? phi[i + 1] : phi[0] + kTwoPi * m_;
    }

    bool ordered(const Eigen::VectorXd& phi) const {
        for (int i = 0; i < n_; ++i) {
            const double gap = next_angle(phi, i) - phi[i];
            if (!(gap > 1e-6 && gap < kTwoPi - 1e-6)) return false;
        }
        return true;
    }

private:
    const ConvexCurve& curve_;
    int n_;
    int m_;
};

std::optional<Eigen::VectorXd> newton_critical_point(const GeneratingFunction& gen, Eigen::VectorXd phi,
                                                     double scale, int max_iter) {
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    for (int it = 0; it < max_iter; ++it) {
        gen.gradient_hessian(phi, grad, hess);
        if (grad.lpNorm<Eigen::Infinity>() < 1e-13 * scale) return phi;
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(hess);
        cod.setThreshold(1e-12);
        Eigen::VectorXd step = cod.solve(grad);
        const double big = step.lpNorm<Eigen::Infinity>();
        if (big > 0.2) step *= 0.2 / big;
        phi -= step;
        if (!gen.ordered(phi)) return std::nullopt;
        if (big < 1e-15) {
            gen.gradient_hessian(phi, grad, hess);
            return grad.lpNorm<Eigen::Infinity>() < 1e-9 * scale ? std::optional(phi) : std::nullopt;
        }
    }
    gen.gradient_hessian(phi, grad, hess);
    if (grad.lpNorm<Eigen::Infinity>() < 1e-10 * scale) return phi;
    return std::nullopt;
}

}  // namespace

std::vector<PeriodicOrbit> find_periodic_orbits(const ConvexCurve& curve, int period, int winding,
                                                const PeriodicSearchOptions& options) {
    if (period < 2) fail(ErrorCode::InvalidArgument, "period must be at least 2 (billiards have no fixed points)");
    if (winding < 1 || winding >= period) fail(ErrorCode::InvalidArgument, "winding must satisfy 1 <= m < n");
    if (std::gcd(period, winding) != 1) fail(ErrorCode::InvalidArgument, "period and winding must be coprime");

    const GeneratingFunction gen(curve, period, winding);
    const double scale = curve.total_arclength();
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    const double spacing = kTwoPi * winding / period;

    std::vector<PeriodicOrbit> found;
    for (int start = 0; start < options.starts; ++start) {
        Eigen::VectorXd phi(period);
        const double base = kTwoPi / period * start / options.starts;
        for (int i = 0; i < period; ++i) phi[i] = base + spacing * i + 0.05 * spacing * jitter(rng);
        const auto crit = newton_critical_point(gen, phi, scale, options.max_newton);
        if (!crit) continue;

        // Canonical rotation: start from the smallest reduced angle.
        Eigen::VectorXd c = *crit;
        int first = 0;
        auto key = [](double a) {
            const double r = reduce_angle(a);
            return kTwoPi - r < 1e-9 ? 0.0 : r;
        };
        for (int i = 1; i < period; ++i) {
            if (key(c[i]) < key(c[first])) first = i;
        }
        PeriodicOrbit orbit;
        orbit.period = period;
        orbit.winding = winding;
        for (int k = 0; k < period; ++k) {
            const int i = (first + k) % period;
            const double a = c[i];
            const double b = gen.next_angle(c, i);
            const Vec2 dir = curve.point(b) - curve.point(a);
            const double sin_t = dot(dir, unit_tangent(a));
            const double cos_t = dot(dir, unit_normal(a));
            orbit.states.push_back({key(a), std::atan2(sin_t, cos_t)});
        }
        const bool duplicate = std::any_of(found.begin(), found.end(), [&](const PeriodicOrbit& o) {
            for (int shift = 0; shift < period; ++shift) {
                bool same = true;
                for (int k = 0; k < period && same; ++k) {
                    same = circular_distance(o.states[(k + shift) % period].phi, orbit.states[k].phi) <= 1e-7;
                }
                if (same) return true;
            }
            return false;
        });
        if (duplicate) continue;

        // The polygon must close up as an actual billiard trajectory.
        const auto traj = iterate(curve, orbit.states.front(), period);
        if (circular_distance(traj.back().phi, orbit.states.front().phi) > 1e-7 ||
            std::abs(traj.back().theta - orbit.states.front().theta) > 1e-7) {
            continue;
        }
        orbit.perimeter = gen.value(c);
        orbit.trace = orbit_monodromy(curve, orbit.states).trace();
        orbit.stability = classify_trace(orbit.trace, options.parabolic_tol);
        found.push_back(std::move(orbit));
    }
    if (found.empty()) fail(ErrorCode::NotFound, "no periodic orbit found within the multi-start budget");
    std::sort(found.begin(), found.end(), [](const PeriodicOrbit& a, const PeriodicOrbit& b) {
        if (a.perimeter != b.perimeter) return a.perimeter > b.perimeter;
        return a.states.front().phi < b.states.front().phi;
    });
    return found;
}

}  // namespace billiards
