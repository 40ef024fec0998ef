#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "billiards/curve.hpp"

namespace billiards {

/// Boundary point phi and reflection angle theta measured from the inward
/// normal, |theta| < pi/2. Positive theta tilts the outgoing ray toward the
/// forward tangent, so on the unit circle T(phi, theta) = (phi + pi - 2 theta, theta).
struct PhaseState {
    double phi = 0.0;
    double theta = 0.0;
};

/// Arclength s and p = sin(theta). T preserves ds ^ dp.
struct SPState {
    double s = 0.0;
    double p = 0.0;
};

/// 2x2 Jacobian of T in (s, p) coordinates.
using TangentMatrix = Eigen::Matrix2d;

enum class Stability { Elliptic, Hyperbolic, Parabolic };
std::string_view to_string(Stability s);

/// Classifies a symplectic 2x2 return map from its trace.
Stability classify_trace(double trace, double parabolic_tol);

struct Impact {
    PhaseState next;     // phi reduced to [0, 2pi)
    double phi_unreduced = 0.0;  // in (phi0, phi0 + 2pi)
    double chord = 0.0;
};

Impact next_impact_detail(const ConvexCurve& curve, PhaseState state);
PhaseState next_impact(const ConvexCurve& curve, PhaseState state);
double chord(const ConvexCurve& curve, PhaseState state);

SPState to_sp(const ConvexCurve& curve, PhaseState state);
PhaseState to_phase(const ConvexCurve& curve, SPState sp);
SPState next_impact_sp(const ConvexCurve& curve, SPState sp);

/// Closed-form partial derivatives of T at the given state.
TangentMatrix tangent_map(const ConvexCurve& curve, SPState sp);

/// n + 1 states starting with the initial one.
std::vector<PhaseState> iterate(const ConvexCurve& curve, PhaseState state, int n);

/// Density R(phi) cos(theta) of the invariant measure in (phi, theta).
double invariant_density(const ConvexCurve& curve, PhaseState state);

/// theta reversal; conjugates T to its inverse.
inline PhaseState reversed(PhaseState s) { return {s.phi, -s.theta}; }

struct PeriodicSearchOptions {
    int starts = 32;
    std::uint64_t seed = 0x5eed'b111'a4d5ULL;
    double parabolic_tol = 1e-9;
    int max_newton = 80;
};

struct PeriodicOrbit {
    int period = 0;
    int winding = 0;
    std::vector<PhaseState> states;  // one per bounce
    double perimeter = 0.0;          // value of the generating function
    double trace = 0.0;              // tr D(T^n)
    Stability stability = Stability::Parabolic;
};

/// Critical points of the total chord length over inscribed n-gons winding
/// m times, by multi-start Newton. Distinct orbits sorted by perimeter,
/// largest first. Throws NotFound when no start converges.
std::vector<PeriodicOrbit> find_periodic_orbits(const ConvexCurve& curve, int period, int winding,
                                                const PeriodicSearchOptions& options = {});

/// Product of tangent maps along consecutive states of an orbit.
TangentMatrix orbit_monodromy(const ConvexCurve& curve, const std::vector<PhaseState>& states);

}  // namespace billiards
