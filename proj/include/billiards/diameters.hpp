#pragma once

#include <optional>
#include <vector>

#include "billiards/billiard_map.hpp"
#include "billiards/curve.hpp"

namespace billiards {

/// Chord length between antipodal tangent angles and its phi derivative.
struct ChordValue {
    double length = 0.0;
    double derivative = 0.0;
};

/// l(phi) = |alpha(phi) - alpha(phi + pi)|.
ChordValue chord_function(const ConvexCurve& curve, double phi);

/// Stability class of a diameter with the two discriminants it was read from.
struct StabilityClass {
    Stability kind = Stability::Parabolic;
    double sum_gap = 0.0;      // L - (R0 + Rpi)
    double product_gap = 0.0;  // (L - R0)(L - Rpi)
};

struct Diameter {
    double phi0 = 0.0;  // in [0, pi)
    double length = 0.0;
    double r0 = 0.0;
    double rpi = 0.0;
    double lpp = 0.0;  // l''(phi0)
    StabilityClass stability;
    std::optional<double> gamma;  // rotation angle when elliptic
};

inline constexpr double kDefaultClassTol = 1e-9;
inline constexpr double kDefaultResonanceTol = 1e-6;

/// The discriminants are compared against tol * L and tol * L^2.
StabilityClass classify(double length, double r0, double rpi, double tol = kDefaultClassTol);
StabilityClass classify(const Diameter& d, double tol = kDefaultClassTol);

/// All zeros of l' on [0, pi), found by sign changes on a uniform grid and
/// Newton refinement. Throws Continuum for curves of constant width.
std::vector<Diameter> find_diameters(const ConvexCurve& curve, int grid = 512, double tol = kDefaultClassTol);

/// Builds the record for a diameter at phi0 without searching.
Diameter diameter_at(const ConvexCurve& curve, double phi0, double tol = kDefaultClassTol);

/// -(R0 + Rpi)(L - (R0 + Rpi)) / L.
double second_derivative_at(const Diameter& d);

/// DT^2 at the 2-periodic point in (phi, theta) coordinates at phi0, as the
/// product of the two per-bounce factors over R0 Rpi.
TangentMatrix dt2_matrix(const Diameter& d);
/// The same map in (s, p) coordinates; comparable with tangent-map products.
TangentMatrix dt2_matrix_sp(const Diameter& d);

/// 2 (L - R0)(L - Rpi) / (R0 Rpi) - 1.
double rotation_cosine(double length, double r0, double rpi);
/// gamma in (0, pi). Throws NotElliptic unless d.stability says elliptic.
double rotation_angle(const Diameter& d);

struct Resonance {
    bool resonant = false;
    int order = 0;  // 3 or 4 when resonant
    double distance = 0.0;  // to the nearest of pi/2, 2pi/3
};
Resonance is_resonant(double gamma, double tol = kDefaultResonanceTol);

}  // namespace billiards
