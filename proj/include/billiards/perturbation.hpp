#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "billiards/birkhoff.hpp"
#include "billiards/curve.hpp"
#include "billiards/diameters.hpp"
#include "billiards/trig_poly.hpp"

namespace billiards {

/// Normal displacement lambda(phi) of a curve along its inward normal.
class PerturbationField {
public:
    PerturbationField() = default;
    explicit PerturbationField(TrigPoly lambda) : lambda_(std::move(lambda)) {}

    const TrigPoly& profile() const { return lambda_; }
    double operator()(double phi) const { return lambda_(phi); }
    double derivative(double phi, int order) const { return lambda_.derivative(phi, order); }
    bool is_zero() const;

private:
    TrigPoly lambda_;
};

/// Values of the field and its even derivatives at phi0 and phi0 + pi.
struct ContactData {
    double lambda0 = 0.0;
    double lambda_pi = 0.0;
    double d2_0 = 0.0;
    double d2_pi = 0.0;
    double d4_0 = 0.0;
    double d4_pi = 0.0;
};
ContactData contact_data(const PerturbationField& field, double phi0 = 0.0);

struct C2Norm {
    double value = 0.0;  // max of |lambda|, |lambda'|, |lambda''| on the grid
    double bound = 0.0;  // certified upper bound
};
C2Norm c2_norm(const PerturbationField& field);

/// R - lambda > 0 and the curvature denominator is positive on a dense grid.
bool admissible(const ConvexCurve& base, const PerturbationField& field);

/// Radius of curvature of beta at the base angle phi.
double perturbed_radius(const ConvexCurve& base, const PerturbationField& field, double phi);

/// Tangent angle of beta at base angle phi, and its inverse.
double h_map(const ConvexCurve& base, const PerturbationField& field, double phi);
double h_derivative(const ConvexCurve& base, const PerturbationField& field, double phi);
double h_inverse(const ConvexCurve& base, const PerturbationField& field, double psi);

/// beta(phi) = alpha(phi) + lambda(phi) eta(phi) re-expressed as a curve in
/// its own tangent angle.
struct PerturbedCurve {
    ConvexCurve base;
    PerturbationField field;
    ConvexCurve curve;

    Vec2 beta(double phi) const;
    double h(double phi) const { return h_map(base, field, phi); }
    double h_inverse(double psi) const { return billiards::h_inverse(base, field, psi); }
};

/// Throws Inadmissible.
PerturbedCurve apply(const ConvexCurve& base, const PerturbationField& field);

struct AntipodalDeviation {
    double offset = 0.0;  // sup |f - phi - pi|
    double slope = 0.0;   // sup |f' - 1|
    double bend = 0.0;    // sup |f''|
};
/// Deviation of f = h^-1(h + pi) from the rigid half-turn.
AntipodalDeviation antipodal_deviation(const ConvexCurve& base, const PerturbationField& field);

/// cos gamma of the diameter of beta at phi0 predicted from the contact data
/// (lambda0, lambda_pi, lambda0'', lambda_pi''). Throws Degenerate.
double resonance_gap_function(const Diameter& d, const ContactData& contact);

/// Partials of resonance_gap_function at zero contact in the order
/// (lambda0, lambda_pi, lambda0'', lambda_pi'').
std::array<double, 4> resonance_gap_gradient(const Diameter& d);

struct BreakResonanceOptions {
    double budget = 1e-2;  // largest |lambda|_2 tried
    double resonance_tol = kDefaultResonanceTol;
};

struct BreakResonanceResult {
    PerturbationField field;
    double norm = 0.0;
    double gamma_before = 0.0;
    double gamma_after = 0.0;
    double distance_after = 0.0;  // to the resonance set
    Diameter diameter;            // re-analysed diameter of beta
};

/// Low-order cosine field about phi0 that keeps the diameter in place and
/// pushes gamma at least `margin` away from the resonance set.
/// Throws NotResonant, NotElliptic, MarginUnreachable.
BreakResonanceResult break_resonance(const ConvexCurve& base, const Diameter& d, double margin,
                                     const BreakResonanceOptions& options = {});

/// lambda = (A/24) sin^4 (1 + cos)/2 + (B/24) sin^4 (1 - cos)/2 about phi0:
/// zero 3-jet at phi0 and phi0 + pi, fourth derivatives A and B.
PerturbationField third_order_contact(double a, double b, double phi0 = 0.0);

struct EnsureTwistOptions {
    double tol = 1e-8;     // |tau1| <= tol * max(1, |c21|) counts as vanishing
    double margin = 1e-3;  // resonance margin when breaking
    double resonance_tol = kDefaultResonanceTol;
};

struct TwistStage {
    PerturbationField field;  // applied to the curve produced by the previous stage
    std::string kind;         // "break-resonance" or "third-order-contact"
};

struct TwistCertificate {
    int path = 1;  // 1 already twisting, 2 contact only, 3 resonance broken first
    std::vector<TwistStage> stages;
    ConvexCurve curve;  // final curve
    Diameter diameter;  // its elliptic diameter
    double tau1_before = 0.0;
    double tau1 = 0.0;
    double tol = 0.0;  // absolute threshold used on the final curve
};

/// Finds an elliptic diameter and perturbs until it is non-resonant with
/// |tau1| above the tolerance. Throws NotElliptic when there is none.
TwistCertificate ensure_twist(const ConvexCurve& base, const EnsureTwistOptions& options = {});

}  // namespace billiards
