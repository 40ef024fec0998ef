#pragma once

#include <array>
#include <functional>
#include <span>

#include "billiards/geometry.hpp"
#include "billiards/trig_poly.hpp"

namespace billiards {

/// Radius of curvature R(phi) as a trigonometric polynomial in the tangent
/// angle. A closed curve has no first harmonic.
struct CurvatureProfile {
    TrigPoly radius;
};

struct FrameSample {
    Vec2 point;
    Vec2 tangent;
    Vec2 normal;  // inward
    double radius = 0.0;
};

struct CurvatureDerivatives {
    double r = 0.0;
    double dr_dphi = 0.0;
    double d2r_dphi2 = 0.0;
    double dr_ds = 0.0;
    double d2r_ds2 = 0.0;
};

struct BuildOptions {
    /// Allowed size of the first-harmonic coefficients relative to the mean radius.
    double closure_tol = 1e-10;
};

/// Strictly convex closed curve parametrized by its tangent angle phi.
/// Position and arclength are exact antiderivatives of the profile, so every
/// query is a finite trigonometric sum. Immutable after construction.
class ConvexCurve {
public:
    const TrigPoly& radius_profile() const { return radius_; }
    Vec2 basepoint() const { return base_; }
    double total_arclength() const { return kTwoPi * radius_.cos_coeff(0); }
    double closure_residual() const { return closure_residual_; }
    /// min over phi of R(phi).
    double convexity_margin() const { return min_radius_; }

    FrameSample evaluate(double phi) const;
    Vec2 point(double phi) const;
    double radius(double phi) const { return radius_(phi); }
    CurvatureDerivatives curvature_derivatives(double phi) const;

    /// out[k] = d^k alpha / dphi^k.
    void point_derivatives(double phi, std::span<Vec2> out) const;
    /// out[k] = d^k R / dphi^k.
    void radius_derivatives(double phi, std::span<double> out) const { radius_.derivatives(phi, out); }

    /// s(phi) = int_0^phi R. Not reduced: s(phi + 2pi) = s(phi) + total_arclength().
    double arclength(double phi) const;
    /// Inverse of arclength() on the whole real line.
    double angle_of_arclength(double s) const;

private:
    friend ConvexCurve build_from_curvature(const CurvatureProfile&, Vec2, const BuildOptions&);

    TrigPoly radius_;
    TrigPoly x_;  // periodic antiderivative of R cos
    TrigPoly y_;  // periodic antiderivative of R sin
    TrigPoly s_periodic_;
    Vec2 base_;
    Vec2 offset_;  // base_ - (x_(0), y_(0))
    double s_offset_ = 0.0;
    double s_bound_ = 0.0;
    double closure_residual_ = 0.0;
    double min_radius_ = 0.0;
};

ConvexCurve build_from_curvature(const CurvatureProfile& profile, Vec2 basepoint,
                                 const BuildOptions& options = {});

/// A closed planar curve t -> (x(t), y(t)) on [t0, t1]. Each callback returns
/// the value and first two derivatives.
struct ParametricSpec {
    std::function<std::array<double, 3>(double)> x;
    std::function<std::array<double, 3>(double)> y;
    double t0 = 0.0;
    double t1 = kTwoPi;
};

ParametricSpec ellipse_spec(double a, double b);
/// x = cos t, y = 3/(2 - sin t).
ParametricSpec fig2_spec();

struct FitOptions {
    /// Stop refining once the relative midpoint residual drops below this.
    double target_residual = 2e-14;
    /// Fail with ResamplingFailure above this relative residual.
    double accept_residual = 1e-9;
    int min_degree = 8;
    int max_degree = 1024;
};

struct ProfileFit {
    TrigPoly profile;
    double residual = 0.0;  // relative to max |sample|
};

/// Adaptive trigonometric fit of a 2pi-periodic function: the degree doubles
/// (4x oversampled uniform grid) until the off-grid residual meets the target.
ProfileFit fit_periodic(const std::function<double(double)>& f, const FitOptions& options = {});

ConvexCurve build_from_parametric(const ParametricSpec& spec, const FitOptions& options = {});

}  // namespace billiards
