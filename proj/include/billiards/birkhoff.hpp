#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "billiards/billiard_map.hpp"
#include "billiards/diameters.hpp"
#include "billiards/jet.hpp"

namespace billiards {

using Series3 = Jet2<double, 3>;
using ComplexSeries3 = Jet2<std::complex<double>, 3>;

/// Degree-3 Taylor polynomial of a planar map around a fixed point, in the
/// deviations (ds, dp). Constant terms are zero.
struct Jet2D {
    Series3 s;
    Series3 p;

    TangentMatrix linear() const;
};

/// Truncated-series evaluation of T at a series-valued state (s, p).
std::pair<Series3, Series3> bounce_series(const ConvexCurve& curve, const Series3& s, const Series3& p);

/// Third jet of T^2 at the 2-periodic point (phi0, 0). Throws NotElliptic
/// unless the diameter is elliptic.
Jet2D jet3_T2(const ConvexCurve& curve, const Diameter& d);

/// Third jet of T^n along a periodic orbit by composing bounce series.
Jet2D jet3_orbit(const ConvexCurve& curve, const std::vector<PhaseState>& orbit);

struct FiniteDifferenceOptions {
    double step = 1e-2;  // finest step is step / 2
};

/// Same jet from 5-point tensor-product central differences of the numeric
/// map, with one Richardson level.
Jet2D jet3_T2_finite_difference(const ConvexCurve& curve, const Diameter& d, const FiniteDifferenceOptions& options = {});

struct ComplexNormalCoeffs {
    /// Rotation angle in the chart, in (0, 2pi); above pi when the map turns clockwise in (s, p).
    double gamma = 0.0;
    /// (ds, dp) = w z + conj(w z), with omega(w, conj w) = i for the area form omega = ds ^ dp.
    std::complex<double> w_s;
    std::complex<double> w_p;
    std::complex<double> c20, c11, c02, c30, c21, c12, c03;

    std::complex<double> coeff(int i, int j) const;
};

struct ComplexifyOptions {
    /// Extra phase applied to the eigenvector (residual normalization freedom).
    double phase = 0.0;
    double resonance_tol = kDefaultResonanceTol;
};

/// Area-normalized complex eigen-coordinates of the linear part and the
/// resulting coefficients of z' = e^{i gamma}(z + sum c_ij z^i zbar^j).
/// Throws NotElliptic or Resonant.
ComplexNormalCoeffs complexify(const Jet2D& jet, const ComplexifyOptions& options = {});

/// Real jet rebuilt from the complex form; inverse of complexify.
Jet2D reconstruct(const ComplexNormalCoeffs& c);

struct TwistResult {
    double tau1 = 0.0;
    double gamma = 0.0;
    double imag_residue = 0.0;
    /// (1/i)(c21 + 2|c20|^2 (...)) with |c20|^2 also on the 1/(e^{3i gamma} - 1)
    /// term; differs from tau1 whenever |c20| != |c02|.
    std::complex<double> printed_form;
    std::complex<double> c20;
    std::complex<double> c21;
    double oracle_residual = 0.0;  // relative gap between series and FD jets
    double phase_residual = 0.0;   // spread over eigenbasis phases
};

/// Twist coefficient
///   tau1 = (1/i)(c21 + 2|c20|^2 (2e+1)/(e-1) + 2|c02|^2 / (e^3 - 1)),  e = e^{i gamma}.
/// Throws Resonant.
TwistResult tau1(const ComplexNormalCoeffs& c, double resonance_tol = kDefaultResonanceTol);

/// Im c21 - 3|c20|^2 cot(gamma/2) - |c02|^2 cot(3 gamma/2); equals the formula
/// above for area-preserving jets.
double tau1_real_form(const ComplexNormalCoeffs& c);

struct TwistOptions {
    bool cross_check = true;  // compute the FD jet and the phase spread
    int phases = 8;
    std::uint64_t seed = 0x5eed'b111'a4d5ULL;
    double resonance_tol = kDefaultResonanceTol;
};

/// Full pipeline: series jet, complexification, tau1 and diagnostics.
TwistResult twist_coefficient(const ConvexCurve& curve, const Diameter& d, const TwistOptions& options = {});

/// Predicted coefficient of lambda''''(0) in tau1(beta) - tau1(alpha).
/// Throws Degenerate when any of L, L - R0, L - Rpi, L - R0 - Rpi vanishes.
double tau1_slope(double length, double r0, double rpi);

struct IslandProbe {
    double max_excursion = 0.0;          // max (s, p) distance from the orbit point
    std::optional<double> rotation;      // mean turns per return in linear normal coordinates
    int iterations = 0;
};

/// Iterates a ring of radius delta around orbit.front() under T^n
/// (n = orbit size).
IslandProbe island_probe(const ConvexCurve& curve, const std::vector<PhaseState>& orbit, double delta,
                         int iterations, int ring = 16);
IslandProbe island_probe(const ConvexCurve& curve, const Diameter& d, double delta, int iterations, int ring = 16);

}  // namespace billiards
