#pragma once

#include <cmath>
#include <complex>

#include "billiards/birkhoff.hpp"

// Independent twist evaluations used to check the closed-form coefficient.
namespace testing::oracle {

using namespace billiards;
using cd = std::complex<double>;
using CS = ComplexSeries3;

// Series in (z, zbar) of the conjugate function.
inline CS conj_series(const CS& f) {
    CS g;
    for (int d = 0; d <= 3; ++d)
        for (int j = 0; j <= d; ++j) g.coeff(j, d - j) = std::conj(f.coeff(d - j, j));
    return g;
}

// Removes the quadratic terms of z -> e^{i gamma}(z + sum c_ij z^i zbar^j) by an
// explicit near-identity change of variable and reads the twist off the
// zeta^2 zetabar coefficient of the conjugated map. Returns NaN if the
// quadratic terms survive.
inline double twist_by_normal_form(const ComplexNormalCoeffs& c, double* imag = nullptr) {
    const cd lam = std::polar(1.0, c.gamma);
    CS map;
    map.coeff(1, 0) = lam;
    for (int d = 2; d <= 3; ++d)
        for (int j = 0; j <= d; ++j) map.coeff(d - j, j) = lam * c.coeff(d - j, j);
    CS change;
    change.coeff(1, 0) = 1.0;
    for (int j = 0; j <= 2; ++j) {
        const int i = 2 - j;
        change.coeff(i, j) = map.coeff(i, j) / (std::pow(lam, i) * std::pow(std::conj(lam), j) - lam);
    }
    const CS zeta = CS::variable(0, 0.0);
    const CS image = substitute(map, change, conj_series(change));
    const CS quadratic = change - zeta;
    CS inverse = zeta;
    for (int it = 0; it < 4; ++it) inverse = zeta - substitute(quadratic, inverse, conj_series(inverse));
    const CS conjugated = substitute(inverse, image, conj_series(image));
    for (int j = 0; j <= 2; ++j)
        if (std::abs(conjugated.coeff(2 - j, j)) > 1e-12) return std::nan("");
    const cd t = conjugated.coeff(2, 1) / (cd(0, 1) * lam);
    if (imag) *imag = t.imag();
    return t.real();
}

// Mean rotation per step minus gamma, divided by the mean of |z|^2, for the
// cubic model map started at radius r. Tends to the twist as r -> 0.
inline double twist_by_rotation(const ComplexNormalCoeffs& c, double r, int steps) {
    const cd lam = std::polar(1.0, c.gamma);
    auto step = [&](cd z) {
        const cd zb = std::conj(z);
        return lam * (z + c.c20 * z * z + c.c11 * z * zb + c.c02 * zb * zb + c.c30 * z * z * z + c.c21 * z * z * zb +
                      c.c12 * z * zb * zb + c.c03 * zb * zb * zb);
    };
    cd z = r;
    double turn = 0.0;
    double radius_sq = 0.0;
    for (int i = 0; i < steps; ++i) {
        const cd next = step(z);
        turn += std::arg(next / z);
        radius_sq += std::norm(z);
        z = next;
    }
    const double g = c.gamma > kPi ? c.gamma - kTwoPi : c.gamma;
    return (turn / steps - g) / (radius_sq / steps);
}

}  // namespace testing::oracle
