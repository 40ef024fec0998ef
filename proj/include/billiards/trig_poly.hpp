#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace billiards {

/// Real trigonometric polynomial
///   f(x) = a[0] + sum_{k>=1} a[k] cos(kx) + b[k] sin(kx).
/// b[0] is kept for indexing symmetry and is always zero.
class TrigPoly {
public:
    TrigPoly() : a_(1, 0.0), b_(1, 0.0) {}
    explicit TrigPoly(double constant) : a_(1, constant), b_(1, 0.0) {}
    TrigPoly(std::vector<double> cos_coeffs, std::vector<double> sin_coeffs);

    static TrigPoly cosine(int k, double amplitude = 1.0);
    static TrigPoly sine(int k, double amplitude = 1.0);

    int degree() const { return static_cast<int>(a_.size()) - 1; }
    double cos_coeff(int k) const { return k <= degree() ? a_[k] : 0.0; }
    double sin_coeff(int k) const { return k <= degree() ? b_[k] : 0.0; }
    void set_coeff(int k, double cos_c, double sin_c);

    const std::vector<double>& cos_coeffs() const { return a_; }
    const std::vector<double>& sin_coeffs() const { return b_; }

    double operator()(double x) const;
    double derivative(double x, int order) const;
    /// out[j] = f^{(j)}(x) for j = 0..out.size()-1, one pass over the harmonics.
    void derivatives(double x, std::span<double> out) const;

    TrigPoly derivative(int order = 1) const;
    /// Periodic antiderivative; requires a zero constant term.
    TrigPoly antiderivative() const;
    /// g(x) = f(x - shift).
    TrigPoly shifted(double shift) const;
    /// Drops trailing harmonics whose coefficients are exactly zero.
    TrigPoly trimmed() const;

    /// Bound on sup |f^{(order)}| from the coefficient l1 norm.
    double sup_bound(int order = 0) const;

    TrigPoly& operator+=(const TrigPoly& o);
    TrigPoly& operator-=(const TrigPoly& o);
    TrigPoly& operator*=(double s);

    friend TrigPoly operator+(TrigPoly l, const TrigPoly& r) { return l += r; }
    friend TrigPoly operator-(TrigPoly l, const TrigPoly& r) { return l -= r; }
    friend TrigPoly operator*(TrigPoly l, double s) { return l *= s; }
    friend TrigPoly operator*(double s, TrigPoly r) { return r *= s; }
    friend TrigPoly operator*(const TrigPoly& l, const TrigPoly& r);

private:
    std::vector<double> a_;
    std::vector<double> b_;
};

/// (f(x), g(x)) in one pass over the harmonics.
std::pair<double, double> evaluate_pair(const TrigPoly& f, const TrigPoly& g, double x);

/// (f, g, f', g') at x in one pass.
std::array<double, 4> evaluate_pair_with_slope(const TrigPoly& f, const TrigPoly& g, double x);

/// Least-squares trigonometric fit of the given degree to samples on the
/// uniform grid x_j = 2*pi*j/N. Requires N > 2*degree.
TrigPoly fit_uniform(std::span<const double> samples, int degree);

}  // namespace billiards
