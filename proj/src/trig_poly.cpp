#include "billiards/trig_poly.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "billiards/error.hpp"

namespace billiards {

TrigPoly::TrigPoly(std::vector<double> cos_coeffs, std::vector<double> sin_coeffs)
    : a_(std::move(cos_coeffs)), b_(std::move(sin_coeffs)) {
    const std::size_t n = std::max({a_.size(), b_.size(), std::size_t{1}});
    a_.resize(n, 0.0);
    b_.resize(n, 0.0);
    b_[0] = 0.0;
}

TrigPoly TrigPoly::cosine(int k, double amplitude) {
    TrigPoly p;
    p.set_coeff(k, amplitude, 0.0);
    return p;
}

TrigPoly TrigPoly::sine(int k, double amplitude) {
    TrigPoly p;
    p.set_coeff(k, 0.0, amplitude);
    return p;
}

void TrigPoly::set_coeff(int k, double cos_c, double sin_c) {
    if (k < 0) fail(ErrorCode::InvalidArgument, "negative harmonic index");
    if (k > degree()) {
        a_.resize(k + 1, 0.0);
        b_.resize(k + 1, 0.0);
    }
    a_[k] = cos_c;
    b_[k] = k == 0 ? 0.0 : sin_c;
}

double TrigPoly::operator()(double x) const { return evaluate_pair(*this, *this, x).first; }

std::array<double, 4> evaluate_pair_with_slope(const TrigPoly& f, const TrigPoly& g, double x) {
    const auto& fa = f.cos_coeffs();
    const auto& fb = f.sin_coeffs();
    const auto& ga = g.cos_coeffs();
    const auto& gb = g.sin_coeffs();
    const int n = std::max(f.degree(), g.degree());
    const int nf = f.degree();
    const int ng = g.degree();
    std::array<double, 4> out{fa[0], ga[0], 0.0, 0.0};
    const double c1 = std::cos(x);
    const double s1 = std::sin(x);
    double c = 1.0;
    double s = 0.0;
    for (int k = 1; k <= n; ++k) {
        if (k % 64 == 0) {
            c = std::cos(k * x);
            s = std::sin(k * x);
        } else {
            const double cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
        }
        if (k <= nf) {
            out[0] += fa[k] * c + fb[k] * s;
            out[2] += k * (fb[k] * c - fa[k] * s);
        }
        if (k <= ng) {
            out[1] += ga[k] * c + gb[k] * s;
            out[3] += k * (gb[k] * c - ga[k] * s);
        }
    }
    return out;
}

std::pair<double, double> evaluate_pair(const TrigPoly& f, const TrigPoly& g, double x) {
    const auto& fa = f.cos_coeffs();
    const auto& fb = f.sin_coeffs();
    const auto& ga = g.cos_coeffs();
    const auto& gb = g.sin_coeffs();
    const int n = std::max(f.degree(), g.degree());
    const int nf = f.degree();
    const int ng = g.degree();
    double sf = fa[0];
    double sg = ga[0];
    const double c1 = std::cos(x);
    const double s1 = std::sin(x);
    double c = 1.0;
    double s = 0.0;
    for (int k = 1; k <= n; ++k) {
        if (k % 64 == 0) {
            c = std::cos(k * x);
            s = std::sin(k * x);
        } else {
            const double cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
        }
        if (k <= nf) sf += fa[k] * c + fb[k] * s;
        if (k <= ng) sg += ga[k] * c + gb[k] * s;
    }
    return {sf, sg};
}

double TrigPoly::derivative(double x, int order) const {
    std::vector<double> d(order + 1);
    derivatives(x, d);
    return d[order];
}

void TrigPoly::derivatives(double x, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    if (out.empty()) return;
    out[0] = a_[0];
    const std::complex<double> step(std::cos(x), std::sin(x));
    std::complex<double> e(1.0, 0.0);
    for (int k = 1; k <= degree(); ++k) {
        // Re-seed periodically so the running product does not drift.
        e = (k % 64 == 0) ? std::complex<double>(std::cos(k * x), std::sin(k * x)) : e * step;
        const double ak = a_[k];
        const double bk = b_[k];
        if (ak == 0.0 && bk == 0.0) continue;
        const double c = e.real();
        const double s = e.imag();
        double kp = 1.0;
        for (std::size_t j = 0; j < out.size(); ++j) {
            // d^j/dx^j of a cos + b sin cycles with period 4.
            double v = 0.0;
            switch (j % 4) {
                case 0: v = ak * c + bk * s; break;
                case 1: v = -ak * s + bk * c; break;
                case 2: v = -ak * c - bk * s; break;
                case 3: v = ak * s - bk * c; break;
            }
            out[j] += kp * v;
            kp *= k;
        }
    }
}

TrigPoly TrigPoly::derivative(int order) const {
    TrigPoly d = *this;
    for (int o = 0; o < order; ++o) {
        TrigPoly next;
        next.a_.assign(d.a_.size(), 0.0);
        next.b_.assign(d.b_.size(), 0.0);
        for (int k = 1; k <= d.degree(); ++k) {
            next.a_[k] = k * d.b_[k];
            next.b_[k] = -k * d.a_[k];
        }
        d = std::move(next);
    }
    return d;
}

TrigPoly TrigPoly::antiderivative() const {
    if (a_[0] != 0.0) fail(ErrorCode::InvalidArgument, "antiderivative of a polynomial with a constant term is not periodic");
    TrigPoly r;
    r.a_.assign(a_.size(), 0.0);
    r.b_.assign(b_.size(), 0.0);
    for (int k = 1; k <= degree(); ++k) {
        r.a_[k] = -b_[k] / k;
        r.b_[k] = a_[k] / k;
    }
    return r;
}

TrigPoly TrigPoly::shifted(double shift) const {
    TrigPoly r = *this;
    for (int k = 1; k <= degree(); ++k) {
        const double c = std::cos(k * shift);
        const double s = std::sin(k * shift);
        r.a_[k] = a_[k] * c - b_[k] * s;
        r.b_[k] = a_[k] * s + b_[k] * c;
    }
    return r;
}

TrigPoly TrigPoly::trimmed() const {
    int d = degree();
    while (d > 0 && a_[d] == 0.0 && b_[d] == 0.0) --d;
    TrigPoly r = *this;
    r.a_.resize(d + 1);
    r.b_.resize(d + 1);
    return r;
}

double TrigPoly::sup_bound(int order) const {
    double acc = order == 0 ? std::abs(a_[0]) : 0.0;
    for (int k = 1; k <= degree(); ++k) {
        acc += std::pow(static_cast<double>(k), order) * std::hypot(a_[k], b_[k]);
    }
    return acc;
}

TrigPoly& TrigPoly::operator+=(const TrigPoly& o) {
    if (o.degree() > degree()) {
        a_.resize(o.a_.size(), 0.0);
        b_.resize(o.b_.size(), 0.0);
    }
    for (int k = 0; k <= o.degree(); ++k) {
        a_[k] += o.a_[k];
        b_[k] += o.b_[k];
    }
    return *this;
}

TrigPoly& TrigPoly::operator-=(const TrigPoly& o) {
    return *this += o * -1.0;
}

TrigPoly& TrigPoly::operator*=(double s) {
    for (auto& v : a_) v *= s;
    for (auto& v : b_) v *= s;
    return *this;
}

TrigPoly operator*(const TrigPoly& l, const TrigPoly& r) {
    // Convolution of the exponential coefficients c_k = (a_k - i b_k)/2.
    const int dl = l.degree();
    const int dr = r.degree();
    const int d = dl + dr;
    auto expo = [](const TrigPoly& p, int k) -> std::complex<double> {
        if (k == 0) return {p.cos_coeff(0), 0.0};
        const int ak = std::abs(k);
        const std::complex<double> c(0.5 * p.cos_coeff(ak), -0.5 * p.sin_coeff(ak));
        return k > 0 ? c : std::conj(c);
    };
    std::vector<double> a(d + 1, 0.0);
    std::vector<double> b(d + 1, 0.0);
    for (int k = 0; k <= d; ++k) {
        std::complex<double> acc = 0.0;
        for (int i = -dl; i <= dl; ++i) {
            const int j = k - i;
            if (j < -dr || j > dr) continue;
            acc += expo(l, i) * expo(r, j);
        }
        if (k == 0) {
            a[0] = acc.real();
        } else {
            a[k] = 2.0 * acc.real();
            b[k] = -2.0 * acc.imag();
        }
    }
    return TrigPoly(std::move(a), std::move(b));
}

TrigPoly fit_uniform(std::span<const double> samples, int degree) {
    const std::size_t n = samples.size();
    if (degree < 0 || n <= static_cast<std::size_t>(2 * degree)) {
        fail(ErrorCode::InvalidArgument, "fit_uniform needs more than 2*degree samples");
    }
    std::vector<double> a(degree + 1, 0.0);
    std::vector<double> b(degree + 1, 0.0);
    const double h = 2.0 * std::numbers::pi / static_cast<double>(n);
    for (int k = 0; k <= degree; ++k) {
        double ca = 0.0;
        double cb = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            // Reduce the product k*j mod n first to keep the angle small.
            const double x = h * static_cast<double>((static_cast<std::size_t>(k) * j) % n);
            ca += samples[j] * std::cos(x);
            cb += samples[j] * std::sin(x);
        }
        const double scale = (k == 0 ? 1.0 : 2.0) / static_cast<double>(n);
        a[k] = ca * scale;
        b[k] = k == 0 ? 0.0 : cb * scale;
    }
    return TrigPoly(std::move(a), std::move(b));
}

}  // namespace billiards
