#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <span>

namespace billiards {

/// Truncated bivariate power series sum c(a,b) u^a v^b over a + b <= N.
/// Arithmetic drops every term of total degree above N.
template <typename T, int N>
class Jet2 {
public:
    static constexpr int kDegree = N;
    static constexpr int kSize = (N + 1) * (N + 2) / 2;

    static constexpr int index(int a, int b) {
        const int d = a + b;
        return d * (d + 1) / 2 + b;
    }

    Jet2() { c_.fill(T{}); }
    Jet2(T constant) {  // NOLINT(google-explicit-constructor)
        c_.fill(T{});
        c_[0] = constant;
    }

    /// value + du (which == 0) or value + dv (which == 1).
    static Jet2 variable(int which, T value) {
        Jet2 j(value);
        j.c_[which == 0 ? index(1, 0) : index(0, 1)] = T{1};
        return j;
    }

    T coeff(int a, int b) const { return (a < 0 || b < 0 || a + b > N) ? T{} : c_[index(a, b)]; }
    T& coeff(int a, int b) { return c_[index(a, b)]; }
    T constant() const { return c_[0]; }
    void set_constant(T v) { c_[0] = v; }

    Jet2 nilpotent() const {
        Jet2 r = *this;
        r.c_[0] = T{};
        return r;
    }

    /// Part of exact total degree d.
    Jet2 homogeneous(int d) const {
        Jet2 r;
        for (int a = 0; a <= d; ++a) r.c_[index(a, d - a)] = c_[index(a, d - a)];
        return r;
    }

    Jet2& operator+=(const Jet2& o) {
        for (int i = 0; i < kSize; ++i) c_[i] += o.c_[i];
        return *this;
    }
    Jet2& operator-=(const Jet2& o) {
        for (int i = 0; i < kSize; ++i) c_[i] -= o.c_[i];
        return *this;
    }
    Jet2& operator*=(T s) {
        for (auto& v : c_) v *= s;
        return *this;
    }
    Jet2& operator*=(const Jet2& o) { return *this = *this * o; }

    friend Jet2 operator+(Jet2 l, const Jet2& r) { return l += r; }
    friend Jet2 operator-(Jet2 l, const Jet2& r) { return l -= r; }
    friend Jet2 operator-(Jet2 j) { return j *= T{-1}; }
    friend Jet2 operator*(Jet2 l, T s) { return l *= s; }
    friend Jet2 operator*(T s, Jet2 r) { return r *= s; }
    friend Jet2 operator+(Jet2 l, T s) {
        l.c_[0] += s;
        return l;
    }
    friend Jet2 operator+(T s, Jet2 r) { return r + s; }
    friend Jet2 operator-(Jet2 l, T s) { return l + (-s); }
    friend Jet2 operator-(T s, const Jet2& r) { return (-r) + s; }

    friend Jet2 operator*(const Jet2& l, const Jet2& r) {
        Jet2 out;
        for (int d1 = 0; d1 <= N; ++d1) {
            for (int b1 = 0; b1 <= d1; ++b1) {
                const T x = l.c_[index(d1 - b1, b1)];
                if (x == T{}) continue;
                for (int d2 = 0; d1 + d2 <= N; ++d2) {
                    for (int b2 = 0; b2 <= d2; ++b2) {
                        out.c_[index(d1 - b1 + d2 - b2, b1 + b2)] += x * r.c_[index(d2 - b2, b2)];
                    }
                }
            }
        }
        return out;
    }

    friend Jet2 operator/(const Jet2& l, const Jet2& r) { return l * reciprocal(r); }

private:
    std::array<T, kSize> c_;
};

/// f(x) for a univariate f given by taylor[k] = f^{(k)}(x0)/k!, x0 = x.constant().
template <typename T, int N>
Jet2<T, N> compose(const Jet2<T, N>& x, std::span<const T> taylor) {
    const Jet2<T, N> dx = x.nilpotent();
    Jet2<T, N> out(taylor[0]);
    Jet2<T, N> pw(T{1});
    for (int k = 1; k <= N && k < static_cast<int>(taylor.size()); ++k) {
        pw = pw * dx;
        out += pw * taylor[k];
    }
    return out;
}

/// Converts derivatives f^{(k)} to Taylor coefficients in place.
template <std::size_t M>
void to_taylor(std::array<double, M>& d) {
    double fact = 1.0;
    for (std::size_t k = 1; k < M; ++k) {
        fact *= static_cast<double>(k);
        d[k] /= fact;
    }
}

template <int N>
Jet2<double, N> sin(const Jet2<double, N>& x) {
    std::array<double, N + 1> t{};
    const double s = std::sin(x.constant());
    const double c = std::cos(x.constant());
    for (int k = 0; k <= N; ++k) {
        const double v[4] = {s, c, -s, -c};
        t[k] = v[k % 4];
    }
    to_taylor(t);
    return compose<double, N>(x, t);
}

template <int N>
Jet2<double, N> cos(const Jet2<double, N>& x) {
    std::array<double, N + 1> t{};
    const double s = std::sin(x.constant());
    const double c = std::cos(x.constant());
    for (int k = 0; k <= N; ++k) {
        const double v[4] = {c, -s, -c, s};
        t[k] = v[k % 4];
    }
    to_taylor(t);
    return compose<double, N>(x, t);
}

template <typename T, int N>
Jet2<T, N> reciprocal(const Jet2<T, N>& x) {
    // 1/(x0 + dx) = sum (-dx)^k / x0^{k+1}
    std::array<T, N + 1> t{};
    const T inv = T{1} / x.constant();
    T p = inv;
    for (int k = 0; k <= N; ++k) {
        t[k] = p;
        p *= -inv;
    }
    return compose<T, N>(x, t);
}

template <int N>
Jet2<double, N> sqrt(const Jet2<double, N>& x) {
    // Binomial series of (x0 + dx)^{1/2}.
    std::array<double, N + 1> t{};
    const double x0 = x.constant();
    double binom = 1.0;
    for (int k = 0; k <= N; ++k) {
        t[k] = binom * std::pow(x0, 0.5 - k);
        binom *= (0.5 - k) / (k + 1);
    }
    return compose<double, N>(x, t);
}

template <int N>
Jet2<double, N> atan(const Jet2<double, N>& x) {
    // atan' = 1/(1+x^2); integrate the series of the derivative.
    const double x0 = x.constant();
    Jet2<double, N> u = Jet2<double, N>::variable(0, x0);
    Jet2<double, N> d = reciprocal(1.0 + u * u);
    std::array<double, N + 1> t{};
    t[0] = std::atan(x0);
    for (int k = 1; k <= N; ++k) t[k] = d.coeff(k - 1, 0) / k;
    return compose<double, N>(x, t);
}

/// Evaluates the polynomial p(u, v) at series arguments (substitution).
template <typename T, int N, typename S>
Jet2<S, N> substitute(const Jet2<T, N>& p, const Jet2<S, N>& u, const Jet2<S, N>& v) {
    std::array<Jet2<S, N>, N + 1> up;
    std::array<Jet2<S, N>, N + 1> vp;
    up[0] = Jet2<S, N>(S{1});
    vp[0] = Jet2<S, N>(S{1});
    for (int k = 1; k <= N; ++k) {
        up[k] = up[k - 1] * u;
        vp[k] = vp[k - 1] * v;
    }
    Jet2<S, N> out;
    for (int d = 0; d <= N; ++d) {
        for (int b = 0; b <= d; ++b) {
            const T c = p.coeff(d - b, b);
            if (c == T{}) continue;
            out += (up[d - b] * vp[b]) * S(c);
        }
    }
    return out;
}

}  // namespace billiards
