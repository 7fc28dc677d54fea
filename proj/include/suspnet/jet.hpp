// Truncated Taylor series in one variable: c[k] = f^(k)(x0) / k!.
#pragma once

#include <array>
#include <cmath>

namespace suspnet {

template <int N>
struct Jet {
    std::array<double, N + 1> c{};

    Jet() = default;
    Jet(double v) { c[0] = v; }  // NOLINT: constants convert implicitly

    static Jet variable(double x0) {
        Jet j(x0);
        if constexpr (N >= 1) j.c[1] = 1.0;
        return j;
    }

    double val() const { return c[0]; }

    // k-th derivative at x0
    double d(int k) const {
        double f = 1.0;
        for (int i = 2; i <= k; ++i) f *= i;
        return c[k] * f;
    }

    Jet& operator+=(const Jet& o) { for (int k = 0; k <= N; ++k) c[k] += o.c[k]; return *this; }
    Jet& operator-=(const Jet& o) { for (int k = 0; k <= N; ++k) c[k] -= o.c[k]; return *this; }
    Jet& operator*=(double s) { for (auto& v : c) v *= s; return *this; }
};

template <int N> Jet<N> operator+(Jet<N> a, const Jet<N>& b) { return a += b; }
template <int N> Jet<N> operator-(Jet<N> a, const Jet<N>& b) { return a -= b; }
template <int N> Jet<N> operator-(Jet<N> a) { a *= -1.0; return a; }
template <int N> Jet<N> operator*(Jet<N> a, double s) { return a *= s; }
template <int N> Jet<N> operator*(double s, Jet<N> a) { return a *= s; }
template <int N> Jet<N> operator+(Jet<N> a, double s) { a.c[0] += s; return a; }
template <int N> Jet<N> operator+(double s, Jet<N> a) { a.c[0] += s; return a; }
template <int N> Jet<N> operator-(Jet<N> a, double s) { a.c[0] -= s; return a; }
template <int N> Jet<N> operator-(double s, const Jet<N>& a) { return -a + s; }

template <int N>
Jet<N> operator*(const Jet<N>& a, const Jet<N>& b) {
    Jet<N> r;
    for (int k = 0; k <= N; ++k) {
        double s = 0.0;
        for (int i = 0; i <= k; ++i) s += a.c[i] * b.c[k - i];
        r.c[k] = s;
    }
    return r;
}

template <int N>
Jet<N> operator/(const Jet<N>& a, const Jet<N>& b) {
    Jet<N> r;
    for (int k = 0; k <= N; ++k) {
        double s = a.c[k];
        for (int i = 1; i <= k; ++i) s -= b.c[i] * r.c[k - i];
        r.c[k] = s / b.c[0];
    }
    return r;
}

template <int N> Jet<N> operator/(double s, const Jet<N>& b) { return Jet<N>(s) / b; }
template <int N> Jet<N> operator/(Jet<N> a, double s) { return a *= 1.0 / s; }

template <int N>
Jet<N> sqrt(const Jet<N>& a) {
    Jet<N> r;
    r.c[0] = std::sqrt(a.c[0]);
    for (int k = 1; k <= N; ++k) {
        double s = a.c[k];
        for (int i = 1; i < k; ++i) s -= r.c[i] * r.c[k - i];
        r.c[k] = s / (2.0 * r.c[0]);
    }
    return r;
}

// Derivative series; the top coefficient is lost.
template <int N>
Jet<N> deriv(const Jet<N>& a) {
    Jet<N> r;
    for (int k = 0; k < N; ++k) r.c[k] = (k + 1) * a.c[k + 1];
    return r;
}

}  // namespace suspnet
