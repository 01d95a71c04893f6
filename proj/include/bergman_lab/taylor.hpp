#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace bergman_lab {

/// Truncated Taylor series a_0 + a_1 e + ... + a_N e^N.
///
/// Forward-mode arithmetic on jets gives exact derivatives of closed-form
/// potentials and majorants: seed with `Jet::variable(x)` and read
/// `derivative(m)` = f^(m)(x).
template <class T, std::size_t N>
struct Jet {
    std::array<T, N + 1> c{};

    Jet() = default;
    Jet(T value) { c[0] = value; } // NOLINT(google-explicit-constructor)

    static Jet variable(T x) {
        Jet j(x);
        if constexpr (N >= 1) j.c[1] = T(1);
        return j;
    }

    T value() const { return c[0]; }

    T derivative(std::size_t m) const {
        T factorial = 1;
        for (std::size_t i = 2; i <= m; ++i) factorial *= T(i);
        return c[m] * factorial;
    }

    Jet operator-() const {
        Jet r;
        for (std::size_t i = 0; i <= N; ++i) r.c[i] = -c[i];
        return r;
    }
    Jet& operator+=(const Jet& o) {
        for (std::size_t i = 0; i <= N; ++i) c[i] += o.c[i];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        for (std::size_t i = 0; i <= N; ++i) c[i] -= o.c[i];
        return *this;
    }
    Jet& operator*=(const Jet& o) { return *this = *this * o; }
    Jet& operator/=(const Jet& o) { return *this = *this / o; }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }

    friend Jet operator*(const Jet& a, const Jet& b) {
        Jet r;
        for (std::size_t n = 0; n <= N; ++n) {
            T s = 0;
            for (std::size_t i = 0; i <= n; ++i) s += a.c[i] * b.c[n - i];
            r.c[n] = s;
        }
        return r;
    }

    friend Jet operator/(const Jet& a, const Jet& b) {
        Jet q;
        for (std::size_t n = 0; n <= N; ++n) {
            T s = a.c[n];
            for (std::size_t i = 1; i <= n; ++i) s -= b.c[i] * q.c[n - i];
            q.c[n] = s / b.c[0];
        }
        return q;
    }
};

template <class T, std::size_t N>
Jet<T, N> exp(const Jet<T, N>& a) {
    using std::exp;
    Jet<T, N> e;
    e.c[0] = exp(a.c[0]);
    for (std::size_t n = 1; n <= N; ++n) {
        T s = 0;
        for (std::size_t i = 1; i <= n; ++i) s += T(i) * a.c[i] * e.c[n - i];
        e.c[n] = s / T(n);
    }
    return e;
}

template <class T, std::size_t N>
Jet<T, N> log(const Jet<T, N>& a) {
    using std::log;
    Jet<T, N> l;
    l.c[0] = log(a.c[0]);
    for (std::size_t n = 1; n <= N; ++n) {
        T s = 0;
        for (std::size_t i = 1; i < n; ++i) s += T(i) * l.c[i] * a.c[n - i];
        l.c[n] = (a.c[n] - s / T(n)) / a.c[0];
    }
    return l;
}

template <class T, std::size_t N>
Jet<T, N> log1p(const Jet<T, N>& a) {
    using std::log1p;
    Jet<T, N> shifted = a;
    shifted.c[0] += T(1);
    Jet<T, N> l = log(shifted);
    l.c[0] = log1p(a.c[0]);
    return l;
}

/// Scalar overloads so that templated formulas compile for plain reals too.
template <class T>
T value_of(const T& x) { return x; }
template <class T, std::size_t N>
T value_of(const Jet<T, N>& x) { return x.c[0]; }

} // namespace bergman_lab
