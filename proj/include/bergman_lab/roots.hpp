#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <utility>

#include "error.hpp"

namespace bergman_lab {

/// Bisection on a sign change of `f` in [lo, hi]. Runs until the bracket
/// cannot be halved any further in double precision, so the result is the
/// floating-point neighbour of the root.
template <class F>
double bisect(F&& f, double lo, double hi) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0) return lo;
    if (fhi == 0) return hi;
    if ((flo > 0) == (fhi > 0)) throw NumericalError("bisect: no sign change in bracket");
    for (int it = 0; it < 2000; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0) return mid;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return lo + 0.5 * (hi - lo);
}

/// Newton's method kept inside a shrinking sign-change bracket; a step that
/// leaves the bracket or fails to halve it falls back to bisection.
/// `fdf(x)` returns {f(x), f'(x)}.
template <class FdF>
double safeguarded_newton(FdF&& fdf, double lo, double hi, double ftol) {
    auto [flo, dlo] = fdf(lo);
    auto [fhi, dhi] = fdf(hi);
    (void)dlo;
    (void)dhi;
    if (flo == 0) return lo;
    if (fhi == 0) return hi;
    if ((flo > 0) == (fhi > 0)) throw NumericalError("safeguarded_newton: no sign change in bracket");
    if (flo > 0) std::swap(lo, hi); // orient so that f(lo) < 0

    double x = 0.5 * (lo + hi);
    double dx_old = std::abs(hi - lo);
    double dx = dx_old;
    auto [fx, dfx] = fdf(x);
    for (int it = 0; it < 500; ++it) {
        const bool newton_outside = ((x - hi) * dfx - fx) * ((x - lo) * dfx - fx) > 0;
        const bool too_slow = std::abs(2.0 * fx) > std::abs(dx_old * dfx);
        dx_old = dx;
        if (!std::isfinite(dfx) || dfx == 0 || newton_outside || too_slow) {
            dx = 0.5 * (hi - lo);
            x = lo + dx;
        } else {
            dx = fx / dfx;
            x -= dx;
        }
        std::tie(fx, dfx) = fdf(x);
        if (std::abs(fx) <= ftol) return x;
        if (std::abs(dx) <= 4 * std::numeric_limits<double>::epsilon() * std::abs(x)) return x;
        if (fx < 0) lo = x;
        else hi = x;
    }
    throw NumericalError("safeguarded_newton: no convergence");
}

/// Golden-section search for the maximum of a unimodal `f` on [a, b].
/// Returns the final bracket.
template <class F>
std::pair<double, double> golden_section_max(F&& f, double a, double b, double xtol) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < 500 && (b - a) > xtol; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return {a, b};
}

} // namespace bergman_lab
