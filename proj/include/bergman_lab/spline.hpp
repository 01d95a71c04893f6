#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "error.hpp"

namespace bergman_lab {

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
/// Preserves monotonicity of the data and is C^1; the second derivative is
/// piecewise linear with jumps at the knots.
class MonotoneCubicSpline {
public:
    MonotoneCubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n) throw DomainError("spline: need at least two (x, y) pairs of equal length");
        for (std::size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1])) throw DomainError("spline: x values must be strictly increasing");

        std::vector<double> secant(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) secant[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);

        slope_.assign(n, 0.0);
        slope_[0] = secant[0];
        slope_[n - 1] = secant[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double s0 = secant[i - 1];
            const double s1 = secant[i];
            if (s0 * s1 <= 0) {
                slope_[i] = 0;
            } else {
                // weighted harmonic mean
                const double h0 = x_[i] - x_[i - 1];
                const double h1 = x_[i + 1] - x_[i];
                const double w0 = 2 * h1 + h0;
                const double w1 = h1 + 2 * h0;
                slope_[i] = (w0 + w1) / (w0 / s0 + w1 / s1);
            }
        }
    }

    double front() const { return x_.front(); }
    double back() const { return x_.back(); }

    double operator()(double x) const { return eval(x, 0); }
    double derivative(double x) const { return eval(x, 1); }
    double second_derivative(double x) const { return eval(x, 2); }

private:
    double eval(double x, int order) const {
        if (x < x_.front() || x > x_.back()) throw DomainError("spline: argument outside the tabulated range");
        std::size_t i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
        i = std::clamp<std::size_t>(i, 1, x_.size() - 1) - 1;
        const double h = x_[i + 1] - x_[i];
        const double t = (x - x_[i]) / h;
        const double y0 = y_[i], y1 = y_[i + 1];
        const double m0 = slope_[i] * h, m1 = slope_[i + 1] * h;
        switch (order) {
        case 0: {
            const double t2 = t * t, t3 = t2 * t;
            return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1;
        }
        case 1: {
            const double t2 = t * t;
            return ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0 + (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * m1) / h;
        }
        default:
            return ((12 * t - 6) * y0 + (6 * t - 4) * m0 + (-12 * t + 6) * y1 + (6 * t - 2) * m1) / (h * h);
        }
    }

    std::vector<double> x_, y_, slope_;
};

} // namespace bergman_lab
