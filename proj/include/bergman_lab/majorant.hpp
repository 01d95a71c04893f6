#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "roots.hpp"
#include "spline.hpp"
#include "taylor.hpp"

namespace bergman_lab {

namespace detail {
struct MajorantCache {
    std::once_flag x0_once;
    double x0 = std::numeric_limits<double>::quiet_NaN();
    std::once_flag k0_once;
    double k0 = std::numeric_limits<double>::quiet_NaN();
};
} // namespace detail

/// A log-convex growth class M for the Taylor coefficients of the curvature.
///
/// Stores log M and its first two derivatives on [x_min, x_max]. Derived
/// quantities (J = M^{1/x}, J', the threshold x0) are free functions below.
/// Copies share one memo cache for x0 and k0; the cache is filled under
/// std::call_once and is safe for concurrent readers.
struct Majorant {
    std::string name;
    double x_min = 1.0;
    double x_max = std::numeric_limits<double>::infinity();
    std::function<double(double)> log_M;
    std::function<double(double)> dlog_M;
    std::function<double(double)> d2log_M;
    /// Known large-k shape of f(k) for this class, if any (used for ratio columns).
    std::function<double(double)> asymptotic_rate;

    std::shared_ptr<detail::MajorantCache> cache = std::make_shared<detail::MajorantCache>();
};

inline void check_domain(const Majorant& m, double x) {
    if (!(x >= m.x_min) || !(x <= m.x_max))
        throw DomainError("majorant '" + m.name + "': x = " + std::to_string(x) + " outside [" +
                          std::to_string(m.x_min) + ", " + std::to_string(m.x_max) + "]");
}

/// log J(x) = log M(x) / x.
inline double log_J(const Majorant& m, double x) {
    check_domain(m, x);
    return m.log_M(x) / x;
}

inline double J(const Majorant& m, double x) { return std::exp(log_J(m, x)); }

/// beta = J'/J = (log J)'.
inline double beta(const Majorant& m, double x) {
    check_domain(m, x);
    return m.dlog_M(x) / x - m.log_M(x) / (x * x);
}

inline double beta_prime(const Majorant& m, double x) {
    check_domain(m, x);
    return m.d2log_M(x) / x - 2 * m.dlog_M(x) / (x * x) + 2 * m.log_M(x) / (x * x * x);
}

inline double J_prime(const Majorant& m, double x) { return J(m, x) * beta(m, x); }

namespace detail {

// Builds a majorant whose derivatives come from forward-mode jets of `f`.
template <class F>
Majorant from_closed_form(std::string name, double x_min, F f) {
    Majorant m;
    m.name = std::move(name);
    m.x_min = x_min;
    m.log_M = [f](double x) { return f(x); };
    m.dlog_M = [f](double x) { return f(Jet<double, 2>::variable(x)).derivative(1); };
    m.d2log_M = [f](double x) { return f(Jet<double, 2>::variable(x)).derivative(2); };
    return m;
}

// Five-point stencils; one-sided near an edge of [lo, hi].
struct Stencil {
    double h;
    int side; // 0 central, +1 forward, -1 backward
};

inline Stencil stencil(double x, double lo, double hi) {
    const double h = 1e-3 * std::max(1.0, std::abs(x));
    if (x - 2 * h >= lo && x + 2 * h <= hi) return {h, 0};
    if (x - 2 * h < lo && x + 4 * h <= hi) return {h, 1};
    if (x + 2 * h > hi && x - 4 * h >= lo) return {h, -1};
    const double room = std::max(x - lo, hi - x) / 4.5;
    if (!(room > 0)) throw DomainError("finite difference: no room around x = " + std::to_string(x));
    return {room, x - lo >= hi - x ? -1 : 1};
}

inline double five_point_first(const std::function<double(double)>& f, double x, double lo, double hi) {
    const auto [h, side] = stencil(x, lo, hi);
    if (side == 0) return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
    const double s = side * h;
    return (-25 * f(x) + 48 * f(x + s) - 36 * f(x + 2 * s) + 16 * f(x + 3 * s) - 3 * f(x + 4 * s)) / (12 * s);
}

inline double five_point_second(const std::function<double(double)>& f, double x, double lo, double hi) {
    const auto [h, side] = stencil(x, lo, hi);
    if (side == 0) return (-f(x - 2 * h) + 16 * f(x - h) - 30 * f(x) + 16 * f(x + h) - f(x + 2 * h)) / (12 * h * h);
    const double s = side * h;
    return (35 * f(x) - 104 * f(x + s) + 114 * f(x + 2 * s) - 56 * f(x + 3 * s) + 11 * f(x + 4 * s)) / (12 * s * s);
}

inline std::vector<double> geometric_grid(double lo, double hi, std::size_t points) {
    std::vector<double> g(points);
    const double ratio = std::log(hi / lo);
    for (std::size_t i = 0; i < points; ++i)
        g[i] = lo * std::exp(ratio * static_cast<double>(i) / static_cast<double>(points - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

} // namespace detail

/// Gevrey class G^s: M(x) = x^{(s-1)x}, so J(x) = x^{s-1}. Defined on x >= 1.
inline Majorant gevrey(double s) {
    if (!(s > 1)) throw DomainError("gevrey: s must exceed 1 (the analytic case has no majorant)");
    auto m = detail::from_closed_form("gevrey(" + std::to_string(s) + ")", 1.0, [s](auto x) {
        using std::log;
        return (s - 1) * x * log(x);
    });
    m.asymptotic_rate = [s](double k) {
        const double p = 2 * s - 1;
        return std::pow(s - 1, (s - 1) / p) * std::exp((1 - s) / p) * std::pow(k, 1 / (2 * p)) / std::sqrt(std::log(k));
    };
    return m;
}

/// Denjoy quasi-analytic class: log M(x) = x * sum_{j=1..level} log(log^{(j)} x).
/// The domain starts 0.5 past the point where the innermost iterated log is 1.
inline Majorant denjoy(int level) {
    if (level < 1) throw DomainError("denjoy: level must be >= 1");
    if (level > 3) throw DomainError("denjoy: level > 3 has a domain edge beyond double range");
    double edge = 1.0;
    for (int j = 0; j < level; ++j) edge = std::exp(edge);
    auto m = detail::from_closed_form("denjoy(" + std::to_string(level) + ")", edge + 0.5, [level](auto x) {
        using std::log;
        auto iterated = log(x);
        auto sum = log(iterated);
        for (int j = 2; j <= level; ++j) {
            iterated = log(iterated);
            sum += log(iterated);
        }
        return x * sum;
    });
    if (level == 1) m.asymptotic_rate = [](double k) { return std::sqrt(k) * std::pow(std::log(k), -1.5); };
    return m;
}

/// User-supplied log M on [x_min, x_max]. Missing derivatives are replaced by
/// five-point finite differences.
inline Majorant custom(std::string name, double x_min, double x_max, std::function<double(double)> log_M,
                       std::function<double(double)> dlog_M = {}, std::function<double(double)> d2log_M = {}) {
    if (!(x_min > 0) || !(x_max > x_min)) throw DomainError("custom majorant: need 0 < x_min < x_max");
    Majorant m;
    m.name = std::move(name);
    m.x_min = x_min;
    m.x_max = x_max;
    m.log_M = std::move(log_M);
    if (dlog_M) {
        m.dlog_M = std::move(dlog_M);
    } else {
        m.dlog_M = [f = m.log_M, x_min, x_max](double x) { return detail::five_point_first(f, x, x_min, x_max); };
    }
    if (d2log_M) {
        m.d2log_M = std::move(d2log_M);
    } else {
        m.d2log_M = [f = m.log_M, x_min, x_max](double x) { return detail::five_point_second(f, x, x_min, x_max); };
    }
    return m;
}

/// Tabulated (x, log M) pairs interpolated by a monotone cubic spline.
inline Majorant custom_table(std::string name, const std::vector<std::pair<double, double>>& table) {
    std::vector<double> xs, ys;
    for (const auto& [x, y] : table) {
        xs.push_back(x);
        ys.push_back(y);
    }
    if (!xs.empty() && !(xs.front() > 0)) throw DomainError("custom table: x values must be positive");
    auto spline = std::make_shared<MonotoneCubicSpline>(std::move(xs), std::move(ys));
    return custom(std::move(name), spline->front(), spline->back(),
                  [spline](double x) { return (*spline)(x); },
                  [spline](double x) { return spline->derivative(x); },
                  [spline](double x) { return spline->second_derivative(x); });
}

namespace detail {

inline double scan_upper(const Majorant& m) {
    return std::min(m.x_max, std::max(1e6, 1e3 * m.x_min));
}

inline double compute_x0(const Majorant& m) {
    const double hi = scan_upper(m);
    const auto grid = geometric_grid(m.x_min, hi, 4096);
    std::vector<double> b(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) b[i] = beta(m, grid[i]);

    std::ptrdiff_t last_nonpositive = -1;
    for (std::size_t i = 0; i < b.size(); ++i)
        if (!(b[i] > 0)) last_nonpositive = static_cast<std::ptrdiff_t>(i);
    if (last_nonpositive == -1) return m.x_min;
    if (last_nonpositive + 1 == static_cast<std::ptrdiff_t>(b.size()))
        throw DomainError("majorant '" + m.name + "': J' <= 0 at the end of the scan window (bounded J)");

    // last sign change of J'
    const auto i = static_cast<std::size_t>(last_nonpositive);
    double turn = bisect([&](double x) { return beta(m, x) > 0 ? 1.0 : -1.0; }, grid[i], grid[i + 1]);
    while (!(beta(m, turn) > 0)) turn = std::nextafter(turn, hi);

    // J(x0) must dominate J on everything to its left.
    double left_max = log_J(m, turn);
    for (std::size_t j = 0; j <= i; ++j) left_max = std::max(left_max, log_J(m, grid[j]));
    if (left_max <= log_J(m, turn)) return turn;
    if (log_J(m, hi) < left_max)
        throw DomainError("majorant '" + m.name + "': J does not recover its initial maximum inside the scan window");
    return bisect([&](double x) { return log_J(m, x) - left_max; }, turn, hi);
}

} // namespace detail

/// Smallest x0 with J' > 0 on (x0, inf) and J(x0) >= J(y) for all y <= x0.
/// Returns x_min when J is increasing on the whole scan window.
inline double x0(const Majorant& m) {
    std::call_once(m.cache->x0_once, [&] { m.cache->x0 = detail::compute_x0(m); });
    return m.cache->x0;
}

/// Result of checking the standing hypotheses on a sampled grid.
struct MajorantCheck {
    std::size_t grid_points = 0;
    std::size_t convexity_violations = 0;  // d2 log M <= 0
    std::size_t derivative_mismatches = 0; // dlog_M vs finite differences of log_M
    bool J_eventually_increasing = false;
    bool ok() const { return convexity_violations == 0 && derivative_mismatches == 0 && J_eventually_increasing; }
    std::string message() const {
        if (convexity_violations) return "log M not strictly convex at " + std::to_string(convexity_violations) + " grid points";
        if (derivative_mismatches)
            return "derivatives disagree with log M at " + std::to_string(derivative_mismatches) + " grid points";
        if (!J_eventually_increasing) return "J is not eventually increasing";
        return "ok";
    }
};

/// Samples 512 geometric points in (x_min, max(1e6, 100 x_min)] (clipped to x_max).
inline MajorantCheck validate(const Majorant& m) {
    MajorantCheck check;
    const double hi = std::min(m.x_max, std::max(1e6, 100 * m.x_min));
    auto grid = detail::geometric_grid(m.x_min, hi, 514);
    grid.erase(grid.begin());
    grid.pop_back();
    check.grid_points = grid.size();
    for (double x : grid) {
        if (!(m.d2log_M(x) > 0)) ++check.convexity_violations;
        const double fd = detail::five_point_first(m.log_M, x, m.x_min, m.x_max);
        const double d = m.dlog_M(x);
        if (std::abs(fd - d) > 1e-6 * std::max(1.0, std::abs(d))) ++check.derivative_mismatches;
    }
    const std::size_t tail = grid.size() / 10;
    bool increasing = true;
    for (std::size_t i = grid.size() - tail; i < grid.size(); ++i) increasing = increasing && beta(m, grid[i]) > 0;
    check.J_eventually_increasing = increasing && log_J(m, grid.back()) > log_J(m, grid[grid.size() / 2]);
    return check;
}

} // namespace bergman_lab
