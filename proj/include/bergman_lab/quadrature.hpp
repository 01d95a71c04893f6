#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <type_traits>
#include <vector>

#include "error.hpp"

namespace bergman_lab {

/// Controls of the adaptive Gauss-Kronrod integrator.
struct QuadratureSpec {
    int initial_panels = 16;        // uniform panels before refinement
    double rel_tol = 1e-14;         // stop when error <= rel_tol * |integral|
    double abs_tol = 0.0;
    int max_subdivisions = 4000;
};

template <class Real, class Value = Real>
struct QuadratureResult {
    Value value{};
    Real error{};
    int panels = 0;
    bool converged = false;
};

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
inline constexpr std::array<long double, 11> kronrod21_nodes = {
    0.995657163025808080735527280689003L, 0.973906528517171720077964012084452L,
    0.930157491355708226001207180059508L, 0.865063366688984510732096688423493L,
    0.780817726586416897063717578345042L, 0.679409568299024406234327365114874L,
    0.562757134668604683339000099272694L, 0.433395394129247190799265943165784L,
    0.294392862701460198131126603103866L, 0.148874338981631210884826001129720L,
    0.000000000000000000000000000000000L};

inline constexpr std::array<long double, 11> kronrod21_weights = {
    0.011694638867371874278064396062192L, 0.032558162307964727478818972459390L,
    0.054755896574351996031381300244580L, 0.075039674810919952767043140916190L,
    0.093125454583697605535065465083366L, 0.109387158802297641899210590325805L,
    0.123491976262065851077208980307335L, 0.134709217311473325928054001771707L,
    0.142775938577060080797094273138717L, 0.147739104901338491374841515972068L,
    0.149445554002916905664936468389821L};

// Gauss weights for the odd-indexed Kronrod nodes.
inline constexpr std::array<long double, 5> gauss10_weights = {
    0.066671344308688137593568809893332L, 0.149451349150580593145776339657697L,
    0.219086362515982043995534934228163L, 0.269266719309996355091226921569469L,
    0.295524224714752870173892994651338L};

template <class Real, class Value>
struct Panel {
    Real a, b;
    Value value;
    Real error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class Real, class F, class Value = std::invoke_result_t<F&, Real>>
Panel<Real, Value> gauss_kronrod21(F& f, Real a, Real b) {
    const Real center = (a + b) / 2;
    const Real half = (b - a) / 2;
    const Value fc = f(center);
    Value kronrod = fc * Real(kronrod21_weights[10]);
    Value gauss{};
    Real abs_sum = std::abs(kronrod);
    for (int i = 0; i < 10; ++i) {
        const Real dx = half * Real(kronrod21_nodes[i]);
        const Value f1 = f(center - dx);
        const Value f2 = f(center + dx);
        kronrod += Real(kronrod21_weights[i]) * (f1 + f2);
        abs_sum += Real(kronrod21_weights[i]) * (std::abs(f1) + std::abs(f2));
        if (i % 2 == 1) gauss += Real(gauss10_weights[i / 2]) * (f1 + f2);
    }
    const Value value = kronrod * half;
    Real error = std::abs((kronrod - gauss) * half);
    // Differences below the roundoff level of the panel are not resolvable.
    const Real floor = 10 * std::numeric_limits<Real>::epsilon() * std::abs(abs_sum * half);
    if (error < floor) error = floor;
    return {a, b, value, error};
}

} // namespace detail

/// Globally adaptive Gauss-Kronrod (G10/K21) integration of `f` over [a, b]:
/// the panel with the largest error estimate is bisected until the summed
/// estimate meets the tolerance.
template <class Real, class F, class Value = std::invoke_result_t<F&, Real>>
QuadratureResult<Real, Value> integrate(F&& f, Real a, Real b, const QuadratureSpec& spec = {}) {
    if (spec.initial_panels < 1) throw DomainError("quadrature: initial_panels must be positive");
    std::priority_queue<detail::Panel<Real, Value>> queue;
    Value total{};
    Real total_error = 0;
    const Real width = (b - a) / Real(spec.initial_panels);
    for (int i = 0; i < spec.initial_panels; ++i) {
        const Real lo = a + width * Real(i);
        const Real hi = (i + 1 == spec.initial_panels) ? b : a + width * Real(i + 1);
        auto p = detail::gauss_kronrod21<Real>(f, lo, hi);
        total += p.value;
        total_error += p.error;
        queue.push(p);
    }
    auto done = [&] {
        const Real target = std::max(Real(spec.abs_tol), Real(spec.rel_tol) * std::abs(total));
        return total_error <= target;
    };
    int panels = spec.initial_panels;
    while (!done() && panels < spec.initial_panels + spec.max_subdivisions) {
        auto worst = queue.top();
        const Real mid = (worst.a + worst.b) / 2;
        if (!(mid > worst.a && mid < worst.b)) break;
        queue.pop();
        auto left = detail::gauss_kronrod21<Real>(f, worst.a, mid);
        auto right = detail::gauss_kronrod21<Real>(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        ++panels;
    }
    // Re-sum from the panels to shed the drift of the running updates.
    total = 0;
    total_error = 0;
    std::vector<detail::Panel<Real, Value>> all;
    all.reserve(queue.size());
    while (!queue.empty()) {
        all.push_back(queue.top());
        queue.pop();
    }
    std::sort(all.begin(), all.end(), [](const auto& l, const auto& r) { return l.a < r.a; });
    for (const auto& p : all) {
        total += p.value;
        total_error += p.error;
    }
    QuadratureResult<Real, Value> result;
    result.value = total;
    result.error = total_error;
    result.panels = panels;
    result.converged = done();
    return result;
}

} // namespace bergman_lab
