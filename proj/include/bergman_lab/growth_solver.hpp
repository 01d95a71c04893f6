#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "error.hpp"
#include "majorant.hpp"
#include "roots.hpp"

namespace bergman_lab {

/// Root N(k) of N^2 J J' e^{2 N J'/J} = k and the growth value f(k).
struct GrowthSolution {
    double k = 0;
    double N_of_k = 0;
    double f_of_k = 0;
    double residual = 0; // |LHS(N) - k| / k
    double k0 = 0;
    double beta = 0;     // J'(N)/J(N)
    bool clamped = false; // k < k0: f held at f(k0)
};

/// Maximizer of k r^2 subject to r = eps M(N)^{-1/N}, k r^2 = N log(1/eps),
/// eps in (eps0(k), eps1].
struct DecayOptimum {
    double r_bar = 0;
    double eps_bar = 0;
    double N_bar = 0;
    double max_kr2 = 0;
    double eps1 = 0;
    double C_eps1 = 0;
    double eps0 = 0;          // left end of the admissible interval
    double eps_critical = 0;  // unconstrained critical point of h on (eps0, 1)
    double h_critical = 0;    // h at eps_critical (= f^2 log k)
    bool interior = false;    // eps_critical <= eps1
};

/// log of the defining left-hand side: 2 log N + 2 log J + log beta + 2 N beta.
inline double defining_lhs_log(const Majorant& m, double N) {
    const double b = beta(m, N);
    if (!(b > 0)) return -std::numeric_limits<double>::infinity();
    return 2 * std::log(N) + 2 * log_J(m, N) + std::log(b) + 2 * N * b;
}

inline double defining_lhs_log_derivative(const Majorant& m, double N) {
    const double b = beta(m, N);
    const double bp = beta_prime(m, N);
    return 2 / N + 4 * b + bp / b + 2 * N * bp;
}

/// k0 = x0^2 J(x0) J'(x0) e^{2 x0 J'(x0)/J(x0)}.
inline double k0_of(const Majorant& m) {
    std::call_once(m.cache->k0_once, [&] { m.cache->k0 = std::exp(defining_lhs_log(m, x0(m))); });
    return m.cache->k0;
}

/// Solves the log form of the defining equation for N(k) on (x0, inf).
inline GrowthSolution solve_N(const Majorant& m, double k) {
    const double k0 = k0_of(m);
    if (!(k > k0))
        throw DomainError("solve_N: k = " + std::to_string(k) + " is below threshold k0 = " + std::to_string(k0));
    const double lo = x0(m);
    const double target = std::log(k);
    auto F = [&](double N) { return defining_lhs_log(m, N) - target; };

    double hi = std::max(2 * lo, lo + 1);
    int doublings = 0;
    for (; doublings < 200; ++doublings) {
        if (hi > m.x_max) hi = m.x_max;
        if (F(hi) > 0) break;
        if (hi == m.x_max) throw DomainError("solve_N: root lies beyond the majorant's domain");
        hi *= 2;
    }
    if (doublings == 200) throw NumericalError("solve_N: no bracket after 200 doublings");

    const double N = safeguarded_newton(
        [&](double x) { return std::pair{F(x), defining_lhs_log_derivative(m, x)}; }, lo, hi, 1e-15 * std::max(1.0, target));

    GrowthSolution sol;
    sol.k = k;
    sol.N_of_k = N;
    sol.k0 = k0;
    sol.beta = beta(m, N);
    sol.residual = std::abs(std::expm1(F(N)));
    sol.f_of_k = N * std::sqrt(sol.beta) / std::sqrt(target);
    if (!(sol.residual < 1e-10)) throw NumericalError("solve_N: residual " + std::to_string(sol.residual));
    return sol;
}

/// Full growth evaluation, including the clamp f(k) = f(k0) for 1 < k < k0.
inline GrowthSolution growth(const Majorant& m, double k) {
    if (!(k > 1)) throw DomainError("f(k) requires k > 1");
    const double k0 = k0_of(m);
    if (k > k0) return solve_N(m, k);
    GrowthSolution sol;
    sol.k = k;
    sol.k0 = k0;
    sol.N_of_k = x0(m);
    sol.beta = beta(m, sol.N_of_k);
    sol.f_of_k = sol.N_of_k * std::sqrt(sol.beta) / std::sqrt(std::log(k0));
    sol.clamped = k < k0;
    return sol;
}

inline double f_of_k(const Majorant& m, double k) { return growth(m, k).f_of_k; }

/// Growth of the analytic class (bounded J): f(k) = sqrt(k / log k).
inline double analytic_f(double k) {
    if (!(k > 1)) throw DomainError("f(k) requires k > 1");
    return std::sqrt(k / std::log(k));
}

/// g(x) = x J(x)^2.
inline double g_of(const Majorant& m, double x) { return x * std::exp(2 * log_J(m, x)); }

inline double log_g(const Majorant& m, double x) { return std::log(x) + 2 * log_J(m, x); }

/// Inverse of g on its increasing branch [x0, inf), in log form.
inline double g_inverse_log(const Majorant& m, double log_y) {
    const double lo = x0(m);
    const double log_g_lo = log_g(m, lo);
    if (log_y < log_g_lo) throw DomainError("g_inverse: argument below g(x0)");
    if (log_y == log_g_lo) return lo;
    double hi = std::max(2 * lo, lo + 1);
    for (int i = 0;; ++i) {
        if (hi > m.x_max) hi = m.x_max;
        if (log_g(m, hi) >= log_y) break;
        if (hi == m.x_max || i >= 200) throw DomainError("g_inverse: argument beyond the majorant's domain");
        hi *= 2;
    }
    return bisect([&](double x) { return log_g(m, x) - log_y; }, lo, hi);
}

inline double g_inverse(const Majorant& m, double y) {
    if (!(y > 0)) throw DomainError("g_inverse: argument must be positive");
    return g_inverse_log(m, std::log(y));
}

/// Smallest k >= k0 beyond which f is strictly increasing.
///
/// (f^2)' has the sign of log k - 1 - 2 N beta = 2 log J(N) + log(N^2 beta) - 1,
/// which is increasing in N past x0; the threshold is its root mapped to k.
inline double f_increasing_from(const Majorant& m) {
    const double lo = x0(m);
    auto q = [&](double N) {
        const double b = beta(m, N);
        if (!(b > 0)) return -std::numeric_limits<double>::infinity();
        return 2 * log_J(m, N) + std::log(N * N * b) - 1;
    };
    const double start = std::nextafter(lo, m.x_max);
    if (q(start) > 0) return k0_of(m);
    double hi = std::max(2 * lo, lo + 1);
    for (int i = 0; q(hi) <= 0; ++i) {
        if (i >= 200 || hi >= m.x_max) throw NumericalError("f_increasing_from: no threshold found");
        hi = std::min(2 * hi, m.x_max);
    }
    const double N_star = bisect(q, start, hi);
    return std::exp(defining_lhs_log(m, N_star));
}

namespace detail {

// log of k eps^2 / log(1/eps)
inline double constraint_log(double k, double eps) {
    return std::log(k) + 2 * std::log(eps) - std::log(-std::log(eps));
}

} // namespace detail

/// N(eps) = g^{-1}(k eps^2 / log(1/eps)).
inline double N_of_eps(const Majorant& m, double k, double eps) {
    return g_inverse_log(m, detail::constraint_log(k, eps));
}

/// h(eps) = N(eps) log(1/eps).
inline double h_of_eps(const Majorant& m, double k, double eps) { return N_of_eps(m, k, eps) * -std::log(eps); }

/// Sign of h'(eps): h' = 2 g(N) (log(1/eps) - N beta(N)) / (eps g'(N)) with g' > 0.
inline double h_slope_sign(const Majorant& m, double k, double eps) {
    const double N = N_of_eps(m, k, eps);
    const double diff = -std::log(eps) - N * beta(m, N);
    return diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
}

/// Left end eps0(k) of the admissible interval: k eps^2 / log(1/eps) = g(x0).
inline double eps0_of(const Majorant& m, double k) {
    const double target = log_g(m, x0(m));
    auto F = [&](double eps) { return detail::constraint_log(k, eps) - target; };
    double lo = 0.5;
    while (F(lo) > 0) {
        lo *= 0.5;
        if (lo < 1e-300) throw NumericalError("eps0: no bracket");
    }
    return bisect(F, lo, std::nextafter(1.0, 0.0));
}

/// Maximizes k r^2 over the admissible set with eps <= eps1.
inline DecayOptimum optimize_decay(const Majorant& m, double k, double eps1) {
    if (!(eps1 > 0 && eps1 < 1)) throw DomainError("optimize_decay: eps1 must lie in (0, 1)");
    if (!(k > 1)) throw DomainError("optimize_decay: k must exceed 1");
    DecayOptimum opt;
    opt.eps1 = eps1;
    opt.C_eps1 = 4 * std::log(1 / eps1) / (eps1 * eps1);
    opt.eps0 = eps0_of(m, k);
    if (!(opt.eps0 < eps1)) throw DomainError("optimize_decay: k too small for eps1 (empty admissible interval)");

    // h is unimodal on (eps0, 1): golden section for the bracket, then
    // bisection on the sign of h' for the critical point itself.
    const double right = 1 - 1e-12;
    auto h = [&](double eps) { return h_of_eps(m, k, eps); };
    auto [a, b] = golden_section_max(h, opt.eps0, right, 1e-9);
    double lo = std::max(opt.eps0, a - 1e-6);
    double hi = std::min(right, b + 1e-6);
    auto slope = [&](double eps) { return h_slope_sign(m, k, eps); };
    if (slope(lo) <= 0) lo = opt.eps0 * (1 + 1e-15) + 1e-300;
    if (slope(hi) >= 0) hi = right;
    if (slope(lo) <= 0 || slope(hi) >= 0) throw NumericalError("optimize_decay: critical point not bracketed");
    opt.eps_critical = bisect(slope, lo, hi);
    opt.h_critical = h(opt.eps_critical);

    opt.interior = opt.eps_critical <= eps1;
    opt.eps_bar = opt.interior ? opt.eps_critical : eps1;
    opt.N_bar = N_of_eps(m, k, opt.eps_bar);
    opt.max_kr2 = opt.N_bar * std::log(1 / opt.eps_bar);
    opt.r_bar = opt.eps_bar * std::exp(-m.log_M(opt.N_bar) / opt.N_bar);
    return opt;
}

/// Radii separating the very-near, near and far regions.
struct RegionBoundaries {
    double d_near = 0;
    double d_far = 0;
};

inline RegionBoundaries region_boundaries(double k, double gamma, double f_val) {
    if (!(k > 1)) throw DomainError("region_boundaries: k must exceed 1");
    if (!(gamma > 0)) throw DomainError("region_boundaries: gamma must be positive");
    if (!(f_val >= gamma)) throw DomainError("region_boundaries: invalid region spec, f(k) < gamma");
    const double scale = std::sqrt(std::log(k) / k);
    return {gamma * scale, f_val * scale};
}

/// Either a majorant class or the analytic class (J bounded).
struct GrowthModel {
    std::optional<Majorant> majorant; // empty: analytic

    static GrowthModel analytic() { return {}; }

    double f(double k) const { return majorant ? f_of_k(*majorant, k) : analytic_f(k); }
    std::string name() const { return majorant ? majorant->name : "analytic"; }
};

} // namespace bergman_lab
