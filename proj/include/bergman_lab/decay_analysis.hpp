#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bergman_numeric.hpp"
#include "error.hpp"
#include "growth_solver.hpp"
#include "model_geometries.hpp"

namespace bergman_lab {

enum class Region { very_near, near, far };

inline std::string to_string(Region r) {
    switch (r) {
    case Region::very_near: return "very_near";
    case Region::near: return "near";
    default: return "far";
    }
}

inline Region region_from_string(const std::string& s) {
    if (s == "very_near") return Region::very_near;
    if (s == "near") return Region::near;
    if (s == "far") return Region::far;
    throw ConfigError("region: unknown tag '" + s + "'");
}

/// One evaluation of the kernel at a pair of points.
struct KernelSample {
    double k = 0;
    Point z, w;
    double absB = 0;
    double d = 0;
    double D = 0;
    Region region = Region::very_near;
    std::optional<double> absB_exact; // closed-form value when the model has one
};

enum class DecayLaw { gaussian_in_d2, exponential_in_d, agmon_sqrtk };

inline std::string to_string(DecayLaw law) {
    switch (law) {
    case DecayLaw::gaussian_in_d2: return "gaussian_in_d2";
    case DecayLaw::exponential_in_d: return "exponential_in_d";
    default: return "agmon_sqrtk";
    }
}

inline DecayLaw decay_law_from_string(const std::string& s) {
    if (s == "gaussian" || s == "gaussian_in_d2") return DecayLaw::gaussian_in_d2;
    if (s == "exponential" || s == "exponential_in_d") return DecayLaw::exponential_in_d;
    if (s == "agmon" || s == "agmon_sqrtk") return DecayLaw::agmon_sqrtk;
    throw ConfigError("law: unknown decay law '" + s + "'");
}

/// Linear decay rate of log|B| in d at one k (far-region fit).
struct FarRate {
    double k = 0;
    double rho = 0;                // -(slope of log|B| in d)
    double agmon_normalized = 0;   // rho / sqrt(k)
    double growth_normalized = 0;  // rho / (f(k) sqrt(k log k))
    double intercept = 0;
    double r_squared = 0;
    std::size_t samples = 0;
};

struct DecayReport {
    DecayLaw law = DecayLaw::gaussian_in_d2;
    double fitted_c = 0;
    double fitted_C = 0;
    double envelope_C = 0;     // fitted_C inflated to cover every sample
    double fitted_dim = 0;     // coefficient of log k (pooled fits only)
    double r_squared = 0;
    std::size_t samples = 0;
    std::size_t violations = 0;
    bool empty = false;        // vacuous report on an empty sample set
    std::vector<FarRate> far_rates;

    bool passing() const { return violations == 0; }
};

struct DiagonalExpansion {
    double b0 = 0;
    double b1 = 0;
    double b2 = 0;
};

/// very_near if d <= gamma sqrt(log k/k); far if d >= f sqrt(log k/k); near otherwise.
inline Region classify(double k, double d, double gamma, double f_val) {
    const auto bounds = region_boundaries(k, gamma, f_val);
    if (d >= bounds.d_far) return Region::far;
    if (d <= bounds.d_near) return Region::very_near;
    return Region::near;
}

struct RegionCounts {
    std::size_t very_near = 0, near = 0, far = 0;
    std::size_t total() const { return very_near + near + far; }
};

inline RegionCounts count_regions(std::span<const KernelSample> samples) {
    RegionCounts c;
    for (const auto& s : samples) {
        switch (s.region) {
        case Region::very_near: ++c.very_near; break;
        case Region::near: ++c.near; break;
        case Region::far: ++c.far; break;
        }
    }
    return c;
}

namespace detail {

struct LinearFit {
    Eigen::VectorXd coef;
    double r_squared = 0;
};

inline LinearFit least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    LinearFit fit;
    fit.coef = X.colPivHouseholderQr().solve(y);
    const Eigen::VectorXd residual = y - X * fit.coef;
    const double ss_res = residual.squaredNorm();
    const double ss_tot = (y.array() - y.mean()).square().sum();
    fit.r_squared = ss_tot > 0 ? std::clamp(1 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
    return fit;
}

inline double decay_rate(DecayLaw law, double c, double k, double d, const std::function<double(double)>& f) {
    switch (law) {
    case DecayLaw::gaussian_in_d2: return c * k * d * d;
    case DecayLaw::agmon_sqrtk: return c * std::sqrt(k) * d;
    case DecayLaw::exponential_in_d:
        if (!f) throw DomainError("exponential_in_d envelope needs a growth function f(k)");
        return c * f(k) * std::sqrt(k * std::log(k)) * d;
    }
    return 0;
}

} // namespace detail

/// Tolerance factor on C when counting envelope violations.
inline constexpr double envelope_tolerance = 1.05;

/// Counts samples with absB > 1.05 C k^n exp(-rate(law, c, k, d)).
inline DecayReport verify_envelope(std::span<const KernelSample> samples, DecayLaw law, double c, double C, int dim = 1,
                                   const std::function<double(double)>& f = {}) {
    if (!(c > 0) || !(C > 0)) throw DomainError("verify_envelope: c and C must be positive");
    DecayReport report;
    report.law = law;
    report.fitted_c = c;
    report.fitted_C = C;
    report.envelope_C = C;
    report.samples = samples.size();
    report.empty = samples.empty();
    for (const auto& s : samples) {
        const double bound = envelope_tolerance * C * std::pow(s.k, dim) * std::exp(-detail::decay_rate(law, c, s.k, s.d, f));
        if (s.absB > bound) ++report.violations;
    }
    return report;
}

/// Least squares of log|B| on [1, log k, k d^2] (pooled over several k) or on
/// [1, k d^2] after removing n log k (single k).
inline DecayReport fit_gaussian(std::span<const KernelSample> samples, int dim = 1) {
    std::vector<const KernelSample*> used;
    std::size_t off_diagonal = 0;
    for (const auto& s : samples) {
        if (!(s.absB > 0)) continue;
        used.push_back(&s);
        if (s.d > 0) ++off_diagonal;
    }
    if (off_diagonal < 10) throw DomainError("fit_gaussian: degenerate fit (need >= 10 samples with d > 0)");
    bool pooled = false;
    for (const auto* s : used) pooled = pooled || s->k != used.front()->k;

    const auto n = static_cast<Eigen::Index>(used.size());
    Eigen::MatrixXd X(n, pooled ? 3 : 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& s = *used[static_cast<std::size_t>(i)];
        X(i, 0) = 1;
        if (pooled) {
            X(i, 1) = std::log(s.k);
            X(i, 2) = s.k * s.d * s.d;
            y(i) = std::log(s.absB);
        } else {
            X(i, 1) = s.k * s.d * s.d;
            y(i) = std::log(s.absB) - dim * std::log(s.k);
        }
    }
    const auto fit = detail::least_squares(X, y);

    DecayReport report;
    report.law = DecayLaw::gaussian_in_d2;
    report.samples = used.size();
    report.fitted_C = std::exp(fit.coef(0));
    report.fitted_dim = pooled ? fit.coef(1) : dim;
    report.fitted_c = -fit.coef(pooled ? 2 : 1);
    report.r_squared = fit.r_squared;
    double inflate = 0;
    for (const auto* s : used) {
        const double ratio = s->absB / (std::pow(s->k, dim) * std::exp(-report.fitted_c * s->k * s->d * s->d));
        inflate = std::max(inflate, ratio);
        if (s->absB > envelope_tolerance * report.fitted_C * std::pow(s->k, dim) *
                          std::exp(-report.fitted_c * s->k * s->d * s->d))
            ++report.violations;
    }
    report.envelope_C = inflate;
    return report;
}

/// Per-k regression of log|B| on d; never pools across k.
inline DecayReport fit_far_exponent(std::span<const KernelSample> samples, const std::function<double(double)>& f,
                                    int dim = 1) {
    std::map<double, std::vector<const KernelSample*>> by_k;
    for (const auto& s : samples)
        if (s.absB > 0 && s.d > 0) by_k[s.k].push_back(&s);
    if (by_k.empty()) throw DomainError("fit_far_exponent: no usable samples");

    DecayReport report;
    report.law = DecayLaw::exponential_in_d;
    report.fitted_c = std::numeric_limits<double>::infinity();
    report.r_squared = 1;
    for (const auto& [k, group] : by_k) {
        double dmin = std::numeric_limits<double>::infinity(), dmax = 0;
        for (const auto* s : group) {
            dmin = std::min(dmin, s->d);
            dmax = std::max(dmax, s->d);
        }
        if (group.size() < 10 || dmax < 2 * dmin)
            throw DomainError("fit_far_exponent: insufficient d-span at k = " + std::to_string(k) +
                              " (need >= 10 samples spanning a factor 2)");
        const auto n = static_cast<Eigen::Index>(group.size());
        Eigen::MatrixXd X(n, 2);
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            X(i, 0) = 1;
            X(i, 1) = group[static_cast<std::size_t>(i)]->d;
            y(i) = std::log(group[static_cast<std::size_t>(i)]->absB);
        }
        const auto fit = detail::least_squares(X, y);
        FarRate rate;
        rate.k = k;
        rate.rho = -fit.coef(1);
        rate.intercept = fit.coef(0);
        rate.r_squared = fit.r_squared;
        rate.samples = group.size();
        rate.agmon_normalized = rate.rho / std::sqrt(k);
        rate.growth_normalized = f ? rate.rho / (f(k) * std::sqrt(k * std::log(k))) : std::nan("");
        report.far_rates.push_back(rate);
        report.samples += group.size();
        report.fitted_c = std::min(report.fitted_c, rate.growth_normalized);
        report.fitted_C = std::max(report.fitted_C, std::exp(rate.intercept) / std::pow(k, dim));
        report.r_squared = std::min(report.r_squared, rate.r_squared);
    }
    return report;
}

/// Fits (pi/k)^n B_k(z, z) = b0 + b1/k + b2/k^2 by least squares in 1/k.
inline DiagonalExpansion diagonal_expansion_fit(std::span<const double> k_list, std::span<const double> bergman_values,
                                                int dim = 1) {
    if (k_list.size() < 3 || k_list.size() != bergman_values.size())
        throw DomainError("diagonal_expansion_fit: need >= 3 k values");
    for (std::size_t i = 1; i < k_list.size(); ++i)
        if (!(k_list[i] > k_list[i - 1])) throw DomainError("diagonal_expansion_fit: k values must increase");
    const auto n = static_cast<Eigen::Index>(k_list.size());
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double k = k_list[static_cast<std::size_t>(i)];
        X(i, 0) = 1;
        X(i, 1) = 1 / k;
        X(i, 2) = 1 / (k * k);
        y(i) = std::pow(std::numbers::pi / k, dim) * bergman_values[static_cast<std::size_t>(i)];
    }
    const auto fit = detail::least_squares(X, y);
    return {fit.coef(0), fit.coef(1), fit.coef(2)};
}

/// Same fit with B_k(z, z) computed numerically for each k.
inline DiagonalExpansion diagonal_expansion_fit(const ModelGeometry& g, std::span<const double> k_list, Point z,
                                                const GramOptions& options = {}) {
    std::vector<double> values;
    for (double k : k_list) values.push_back(bergman_function(make_evaluator(g, k, options), z));
    return diagonal_expansion_fit(k_list, values, g.dim());
}

/// max |absB / (prefactor(k) e^{-k D/2}) - 1| over the samples; the default
/// prefactor is the leading term k^n / pi^n.
inline double shrinking_law_deviation(std::span<const KernelSample> samples, int dim = 1,
                                      const std::function<double(double)>& prefactor = {}) {
    double worst = 0;
    for (const auto& s : samples) {
        const double lead = prefactor ? prefactor(s.k) : std::pow(s.k / std::numbers::pi, dim);
        worst = std::max(worst, std::abs(s.absB / (lead * std::exp(-s.k * s.D / 2)) - 1));
    }
    return worst;
}

} // namespace bergman_lab
