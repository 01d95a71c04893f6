#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "error.hpp"
#include "model_geometries.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"

namespace bergman_lab {

enum class Precision { standard, extended };

struct GramOptions {
    QuadratureSpec quadrature{};
    Precision precision = Precision::standard;
    unsigned threads = 1;
    int angular_nodes = 0; // general path; 0 picks basis_size + 16
};

/// Weighted inner products <s_j, s_l> = int s_j conj(s_l) e^{-k phi} dV of the
/// monomial basis s_j = z^j.
///
/// Rotation-invariant geometries give a diagonal matrix, stored as
/// log_diagonal (in long double, so that extended-precision norms survive)
/// and k up to ~1000 stays in range. The general path also
/// keeps `normalized`, the Jacobi-scaled matrix G_jl / sqrt(G_jj G_ll).
struct GramMatrix {
    double k = 0;
    std::size_t size = 0;
    bool diagonal = true;
    std::vector<long double> log_diagonal;
    Eigen::MatrixXcd normalized;
    double condition_estimate = 1;

    std::complex<double> entry(std::size_t j, std::size_t l) const {
        const auto scale = static_cast<double>(std::exp(0.5L * (log_diagonal[j] + log_diagonal[l])));
        if (diagonal) return j == l ? std::complex<double>(scale) : std::complex<double>(0);
        return normalized(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) * scale;
    }
};

namespace detail {

// Radial integration variable. CP^1-type potentials are integrated in
// t = u / (1 + u) on [0, 1], which maps the whole chart to a compact
// interval; Fock uses u on [0, u_max] with a Gaussian-tail cutoff.
template <class Real>
struct RadialMap {
    bool compact = true;
    Real upper = 1;

    Real u_of(Real t) const { return compact ? t / (1 - t) : t; }
    Real log_jacobian(Real t) const {
        using std::log;
        return compact ? -2 * log(1 - t) : Real(0);
    }
};

// log of u^j e^{-k phi(u)} rho(u) du/dt at parameter t. In the compact
// variable the CP^1 part is t^j (1 - t)^{k - j}, written out so that large
// terms do not cancel near t = 1.
template <class Real>
Real log_radial_weight(const ModelGeometry& g, double k, double power, const RadialMap<Real>& map, Real t) {
    using std::log;
    using std::log1p;
    const Real u = map.u_of(t);
    if (map.compact) {
        Real value = Real(k - power) * log1p(-t) - Real(k) * g.perturbation(u) + g.log_density_excess(u);
        if (power != 0) value += Real(power) * log(t);
        return value;
    }
    Real value = -Real(k) * g.radial_potential(u) + g.log_density(u) + map.log_jacobian(t);
    if (power != 0) value += Real(power) * log(u);
    return value;
}

template <class Real>
RadialMap<Real> radial_map(const ModelGeometry& g, double k, std::size_t max_power) {
    RadialMap<Real> map;
    if (g.kind() != ModelGeometry::Kind::fock) return map;
    // Fock: integrand u^j e^{-k u} peaks at j/k; cut where every basis
    // element has dropped below e^{-45} (< 1e-16 x peak) of its maximum.
    map.compact = false;
    const Real kk = Real(k);
    const Real peak = std::max(Real(max_power) / kk, Real(1) / kk);
    Real upper = 2 * peak;
    auto drop = [&](Real u) {
        const Real j = Real(max_power);
        const Real at_peak = j > 0 ? j * std::log(j / kk) - j : Real(0);
        return (j > 0 ? j * std::log(u) : Real(0)) - kk * u - at_peak;
    };
    while (drop(upper) > -45) upper *= 1.25;
    map.upper = upper;
    return map;
}

template <class Real>
long double log_moment(const ModelGeometry& g, double k, double power, const RadialMap<Real>& map, const QuadratureSpec& spec) {
    using std::exp;
    using std::log;
    // locate the peak so the integrand can be scaled to O(1)
    Real peak = -std::numeric_limits<Real>::infinity();
    constexpr int samples = 1024;
    for (int i = 1; i < samples; ++i) {
        const Real t = map.upper * Real(i) / Real(samples);
        peak = std::max(peak, log_radial_weight(g, k, power, map, t));
    }
    auto integrand = [&](Real t) { return exp(log_radial_weight(g, k, power, map, t) - peak); };
    const auto result = integrate(integrand, Real(0), map.upper, spec);
    if (!result.converged || !(result.value > 0))
        throw NumericalError("gram: radial quadrature did not converge (quadrature too coarse)");
    // dA = (1/2) du dtheta, and the angular integral contributes 2 pi
    return static_cast<long double>(log(Real(std::numbers::pi)) + peak + log(result.value));
}

template <class Real>
std::vector<long double> log_norms(const ModelGeometry& g, double k, const GramOptions& options) {
    const std::size_t m = g.basis_size(k);
    const auto map = radial_map<Real>(g, k, m - 1);
    QuadratureSpec spec = options.quadrature;
    if constexpr (sizeof(Real) > sizeof(double)) spec.rel_tol = std::min(spec.rel_tol, 1e-17);
    std::vector<long double> out(m);
    parallel_for(m, options.threads, [&](std::size_t j) {
        out[j] = log_moment<Real>(g, k, static_cast<double>(j), map, spec);
    });
    return out;
}

} // namespace detail

/// Diagonal Gram matrix of a rotation-invariant geometry; each entry is a
/// one-dimensional adaptive integral in the radial variable.
inline GramMatrix gram_matrix(const ModelGeometry& g, double k, const GramOptions& options = {}) {
    if (!(k > 0)) throw DomainError("gram_matrix: k must be positive");
    GramMatrix gram;
    gram.k = k;
    gram.size = g.basis_size(k);
    gram.diagonal = true;
    gram.log_diagonal = options.precision == Precision::extended ? detail::log_norms<long double>(g, k, options)
                                                                 : detail::log_norms<double>(g, k, options);
    for (long double v : gram.log_diagonal)
        if (!std::isfinite(v)) throw NumericalError("gram_matrix: non-finite entry (rescaling failed)");
    const auto [lo, hi] = std::minmax_element(gram.log_diagonal.begin(), gram.log_diagonal.end());
    gram.condition_estimate = static_cast<double>(std::exp(*hi - *lo));
    return gram;
}

/// Full Hermitian Gram matrix by two-dimensional quadrature (radial
/// Gauss-Kronrod times an angular trapezoid rule), without assuming the
/// weight is rotation invariant. Meant for moderate k.
inline GramMatrix gram_matrix_general(const ModelGeometry& g, double k, const GramOptions& options = {}) {
    GramMatrix gram = gram_matrix(g, k, options);
    gram.diagonal = false;
    const std::size_t m = gram.size;
    const int angular = options.angular_nodes > 0 ? options.angular_nodes : static_cast<int>(m) + 16;
    const auto map = detail::radial_map<double>(g, k, m - 1);
    // entries are scaled to O(1), and the off-diagonal ones may vanish
    QuadratureSpec spec = options.quadrature;
    spec.abs_tol = std::max(spec.abs_tol, 1e-14);

    Eigen::MatrixXcd C(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    parallel_for(m * m, options.threads, [&](std::size_t idx) {
        const std::size_t j = idx / m, l = idx % m;
        const auto shift = static_cast<double>(0.5L * (gram.log_diagonal[j] + gram.log_diagonal[l]));
        const double power = 0.5 * static_cast<double>(j + l);
        auto integrand = [&](double t) {
            const double u = map.u_of(t);
            const double r = std::sqrt(u);
            std::complex<double> ring = 0;
            for (int a = 0; a < angular; ++a) {
                const double theta = 2 * std::numbers::pi * a / angular;
                const Point z = std::polar(r, theta);
                // z^j conj(z)^l = u^{(j+l)/2} e^{i (j-l) theta}
                const double log_mag = -k * g.potential(z) + g.log_density(std::norm(z)) + map.log_jacobian(t) - shift +
                                       (power != 0 ? power * std::log(u) : 0.0);
                ring += std::polar(std::exp(log_mag), (static_cast<double>(j) - static_cast<double>(l)) * theta);
            }
            return ring * (std::numbers::pi / angular);
        };
        const auto result = integrate(integrand, 0.0, map.upper, spec);
        C(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) = result.value;
    });
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t l = 0; l < m; ++l) {
            const auto a = C(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l));
            const auto b = C(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(j));
            if (std::abs(a - std::conj(b)) > 1e-12) throw NumericalError("gram_matrix_general: matrix is not Hermitian");
        }
    gram.normalized = 0.5 * (C + C.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram.normalized, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues().minCoeff();
    gram.condition_estimate = lmin > 0 ? eig.eigenvalues().maxCoeff() / lmin : std::numeric_limits<double>::infinity();
    return gram;
}

/// K_k(z, w) in the local frame together with |B_k(z, w)|_{h^k}.
struct KernelValue {
    std::complex<double> K;
    double absB = 0;
    double log_absB = 0;
};

/// Orthonormalized section basis of one geometry and tensor power; immutable
/// after construction and safe to share between threads.
class KernelEvaluator {
public:
    KernelEvaluator(ModelGeometry geometry, GramMatrix gram) : geometry_(std::move(geometry)), gram_(std::move(gram)) {
        if (!gram_.diagonal) {
            cholesky_.compute(gram_.normalized);
            if (cholesky_.info() != Eigen::Success)
                throw NumericalError("kernel: Cholesky failed (quadrature too coarse or positivity lost)");
        } else {
            for (long double v : gram_.log_diagonal)
                if (!std::isfinite(v)) throw NumericalError("kernel: Gram diagonal not positive");
        }
    }

    const ModelGeometry& geometry() const { return geometry_; }
    const GramMatrix& gram() const { return gram_; }
    double k() const { return gram_.k; }

    KernelValue operator()(Point z, Point w) const {
        const double limit = geometry_.chart_radius();
        if (std::abs(z) > limit || std::abs(w) > limit)
            throw DomainError("kernel_eval: point outside the chart truncation radius");
        const double weight = -0.5 * gram_.k * (geometry_.potential(z) + geometry_.potential(w));
        return gram_.diagonal ? diagonal_eval(z, w, weight) : general_eval(z, w, weight);
    }

private:
    // K = sum_j (z conj w)^j / n_j, summed in long double with a common
    // exponent so that neither the monomials nor the norms over- or underflow.
    KernelValue diagonal_eval(Point z, Point w, double weight) const {
        using Ext = long double;
        const std::complex<Ext> zeta = std::complex<Ext>(z) * std::conj(std::complex<Ext>(w));
        const Ext r = std::abs(zeta);
        const Ext theta = std::arg(zeta);
        const std::size_t terms = r == 0 ? 1 : gram_.size;
        const Ext log_r = r == 0 ? Ext(0) : std::log(r);
        std::vector<Ext> exponent(terms);
        Ext top = -std::numeric_limits<Ext>::infinity();
        for (std::size_t j = 0; j < terms; ++j) {
            exponent[j] = static_cast<Ext>(j) * log_r - gram_.log_diagonal[j];
            top = std::max(top, exponent[j]);
        }
        std::complex<Ext> sum = 0;
        for (std::size_t j = 0; j < terms; ++j)
            sum += std::polar(std::exp(exponent[j] - top), static_cast<Ext>(j) * theta);
        KernelValue v;
        v.K = std::complex<double>(sum * std::exp(top));
        v.log_absB = static_cast<double>(top + std::log(std::abs(sum)) + weight);
        v.absB = std::exp(v.log_absB);
        return v;
    }

    // sigma(z) = L^{-1} s~(z) with s~_j = z^j / sqrt(G_jj); K = sigma(z) . conj(sigma(w)).
    KernelValue general_eval(Point z, Point w, double weight) const {
        const auto n = static_cast<Eigen::Index>(gram_.size);
        Eigen::VectorXcd sz(n), sw(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto scale = static_cast<double>(std::exp(-0.5L * gram_.log_diagonal[static_cast<std::size_t>(j)]));
            sz(j) = std::pow(z, static_cast<int>(j)) * scale;
            sw(j) = std::pow(w, static_cast<int>(j)) * scale;
        }
        const Eigen::VectorXcd oz = cholesky_.matrixL().solve(sz);
        const Eigen::VectorXcd ow = cholesky_.matrixL().solve(sw);
        KernelValue v;
        v.K = (oz.array() * ow.conjugate().array()).sum();
        v.log_absB = std::log(std::abs(v.K)) + weight;
        v.absB = std::exp(v.log_absB);
        return v;
    }

    ModelGeometry geometry_;
    GramMatrix gram_;
    Eigen::LLT<Eigen::MatrixXcd> cholesky_;
};

inline KernelEvaluator make_evaluator(const ModelGeometry& g, double k, const GramOptions& options = {}) {
    return KernelEvaluator(g, gram_matrix(g, k, options));
}

inline KernelValue kernel_eval(const KernelEvaluator& e, Point z, Point w) { return e(z, w); }

/// |B_k(z, z)|_{h^k}, the globally defined Bergman function.
inline double bergman_function(const KernelEvaluator& e, Point z) { return e(z, z).absB; }

} // namespace bergman_lab
