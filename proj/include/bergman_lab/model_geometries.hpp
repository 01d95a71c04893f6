#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

#include "error.hpp"
#include "taylor.hpp"

namespace bergman_lab {

using Point = std::complex<double>;

/// Compactly supported bump exp(-1/(1-t^2)), t = u - 1, on 0 < u < 2.
/// Flat at both edges; lies in G^s for s >= 2 but is not analytic.
template <class T>
T bump(const T& u) {
    using std::exp;
    const T t = u - T(1);
    const double tv = value_of(t);
    if (!(std::abs(tv) < 1)) return T(0);
    return exp(T(-1) / (T(1) - t * t));
}

/// Largest round amplitude below the positivity threshold ~0.0455 of the bump.
inline constexpr double default_bump_amplitude = 0.04;

/// Rotation-invariant model geometry in one affine chart of complex dimension 1.
///
/// The potential is a function of u = |z|^2:
///   fock:          phi = u
///   cp1:           phi = log(1 + u)
///   cp1-perturbed: phi = log(1 + u) + amplitude * bump(u)
/// The metric is rho(u) |dz|^2 with rho = (u phi')', and the volume form is
/// rho dA.
class ModelGeometry {
public:
    enum class Kind { fock, cp1 };

    static ModelGeometry fock() { return ModelGeometry(Kind::fock, 0.0, false); }
    static ModelGeometry cp1() { return ModelGeometry(Kind::cp1, 0.0, false); }

    /// Throws DomainError when the amplitude destroys positivity of the metric.
    static ModelGeometry cp1_perturbed(double amplitude = default_bump_amplitude) {
        ModelGeometry g(Kind::cp1, amplitude, true);
        if (!g.positive_on_support())
            throw DomainError("cp1-perturbed: amplitude " + std::to_string(amplitude) + " loses positivity of the metric");
        return g;
    }

    Kind kind() const { return kind_; }
    bool perturbed() const { return perturbed_; }
    double amplitude() const { return amplitude_; }
    int dim() const { return 1; }

    std::string name() const {
        if (kind_ == Kind::fock) return "fock";
        return perturbed_ ? "cp1-perturbed" : "cp1";
    }

    /// Largest |z| at which kernels may be evaluated. For Fock the truncated
    /// basis is only trusted on the unit disk.
    double chart_radius() const { return kind_ == Kind::fock ? 1.0 : 1e4; }

    /// True when the geometry's base kernel is known in closed form.
    bool has_exact_kernel() const { return amplitude_ == 0.0; }

    /// phi as a function of u = |z|^2.
    template <class T>
    T radial_potential(const T& u) const {
        using std::log1p;
        if (kind_ == Kind::fock) return u;
        T phi = log1p(u);
        if (amplitude_ != 0.0) phi += T(amplitude_) * bump(u);
        return phi;
    }

    double potential(Point z) const { return radial_potential(std::norm(z)); }

    /// rho(u) = (u phi'(u))', the density of the metric and of the volume form.
    template <class Real = double>
    Real density(Real u) const {
        Real base = kind_ == Kind::fock ? Real(1) : Real(1) / ((1 + u) * (1 + u));
        if (amplitude_ != 0.0) {
            const auto b = bump(Jet<Real, 2>::variable(u));
            base += Real(amplitude_) * (b.derivative(1) + u * b.derivative(2));
        }
        return base;
    }

    /// log rho(u); exact away from the perturbation's support.
    template <class Real = double>
    Real log_density(Real u) const {
        using std::log;
        using std::log1p;
        if (kind_ == Kind::fock) return Real(0);
        if (amplitude_ == 0.0 || !(u > 0 && u < 2)) return -2 * log1p(u);
        return log(density(u));
    }

    /// amplitude * bump(u), the part of phi beyond the unperturbed model.
    template <class Real = double>
    Real perturbation(Real u) const {
        if (amplitude_ == 0.0) return Real(0);
        return Real(amplitude_) * bump(u);
    }

    /// log(rho(u) (1 + u)^2): the log density relative to the CP^1 density.
    template <class Real = double>
    Real log_density_excess(Real u) const {
        using std::log;
        if (amplitude_ == 0.0 || !(u > 0 && u < 2)) return Real(0);
        return log(density(u) * (1 + u) * (1 + u));
    }

    /// Polarized potential psi(z, conj(w)); psi(z, conj(z)) = phi(z).
    /// The bump is not analytic, so its part is the almost-holomorphic
    /// extension obtained from its Taylor series in Im(z conj(w)).
    std::complex<double> holomorphic_extension(Point z, Point w) const {
        const std::complex<double> zeta = z * std::conj(w);
        if (kind_ == Kind::fock) return zeta;
        std::complex<double> psi = std::log(1.0 + zeta);
        if (std::imag(zeta) == 0 && std::real(zeta) > -1) psi = std::log1p(std::real(zeta));
        if (amplitude_ != 0.0) psi += amplitude_ * bump_extension(zeta);
        return psi;
    }

    std::size_t basis_size(double k) const {
        if (kind_ == Kind::fock) return fock_truncation(k) + 1;
        return static_cast<std::size_t>(cp1_degree(k)) + 1;
    }

    /// Highest monomial degree kept for the Fock model: max(8k, 64).
    static std::size_t fock_truncation(double k) {
        return static_cast<std::size_t>(std::max(std::ceil(8 * k), 64.0));
    }

    /// Sections of O(k) on CP^1 need integer k >= 1.
    static int cp1_degree(double k) {
        if (!(k >= 1) || std::floor(k) != k) throw DomainError("cp1: k must be an integer >= 1");
        return static_cast<int>(k);
    }

    /// Taylor series of the bump in i Im(zeta) about Re(zeta), cut at the
    /// smallest term (at most order 6): the extension is only meaningful
    /// near the diagonal.
    std::complex<double> bump_extension(std::complex<double> zeta) const {
        constexpr std::size_t order = 6;
        const auto jet = bump(Jet<double, order>::variable(std::real(zeta)));
        const std::complex<double> step(0.0, std::imag(zeta));
        std::complex<double> sum = jet.c[0], power = 1;
        double last = std::abs(jet.c[0]);
        for (std::size_t m = 1; m <= order; ++m) {
            power *= step;
            const std::complex<double> term = jet.c[m] * power;
            if (std::abs(term) > last && m > 1) break;
            if (std::abs(term) != 0) last = std::abs(term);
            sum += term;
        }
        return sum;
    }

private:
    ModelGeometry(Kind kind, double amplitude, bool perturbed) : kind_(kind), amplitude_(amplitude), perturbed_(perturbed) {}

    bool positive_on_support() const {
        for (int i = 0; i <= 4000; ++i)
            if (!(density(3.0 * i / 4000.0) > 0)) return false;
        return true;
    }

    Kind kind_;
    double amplitude_;
    bool perturbed_;
};

/// Exact Bargmann-Fock kernel for phi = |z|^2: (k/pi)^n exp(-k |z-w|^2 / 2).
inline double fock_kernel(double k, Point z, Point w, int n = 1) {
    if (!(k > 0)) throw DomainError("fock_kernel: k must be positive");
    return std::pow(k / std::numbers::pi, n) * std::exp(-k * std::norm(z - w) / 2);
}

/// Exact kernel of O(k) on CP^1 with the Fubini-Study potential:
/// ((k+1)/pi) |1 + z conj(w)|^k / ((1+|z|^2)^{k/2} (1+|w|^2)^{k/2}).
inline double cp1_exact_kernel(int k, Point z, Point w) {
    if (k < 1) throw DomainError("cp1_exact_kernel: k must be >= 1");
    const double log_ratio = std::log(std::abs(1.0 + z * std::conj(w))) - 0.5 * std::log1p(std::norm(z)) -
                             0.5 * std::log1p(std::norm(w));
    return (k + 1) / std::numbers::pi * std::exp(k * log_ratio);
}

/// Calabi's diastasis phi(z) + phi(w) - psi(z, conj w) - psi(w, conj z).
inline double diastasis(const ModelGeometry& g, Point z, Point w) {
    if (g.kind() == ModelGeometry::Kind::fock) return std::norm(z - w);
    // |1 + z conj w|^2 + |z - w|^2 = (1 + |z|^2)(1 + |w|^2)
    const double cross = std::norm(1.0 + z * std::conj(w));
    double D = cross == 0 ? std::numeric_limits<double>::infinity() : std::log1p(std::norm(z - w) / cross);
    if (g.amplitude() != 0.0) {
        const double bz = bump(std::norm(z));
        const double bw = bump(std::norm(w));
        const auto ext = g.bump_extension(z * std::conj(w)) + g.bump_extension(w * std::conj(z));
        D += g.amplitude() * (bz + bw - std::real(ext));
    }
    return D;
}

/// Resolution of the graph used for numerical geodesics.
struct GeodesicSpec {
    int segments = 32; // grid steps between z and w
    int lateral = 48;  // half-width of the band, in steps
    int margin = 4;    // steps beyond z and w along the chord
    int stencil = 6;   // max |da|, |db| of an edge
};

/// Shortest path through a band-shaped grid around the chord [z, w], with
/// edges weighted by the metric length (Simpson rule on sqrt(rho)).
inline double graph_geodesic(const ModelGeometry& g, Point z, Point w, const GeodesicSpec& spec = {}) {
    if (z == w) return 0.0;
    const double chord = std::abs(w - z);
    const Point e1 = (w - z) / chord;
    const Point e2 = e1 * Point(0, 1);
    const double h = chord / spec.segments;
    const int a_lo = -spec.margin, a_hi = spec.segments + spec.margin;
    const int b_lo = -spec.lateral, b_hi = spec.lateral;
    const int na = a_hi - a_lo + 1, nb = b_hi - b_lo + 1;
    auto index = [&](int a, int b) { return static_cast<std::size_t>((a - a_lo) * nb + (b - b_lo)); };
    auto position = [&](double a, double b) { return z + h * (a * e1 + b * e2); };
    auto speed = [&](Point p) { return std::sqrt(g.density(std::norm(p))); };

    std::vector<double> node_speed(static_cast<std::size_t>(na * nb));
    for (int a = a_lo; a <= a_hi; ++a)
        for (int b = b_lo; b <= b_hi; ++b) node_speed[index(a, b)] = speed(position(a, b));

    std::vector<std::pair<int, int>> moves;
    for (int da = -spec.stencil; da <= spec.stencil; ++da)
        for (int db = -spec.stencil; db <= spec.stencil; ++db)
            if ((da != 0 || db != 0) && std::gcd(std::abs(da), std::abs(db)) == 1) moves.emplace_back(da, db);

    std::vector<double> dist(node_speed.size(), std::numeric_limits<double>::infinity());
    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    const std::size_t source = index(0, 0), target = index(spec.segments, 0);
    dist[source] = 0;
    queue.emplace(0.0, source);
    while (!queue.empty()) {
        auto [d, node] = queue.top();
        queue.pop();
        if (d > dist[node]) continue;
        if (node == target) return d;
        const int a = static_cast<int>(node) / nb + a_lo;
        const int b = static_cast<int>(node) % nb + b_lo;
        for (auto [da, db] : moves) {
            const int a2 = a + da, b2 = b + db;
            if (a2 < a_lo || a2 > a_hi || b2 < b_lo || b2 > b_hi) continue;
            const std::size_t next = index(a2, b2);
            const double length = h * std::hypot(da, db);
            const double mid = speed(position(a + 0.5 * da, b + 0.5 * db));
            const double cost = length * (node_speed[node] + 4 * mid + node_speed[next]) / 6;
            if (d + cost < dist[next]) {
                dist[next] = d + cost;
                queue.emplace(dist[next], next);
            }
        }
    }
    throw NumericalError("graph_geodesic: target unreachable");
}

/// Geodesic distance of the metric rho |dz|^2: Euclidean for Fock,
/// Fubini-Study (sphere of radius 1/2) for CP^1, graph shortest path when
/// the metric is perturbed.
inline double distance(const ModelGeometry& g, Point z, Point w, const GeodesicSpec& spec = {}) {
    if (std::abs(z) > g.chart_radius() || std::abs(w) > g.chart_radius())
        throw DomainError("distance: point outside the chart");
    if (g.kind() == ModelGeometry::Kind::fock) return std::abs(z - w);
    if (g.amplitude() == 0.0) return std::atan2(std::abs(z - w), std::abs(1.0 + z * std::conj(w)));
    return graph_geodesic(g, z, w, spec);
}

} // namespace bergman_lab
