#pragma once

// Closed forms used only as test references; none of them call the library.

#include <cmath>
#include <complex>
#include <numbers>

namespace oracle {

inline double gevrey_k0(double s) { return (s - 1) * std::exp(2 * s - 2); }

inline double gevrey_N(double s, double k) {
    return std::pow(std::exp(2 - 2 * s) / (s - 1), 1 / (2 * s - 1)) * std::pow(k, 1 / (2 * s - 1));
}

inline double gevrey_f(double s, double k) {
    const double p = 2 * s - 1;
    return std::pow(s - 1, (s - 1) / p) * std::exp((1 - s) / p) * std::pow(k, 1 / (4 * s - 2)) / std::sqrt(std::log(k));
}

inline double cp1_gram(int k, int j) {
    return std::numbers::pi * std::exp(std::lgamma(j + 1.0) + std::lgamma(k - j + 1.0) - std::lgamma(k + 2.0));
}

inline double fock_gram(double k, int j) { return std::numbers::pi * std::exp(std::lgamma(j + 1.0) - (j + 1) * std::log(k)); }

inline double cp1_kernel(int k, std::complex<double> z, std::complex<double> w) {
    const double c = std::abs(1.0 + z * std::conj(w)) / std::sqrt((1 + std::norm(z)) * (1 + std::norm(w)));
    return (k + 1) / std::numbers::pi * std::pow(c, k);
}

inline double fock_kernel(double k, std::complex<double> z, std::complex<double> w) {
    return k / std::numbers::pi * std::exp(-k * std::norm(z - w) / 2);
}

// Round sphere of radius 1/2 seen through stereographic projection.
inline double cp1_distance(std::complex<double> z, std::complex<double> w) {
    const double c = std::abs(1.0 + z * std::conj(w)) / std::sqrt((1 + std::norm(z)) * (1 + std::norm(w)));
    return std::acos(std::min(1.0, c));
}

inline double cp1_diastasis(std::complex<double> z, std::complex<double> w) {
    return std::log((1 + std::norm(z)) * (1 + std::norm(w)) / std::norm(1.0 + z * std::conj(w)));
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace oracle
