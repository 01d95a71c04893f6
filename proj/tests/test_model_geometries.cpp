#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <bergman_lab/model_geometries.hpp>

#include "oracles.hpp"

using namespace bergman_lab;
using Catch::Matchers::WithinRel;
using Catch::Matchers::WithinAbs;

namespace {

Point random_point(std::mt19937_64& rng, double radius) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return std::polar(radius * std::sqrt(u(rng)), 2 * std::numbers::pi * u(rng));
}

} // namespace

TEST_CASE("fock kernel values") {
    CHECK_THAT(fock_kernel(3.0, {0.2, 0.1}, {0.2, 0.1}), WithinRel(3 / std::numbers::pi, 1e-15));
    CHECK_THAT(fock_kernel(1.0, {0, 0}, {1, 1}), WithinRel(0.11709966304863834, 1e-12));
    CHECK_THROWS_AS(fock_kernel(0.0, {0, 0}, {0, 0}), DomainError);
}

TEST_CASE("cp1 exact kernel values") {
    CHECK_THAT(cp1_exact_kernel(5, {0, 0}, {0, 0}), WithinRel(6 / std::numbers::pi, 1e-15));
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        const Point z = random_point(rng, 3), w = random_point(rng, 3);
        CHECK_THAT(cp1_exact_kernel(7, z, z), WithinRel(8 / std::numbers::pi, 1e-13));
        CHECK_THAT(cp1_exact_kernel(7, z, w), WithinRel(oracle::cp1_kernel(7, z, w), 1e-12));
    }
    CHECK(cp1_exact_kernel(10, {0, 0}, {1e8, 0}) < 1e-70);
}

TEST_CASE("diastasis") {
    const auto fock = ModelGeometry::fock();
    const auto cp1 = ModelGeometry::cp1();
    std::mt19937_64 rng(9);
    for (int i = 0; i < 100; ++i) {
        const Point z = random_point(rng, 0.9), w = random_point(rng, 0.9);
        CHECK_THAT(diastasis(fock, z, w), WithinRel(std::norm(z - w), 1e-14));
        CHECK_THAT(diastasis(cp1, z, w), WithinRel(oracle::cp1_diastasis(z, w), 1e-12));
        CHECK(diastasis(cp1, z, z) == 0);
        CHECK_THAT(diastasis(cp1, z, w), WithinRel(diastasis(cp1, w, z), 1e-14));
        const Point rot = std::polar(1.0, 0.7);
        CHECK_THAT(diastasis(cp1, rot * z, rot * w), WithinRel(diastasis(cp1, z, w), 1e-12));
    }
}

TEST_CASE("holomorphic extension restricts to the potential") {
    std::mt19937_64 rng(13);
    for (const auto& g : {ModelGeometry::fock(), ModelGeometry::cp1(), ModelGeometry::cp1_perturbed()}) {
        for (int i = 0; i < 100; ++i) {
            const Point z = random_point(rng, 0.99);
            CHECK_THAT(std::real(g.holomorphic_extension(z, z)), WithinAbs(g.potential(z), 1e-12));
            CHECK_THAT(std::imag(g.holomorphic_extension(z, z)), WithinAbs(0.0, 1e-12));
        }
    }
}

TEST_CASE("perturbed diastasis is nonnegative and vanishes on the diagonal") {
    const auto g = ModelGeometry::cp1_perturbed();
    std::mt19937_64 rng(17);
    for (int i = 0; i < 2000; ++i) {
        const Point z = random_point(rng, 1.6), w = random_point(rng, 1.6);
        CHECK(diastasis(g, z, w) >= 0);
        CHECK_THAT(diastasis(g, z, z), WithinAbs(0.0, 1e-14));
    }
}

TEST_CASE("bump is flat and supported on (0, 2)") {
    CHECK(bump(0.0) == 0);
    CHECK(bump(2.0) == 0);
    CHECK(bump(2.5) == 0);
    CHECK_THAT(bump(1.0), WithinRel(std::exp(-1.0), 1e-15));
    CHECK(bump(1e-3) < 1e-200);
}

TEST_CASE("density is the Laplacian of the potential") {
    std::mt19937_64 rng(19);
    for (const auto& g : {ModelGeometry::fock(), ModelGeometry::cp1(), ModelGeometry::cp1_perturbed(0.03)}) {
        for (int i = 0; i < 100; ++i) {
            const Point z = random_point(rng, 1.6);
            const double h = 1e-4;
            const double lap = (g.potential(z + h) + g.potential(z - h) + g.potential(z + Point(0, h)) +
                                g.potential(z - Point(0, h)) - 4 * g.potential(z)) /
                               (h * h);
            // d dbar phi = Laplacian / 4
            CHECK_THAT(g.density(std::norm(z)), WithinRel(lap / 4, 1e-4));
            CHECK(g.density(std::norm(z)) > 0);
        }
    }
    const auto cp1 = ModelGeometry::cp1();
    CHECK_THAT(cp1.log_density(3.0), WithinRel(-2 * std::log(4.0), 1e-15));
}

TEST_CASE("perturbation amplitude must keep the metric positive") {
    CHECK_NOTHROW(ModelGeometry::cp1_perturbed(0.045));
    CHECK_NOTHROW(ModelGeometry::cp1_perturbed(-0.008));
    CHECK_THROWS_AS(ModelGeometry::cp1_perturbed(0.05), DomainError);
    CHECK_THROWS_AS(ModelGeometry::cp1_perturbed(-0.009), DomainError);
    CHECK(ModelGeometry::cp1_perturbed().amplitude() == default_bump_amplitude);
}

TEST_CASE("zero perturbation reproduces cp1") {
    const auto g = ModelGeometry::cp1_perturbed(0.0);
    const auto cp1 = ModelGeometry::cp1();
    CHECK(g.name() == "cp1-perturbed");
    CHECK(g.has_exact_kernel());
    for (double u : {0.0, 0.5, 1.0, 1.7, 4.0}) CHECK(g.density(u) == cp1.density(u));
}

TEST_CASE("basis sizes") {
    CHECK(ModelGeometry::cp1().basis_size(16) == 17);
    CHECK(ModelGeometry::fock().basis_size(4) == 65);
    CHECK(ModelGeometry::fock().basis_size(100) == 801);
    CHECK_THROWS_AS(ModelGeometry::cp1().basis_size(2.5), DomainError);
    CHECK_THROWS_AS(ModelGeometry::cp1().basis_size(0), DomainError);
}

TEST_CASE("distances") {
    const auto fock = ModelGeometry::fock();
    const auto cp1 = ModelGeometry::cp1();
    CHECK(distance(fock, {0, 0}, {0.6, 0.8}) == 1.0);
    CHECK_THROWS_AS(distance(fock, {0, 0}, {3, 0}), DomainError);
    std::mt19937_64 rng(23);
    for (int i = 0; i < 100; ++i) {
        const Point z = random_point(rng, 5), w = random_point(rng, 5);
        CHECK_THAT(distance(cp1, z, w), WithinRel(oracle::cp1_distance(z, w), 1e-7));
        CHECK(distance(cp1, z, z) == 0);
    }
    // equator to pole is a quarter great circle of a sphere of radius 1/2
    CHECK_THAT(distance(cp1, {0, 0}, {1, 0}), WithinRel(std::numbers::pi / 4, 1e-14));
}

TEST_CASE("property: squared distance over diastasis tends to one") {
    std::mt19937_64 rng(29);
    for (const auto& g : {ModelGeometry::fock(), ModelGeometry::cp1(), ModelGeometry::cp1_perturbed()}) {
        for (int i = 0; i < 10; ++i) {
            const Point z = random_point(rng, g.kind() == ModelGeometry::Kind::fock ? 0.9 : 1.3);
            const Point w = z + std::polar(1e-3, 1.0 * i);
            const double d = distance(g, z, w);
            CHECK_THAT(d * d / diastasis(g, z, w), WithinRel(1.0, 1e-2));
        }
    }
}

TEST_CASE("graph geodesic is within 1% of the exact distance") {
    const auto cp1 = ModelGeometry::cp1();
    std::mt19937_64 rng(31);
    for (int i = 0; i < 30; ++i) {
        const Point z = random_point(rng, 1.5), w = random_point(rng, 1.5);
        const double exact = distance(cp1, z, w);
        const double graph = graph_geodesic(cp1, z, w);
        CHECK_THAT(graph, WithinRel(exact, 1e-2));
        CHECK(graph >= exact * (1 - 1e-9));
    }
    CHECK_THAT(graph_geodesic(ModelGeometry::fock(), {0, 0}, {0.3, 0.4}), WithinRel(0.5, 1e-12));
}

TEST_CASE("perturbed distance is symmetric and close to cp1 for small amplitude") {
    const auto g = ModelGeometry::cp1_perturbed(0.01);
    const auto cp1 = ModelGeometry::cp1();
    const Point z{0.3, -0.2}, w{-0.9, 0.6};
    CHECK_THAT(distance(g, z, w), WithinRel(distance(g, w, z), 1e-3));
    CHECK_THAT(distance(g, z, w), WithinRel(distance(cp1, z, w), 0.05));
}
