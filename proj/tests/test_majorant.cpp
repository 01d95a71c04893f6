#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include <bergman_lab/majorant.hpp>

#include "oracles.hpp"

using namespace bergman_lab;
using Catch::Matchers::WithinRel;
using Catch::Matchers::WithinAbs;

TEST_CASE("gevrey J is a power") {
    for (double s : {1.2, 1.5, 2.0, 3.0}) {
        const auto m = gevrey(s);
        for (double x : {1.0, 2.5, 10.0, 1e4}) {
            CHECK_THAT(J(m, x), WithinRel(std::pow(x, s - 1), 1e-13));
            CHECK_THAT(J_prime(m, x), WithinRel((s - 1) * std::pow(x, s - 2), 1e-13));
            CHECK_THAT(beta(m, x), WithinRel((s - 1) / x, 1e-13));
            CHECK_THAT(beta_prime(m, x), WithinRel(-(s - 1) / (x * x), 1e-12));
        }
    }
}

TEST_CASE("gevrey rejects s <= 1") {
    CHECK_THROWS_AS(gevrey(1.0), DomainError);
    CHECK_THROWS_AS(gevrey(0.5), DomainError);
}

TEST_CASE("gevrey x0 is the domain edge") {
    CHECK(x0(gevrey(2.0)) == 1.0);
    CHECK(x0(gevrey(1.2)) == 1.0);
}

TEST_CASE("denjoy(1) has J = log x") {
    const auto m = denjoy(1);
    CHECK_THAT(m.x_min, WithinRel(std::exp(1.0) + 0.5, 1e-15));
    for (double x : {4.0, 50.0, 1e5}) {
        CHECK_THAT(J(m, x), WithinRel(std::log(x), 1e-13));
        CHECK_THAT(J_prime(m, x), WithinRel(1 / x, 1e-12));
    }
    CHECK(x0(m) == m.x_min);
}

TEST_CASE("denjoy levels") {
    CHECK_THROWS_AS(denjoy(0), DomainError);
    CHECK_THROWS_AS(denjoy(4), DomainError);
    const auto m = denjoy(2);
    const double x = 100.0;
    CHECK_THAT(J(m, x), WithinRel(std::log(x) * std::log(std::log(x)), 1e-13));
}

TEST_CASE("domain is enforced") {
    const auto m = gevrey(2.0);
    CHECK_THROWS_AS(J(m, 0.5), DomainError);
    CHECK_NOTHROW(J(m, 1.0));
}

TEST_CASE("standard classes pass validation") {
    for (const auto& m : {gevrey(1.5), gevrey(2.0), gevrey(3.0), denjoy(1), denjoy(2), denjoy(3)}) {
        const auto c = validate(m);
        INFO(m.name);
        CHECK(c.grid_points == 512);
        CHECK(c.convexity_violations == 0);
        CHECK(c.derivative_mismatches == 0);
        CHECK(c.J_eventually_increasing);
        CHECK(c.ok());
    }
}

TEST_CASE("validation catches a non-convex log M") {
    const auto m = custom("concave", 1.0, 1e7, [](double x) { return std::sqrt(x); });
    const auto c = validate(m);
    CHECK(c.convexity_violations > 0);
    CHECK_FALSE(c.ok());
}

TEST_CASE("validation catches a wrong derivative") {
    const auto m = custom(
        "bad", 1.0, 1e7, [](double x) { return x * std::log(x); }, [](double x) { return std::log(x); },
        [](double x) { return 1 / x; });
    CHECK(validate(m).derivative_mismatches > 0);
}

TEST_CASE("bounded J is rejected") {
    // log M = x log 2: J is the constant 2, the analytic situation
    const auto m = custom(
        "flat", 1.0, 1e9, [](double x) { return x * std::log(2.0); }, [](double) { return std::log(2.0); },
        [](double) { return 0.0; });
    CHECK_THROWS_AS(x0(m), DomainError);
}

TEST_CASE("x0 waits for J to regain its left maximum") {
    // J(x) = 2 + (x - 5)^2 falls until 5 and regains J(0.5) = 22.25 at 9.5
    const auto m = custom("dip", 0.5, 1e9, [](double x) { return x * std::log(2 + (x - 5) * (x - 5)); });
    CHECK_THAT(x0(m), WithinRel(9.5, 1e-8));
    CHECK(beta(m, x0(m) * 1.001) > 0);
}

TEST_CASE("x0 at a plain sign change") {
    // J(x) = exp((x - 3)^2 / 10) on [3, inf): J' changes sign at 3 only
    const auto m = custom(
        "bowl", 2.0, 1e6, [](double x) { return x * (x - 3) * (x - 3) / 10; },
        [](double x) { return ((x - 3) * (x - 3) + 2 * x * (x - 3)) / 10; }, [](double x) { return (6 * x - 12) / 10; });
    // J(2) = e^{0.1}; J recovers that value at x = 4
    CHECK_THAT(x0(m), WithinRel(4.0, 1e-10));
}

TEST_CASE("finite-difference derivatives agree with closed forms") {
    const auto exact = gevrey(2.0);
    const auto fd = custom("gevrey-fd", 1.0, 1e9, [](double x) { return x * std::log(x); });
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 12.0);
    for (int i = 0; i < 50; ++i) {
        const double x = std::exp(u(rng));
        CHECK_THAT(fd.dlog_M(x), WithinRel(exact.dlog_M(x), 1e-8));
        CHECK_THAT(fd.d2log_M(x), WithinRel(exact.d2log_M(x), 1e-4));
    }
}

TEST_CASE("tabulated majorant follows its data") {
    std::vector<std::pair<double, double>> table;
    for (int i = 0; i <= 400; ++i) {
        const double x = std::exp(i * 0.05);
        table.emplace_back(x, x * std::log(x));
    }
    const auto m = custom_table("gevrey2-table", table);
    CHECK(m.x_min == 1.0);
    CHECK_THAT(m.x_max, WithinRel(std::exp(20.0), 1e-12));
    CHECK_THAT(J(m, 100.0), WithinRel(100.0, 1e-3));
    CHECK_THROWS_AS(J(m, 1e10), DomainError);
}

TEST_CASE("x0 and k0 are cached") {
    const auto m = denjoy(2);
    const double a = x0(m);
    const auto copy = m;
    CHECK(x0(copy) == a);
}

TEST_CASE("property: log J' relation on random points") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.1, 14.0);
    for (const auto& m : {gevrey(1.7), denjoy(1), denjoy(2)}) {
        for (int i = 0; i < 100; ++i) {
            const double x = std::max(m.x_min * 1.01, std::exp(u(rng)));
            const double h = 1e-5 * x;
            const double numeric = (log_J(m, x + h) - log_J(m, x - h)) / (2 * h);
            CHECK_THAT(beta(m, x), WithinRel(numeric, 1e-6));
        }
    }
}
