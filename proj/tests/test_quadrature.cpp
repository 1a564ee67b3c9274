#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gapspec/quadrature.hpp"

using namespace gapspec;

TEST_CASE("Gauss-Legendre rules") {
    for (std::size_t n : {1u, 2u, 5u, 16u, 40u}) {
        const quad::Rule& r = quad::gauss_legendre(n);
        REQUIRE(r.x.size() == n);
        double sw = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sw += r.w[i];
            CHECK(r.w[i] > 0.0);
            if (i) CHECK(r.x[i] > r.x[i - 1]);
            // symmetric nodes
            CHECK(r.x[i] == doctest::Approx(-r.x[n - 1 - i]).epsilon(1e-14));
        }
        CHECK(sw == doctest::Approx(2.0).epsilon(1e-14));
        // exact for monomials up to degree 2n-1
        for (std::size_t d = 0; d < 2 * n; ++d) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += r.w[i] * std::pow(r.x[i], static_cast<double>(d));
            const double exact = d % 2 ? 0.0 : 2.0 / static_cast<double>(d + 1);
            CHECK(s == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
        }
    }
    CHECK(&quad::gauss_legendre(16) == &quad::gauss_legendre(16));
}

TEST_CASE("adaptive integration of smooth and peaked integrands") {
    const std::vector<double> bp{0.0, 1.0};
    quad::Tolerance tol;
    tol.rtol = 1e-13;
    auto r = quad::integrate([](double x) { return std::exp(x); }, bp, tol);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(std::numbers::e - 1.0).epsilon(1e-14));

    // Lorentzian of width 1e-4 centred inside the interval
    const double w = 1e-4;
    r = quad::integrate([&](double x) { return w / ((x - 0.3) * (x - 0.3) + w * w); }, bp, tol);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(std::atan(0.7 / w) + std::atan(0.3 / w)).epsilon(1e-12));
}

TEST_CASE("sqrt substitution removes an endpoint singularity") {
    // integral_0^1 dt / sqrt(t) with t = s^2: 2 integral_0^1 ds
    const auto bp = quad::sqrt_breakpoints(1.0, 1e-6);
    REQUIRE(bp.front() == 0.0);
    REQUIRE(bp.back() == doctest::Approx(1.0));
    for (std::size_t i = 1; i < bp.size(); ++i) CHECK(bp[i] > bp[i - 1]);
    quad::Tolerance tol;
    tol.rtol = 1e-14;
    const auto r = quad::integrate([](double s) { return 2.0 * s / std::sqrt(s * s); }, bp, tol);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("cosine breakpoints resolve a nearby feature") {
    const double r = 1.0, delta = 1e-8;
    const auto bp = quad::cosine_breakpoints(r, 1.0, delta);  // the feature sits past hi (theta = 0)
    REQUIRE(bp.front() == 0.0);
    REQUIRE(bp.back() == doctest::Approx(std::numbers::pi));
    for (std::size_t i = 1; i < bp.size(); ++i) CHECK(bp[i] > bp[i - 1]);
    CHECK(bp[1] <= 2.0 * std::sqrt(2.0 * delta / r));

    // integral over [-1,1] of 1/(pi sqrt(1-t^2)) / (1 + delta - t) = 1/sqrt((1+delta)^2 - 1)
    quad::Tolerance tol;
    tol.rtol = 1e-12;
    const auto res = quad::integrate([&](double th) { const double s = std::sin(0.5 * th); return 1.0 / (std::numbers::pi * (delta + 2.0 * s * s)); }, bp, tol);
    CHECK(res.converged);
    CHECK(res.value == doctest::Approx(1.0 / std::sqrt(delta * (2.0 + delta))).epsilon(1e-9));
}

TEST_CASE("returned rule reproduces the integral") {
    const std::vector<double> bp{0.0, 0.5, 2.0};
    quad::Rule rule;
    const auto r = quad::integrate([](double x) { return std::sin(x) * std::sin(x); }, bp, {}, &rule);
    CHECK(quad::apply(rule, [](double x) { return std::sin(x) * std::sin(x); }) == doctest::Approx(r.value).epsilon(1e-14));
    CHECK(quad::apply(rule, [](double) { return 1.0; }) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("node budget is respected") {
    const std::vector<double> bp{0.0, 1.0};
    quad::Tolerance tol;
    tol.rtol = 1e-15;
    tol.max_nodes = 400;
    const auto r = quad::integrate([](double x) { return std::abs(x - 1.0 / 3.0) < 1e-9 ? 1e9 : 0.0; }, bp, tol);
    CHECK(r.nodes <= 400);
}
