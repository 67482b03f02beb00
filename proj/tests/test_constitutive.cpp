#include "doctest.h"

#include <cmath>
#include <vector>

#include "ekrelax/constitutive.hpp"
#include "ekrelax/errors.hpp"

using namespace ekrelax;

namespace {

FluidParams make(double gamma, double s) {
    FluidParams p;
    p.gamma = gamma;
    p.s = s;
    return p;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("closed forms against std::pow") {
    for (auto [g, s] : std::vector<std::pair<double, double>>{{2, 0}, {2, -1}, {3, 1}, {1.4, -1}, {5, 2.5}}) {
        const FluidParams p = make(g, s);
        for (double r : {0.1, 0.7, 1.0, 2.5, 9.0}) {
            CAPTURE(g);
            CAPTURE(s);
            CAPTURE(r);
            CHECK(rel(pressure(r, p), std::pow(r, g)) < 1e-14);
            CHECK(rel(h_internal(r, p), std::pow(r, g) / (g - 1)) < 1e-14);
            CHECK(rel(capillarity_k(r, p), (s + 3) * (s + 3) / 4 * std::pow(r, s)) < 1e-14);
            CHECK(rel(mu(r, p), std::pow(r, (s + 3) / 2)) < 1e-14);
            CHECK(rel(mu_prime(r, p), (s + 3) / 2 * std::pow(r, (s + 1) / 2)) < 1e-14);
            CHECK(std::abs(lambda_cap(r, p) - (s + 1) * std::pow(r, (s + 3) / 2)) <= 1e-13 * std::pow(r, (s + 3) / 2));
        }
    }
}

TEST_CASE("fast_pow agrees with std::pow") {
    for (double e : {-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 0.4, 1.4}) {
        for (double x : {1e-3, 0.3, 1.0, 2.0, 17.0}) {
            CHECK(rel(fast_pow(x, e), std::pow(x, e)) < 1e-15);
        }
    }
}

TEST_CASE("derivatives match central differences") {
    const FluidParams p = make(3, 1);
    const double r = 1.3;
    const double h = 1e-5;
    auto cd = [&](auto f) { return (f(r + h) - f(r - h)) / (2 * h); };
    CHECK(rel(pressure_prime(r, p), cd([&](double x) { return pressure(x, p); })) < 1e-9);
    CHECK(rel(h_prime(r, p), cd([&](double x) { return h_internal(x, p); })) < 1e-9);
    CHECK(rel(h_second(r, p), cd([&](double x) { return h_prime(x, p); })) < 1e-9);
    CHECK(rel(capillarity_k_prime(r, p), cd([&](double x) { return capillarity_k(x, p); })) < 1e-9);
    CHECK(rel(mu_second(r, p), cd([&](double x) { return mu_prime(x, p); })) < 1e-9);
}

TEST_CASE("relative energy near the diagonal") {
    const FluidParams p = make(2, 0);
    const double rb = 1.7;
    for (double step : {1e-3, 1e-6, 1e-9}) {
        const double r = rb + step;
        const double d = r - rb;  // exact
        // gamma = 2: h(rho | rho_bar) = p(rho | rho_bar) = d^2
        CHECK(rel(h_rel(r, rb, p), d * d) < 1e-14);
        CHECK(rel(p_rel(r, rb, p), d * d) < 1e-14);
    }
    const FluidParams q = make(3, 1);
    for (double step : {1e-4, 1e-8}) {
        const double r = rb + step;
        const double d = r - rb;
        // gamma = 3: h(rho | rho_bar) = (d^3 + 3 rho_bar d^2) / 2
        CHECK(rel(h_rel(r, rb, q), (d * d * d + 3 * rb * d * d) / 2) < 1e-13);
    }
    CHECK(h_rel(rb, rb, p) == 0.0);
    // far from the diagonal the direct formula is exact enough
    const double r = 0.2;
    CHECK(rel(h_rel(r, rb, p), r * r - rb * rb - 2 * rb * (r - rb)) < 1e-13);
}

TEST_CASE("lame coefficients") {
    FluidParams p = make(2, 0);
    const LameValues m = lame_coefficients(2.0, p);
    CHECK(rel(m.mu_l, mu(2.0, p)) < 1e-15);
    CHECK(rel(m.lambda_l, lambda_cap(2.0, p)) < 1e-15);
    p.lame_mode = LameMode::custom;
    p.lame_mu = {0.5, 1.0};
    p.lame_lambda = {-0.5, 1.0};
    CHECK(rel(viscous_modulus(4.0, p), 2 * 2.0 - 2.0) < 1e-15);
    p.lame_lambda = {-2.0, 1.0};
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(make(1.0, 0).validate(), ConfigError);
    CHECK_THROWS_AS(make(2, -1.5).validate(), ConfigError);
    CHECK_THROWS_AS(make(2, 0.5).validate(), ConfigError);
    FluidParams p = make(2, 0);
    p.epsilon = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    CHECK_NOTHROW(make(3, 1).validate());
}

TEST_CASE("domain errors") {
    const FluidParams p = make(2, -1);
    CHECK_THROWS_AS(pressure(-1.0, p), DomainError);
    CHECK_THROWS_AS(capillarity_k(0.0, p), SingularInputError);
    CHECK(mu(0.0, p) == 0.0);
    CHECK_THROWS_AS(lemma_ratio(1.0, 1.0, p), UndefinedRatioError);
}

TEST_CASE("lemma ratio is bounded on a box") {
    const FluidParams p = make(2, 0);
    // s = 0: rho (mu'(rho) - mu'(rho_bar))^2 = (9/4) rho (sqrt rho - sqrt rho_bar)^2
    // and h(rho | rho_bar) = (rho - rho_bar)^2, so the ratio is
    // (9/4) rho / (sqrt rho + sqrt rho_bar)^2 < 9/4.
    for (double rb : {0.5, 1.0, 4.0}) {
        for (double r : {0.1, 0.9, 3.0, 10.0}) {
            const double expect = 2.25 * r / std::pow(std::sqrt(r) + std::sqrt(rb), 2);
            CHECK(rel(lemma_ratio(r, rb, p), expect) < 1e-12);
        }
    }
}
