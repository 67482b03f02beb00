#include "doctest.h"

#include <cmath>
#include <numbers>
#include <thread>

#include "ekrelax/errors.hpp"
#include "ekrelax/torus_grid.hpp"

using namespace ekrelax;

namespace {

constexpr double pi = std::numbers::pi;

double max_diff(const Field& a, const std::function<double(double)>& f) {
    double e = 0.0;
    for (int j = 0; j < a.size(); ++j) {
        e = std::max(e, std::abs(a[j] - f(a.grid().x(j))));
    }
    return e;
}

}  // namespace

TEST_CASE("grid construction") {
    CHECK_THROWS_AS(TorusGrid(63), ConfigError);
    CHECK_THROWS_AS(TorusGrid(8), ConfigError);
    CHECK_THROWS_AS(TorusGrid(64, 0.0), ConfigError);
    const TorusGrid g(64, 3.0);
    CHECK(g.dx() == doctest::Approx(3.0 / 64));
    CHECK(g.dealias_cutoff() == 21);
    CHECK(g.nodes().size() == 64);
}

TEST_CASE("derivatives of a single mode are exact") {
    const TorusGrid g(64);
    const Field f = Field::from_function(g, [](double x) { return std::sin(3 * x); });
    CHECK(max_diff(deriv(f, 1), [](double x) { return 3 * std::cos(3 * x); }) < 1e-12);
    CHECK(max_diff(deriv(f, 2), [](double x) { return -9 * std::sin(3 * x); }) < 1e-12);
    CHECK(max_diff(deriv(f, 3), [](double x) { return -27 * std::cos(3 * x); }) < 1e-10);
    CHECK(max_diff(deriv(f, 4), [](double x) { return 81 * std::sin(3 * x); }) < 1e-8);
    CHECK_THROWS_AS(deriv(f, 0), UsageError);
    CHECK_THROWS_AS(deriv(f, 5), UsageError);
}

TEST_CASE("derivative on a non-2pi torus") {
    const double L = 5.0;
    const TorusGrid g(128, L);
    const double k = 2 * pi * 2 / L;
    const Field f = Field::from_function(g, [&](double x) { return std::cos(k * x); });
    CHECK(max_diff(deriv(f, 1), [&](double x) { return -k * std::sin(k * x); }) < 1e-12);
}

TEST_CASE("analytic function converges spectrally") {
    const TorusGrid g(64);
    const Field f = Field::from_function(g, [](double x) { return std::exp(std::sin(x)); });
    auto exact = [](double x) { return std::cos(x) * std::exp(std::sin(x)); };
    CHECK(max_diff(deriv(f, 1), exact) < 1e-12);
}

TEST_CASE("rectangle rule integrates trigonometric polynomials exactly") {
    const TorusGrid g(32);
    const Field f = Field::from_function(g, [](double x) { return 1.0 + std::cos(x) * std::cos(x) + std::sin(5 * x); });
    CHECK(integrate(f) == doctest::Approx(2 * pi + pi).epsilon(1e-14));
    const Field c = Field::from_function(g, [](double x) { return std::cos(2 * x); });
    CHECK(l2_norm(c) == doctest::Approx(std::sqrt(pi)).epsilon(1e-14));
}

TEST_CASE("two-thirds dealiasing") {
    const TorusGrid g(96);  // cutoff 32
    const Field f = Field::from_function(g, [](double x) { return std::cos(32 * x) + std::cos(33 * x); });
    const Field d = dealias(f);
    CHECK(max_diff(d, [](double x) { return std::cos(32 * x); }) < 1e-13);
    const Field dd = deriv_dealiased(f, 1);
    CHECK(max_diff(dd, [](double x) { return -32 * std::sin(32 * x); }) < 1e-11);
}

TEST_CASE("chopped derivative drops round-off modes only") {
    const TorusGrid g(128);
    Field f = Field::from_function(g, [](double x) { return 2 + std::cos(x); });
    const Field plain = deriv_chopped(f, 4, 0.0);
    CHECK(max_norm(plain - deriv_dealiased(f, 4)) == 0.0);
    const Field chopped = deriv_chopped(f, 4);
    CHECK(max_diff(chopped, [](double x) { return std::cos(x); }) < 1e-14);
    // a mode at 1e-10 of the peak survives the default chop
    f += Field::from_function(g, [](double x) { return 1e-10 * std::cos(20 * x); });
    CHECK(max_diff(deriv_chopped(f, 1), [](double x) { return -std::sin(x) - 2e-9 * std::sin(20 * x); }) < 1e-14);
    CHECK_THROWS_AS(deriv_chopped(f, 1, -1.0), UsageError);
}

TEST_CASE("resampling at four times the nodes and at midpoints") {
    const TorusGrid g(32);
    auto fn = [](double x) { return std::exp(std::sin(x)) + 0.3 * std::cos(4 * x); };
    const Field f = Field::from_function(g, fn);
    const Field fine = resample(f, 128);
    CHECK(max_diff(fine, fn) < 1e-11);
    const Field mid = resample(f, 128, 0.5);
    const double h = 2 * pi / 128;
    double e = 0.0;
    for (int j = 0; j < 128; ++j) {
        e = std::max(e, std::abs(mid[j] - fn((j + 0.5) * h)));
    }
    CHECK(e < 1e-11);
    CHECK_THROWS_AS(resample(f, 48), UsageError);
}

TEST_CASE("field arithmetic") {
    const TorusGrid g(16);
    const Field a(g, 2.0);
    const Field b(g, 3.0);
    CHECK((a * b)[5] == 6.0);
    CHECK((a / b)[0] == doctest::Approx(2.0 / 3.0));
    CHECK((-a + 1.0)[3] == -1.0);
    CHECK(a.mean() == 2.0);
    CHECK_THROWS_AS(a + Field(TorusGrid(32), 1.0), UsageError);
    CHECK_THROWS_AS(Field(g, std::vector<double>(3, 0.0)), UsageError);
    Field c = a;
    c[0] = std::nan("");
    CHECK_FALSE(c.all_finite());
}

TEST_CASE("workspaces are per thread") {
    const TorusGrid g(64);
    const Field f = Field::from_function(g, [](double x) { return std::sin(x); });
    double e1 = 1.0;
    double e2 = 1.0;
    std::thread t1([&] { e1 = max_diff(deriv(f, 1), [](double x) { return std::cos(x); }); });
    std::thread t2([&] { e2 = max_diff(deriv(f, 2), [](double x) { return -std::sin(x); }); });
    t1.join();
    t2.join();
    CHECK(e1 < 1e-13);
    CHECK(e2 < 1e-12);
}
