#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "ekrelax/entropy_metrics.hpp"
#include "ekrelax/errors.hpp"

using namespace ekrelax;

namespace {

FluidParams fluid(double gamma, double s, double eps, double nu = 0.0) {
    FluidParams p;
    p.gamma = gamma;
    p.s = s;
    p.epsilon = eps;
    p.nu = nu;
    return p;
}

Field rho_profile(const TorusGrid& g) {
    return Field::from_function(g, [](double x) { return 2.0 + 0.5 * std::cos(x) + 0.1 * std::sin(2 * x); });
}

Field rho_bar_profile(const TorusGrid& g) {
    return Field::from_function(g, [](double x) { return 2.0 + 0.4 * std::cos(x) + 0.05 * std::sin(x); });
}

// a state near, but off, the equilibrium manifold
RelaxState perturbed(const TorusGrid& g, const FluidParams& p) {
    const Field rho = rho_profile(g);
    const Field dm = Field::from_function(g, [](double x) { return 0.05 * std::sin(x) + 0.02 * std::cos(3 * x); });
    return {0.0, rho, p.epsilon * darcy_flux(rho, p) + dm, constraint_momentum(rho, p)};
}

}  // namespace

TEST_CASE("relative entropy vanishes on the equilibrium and is positive off it") {
    const TorusGrid g(64);
    const FluidParams p = fluid(2.0, 0.0, 0.3);
    const EquilibriumFields E = make_equilibrium_fields({0.0, rho_bar_profile(g)}, p);
    const RelaxState at_eq{0.0, E.rho_bar, E.m_bar, E.J_bar};
    CHECK(psi(at_eq, E, p) == 0.0);
    const EntropyBudget b0 = budget(at_eq, E, p);
    CHECK(b0.rhs() == 0.0);
    const RelaxState U = perturbed(g, p);
    const Field eta = relative_entropy_density(U, E, p);
    CHECK(eta.min() >= 0.0);
    CHECK(psi(U, E, p) > 0.0);
}

TEST_CASE("relative entropy density for gamma = 2") {
    // h(rho | rho_bar) = (rho - rho_bar)^2 when p = rho^2
    const TorusGrid g(64);
    const FluidParams p = fluid(2.0, 0.0, 0.3);
    const EquilibriumFields E = make_equilibrium_fields({0.0, rho_bar_profile(g)}, p);
    const RelaxState U = perturbed(g, p);
    const Field eta = relative_entropy_density(U, E, p);
    const Field u = U.m / U.rho;
    const Field v = U.J / U.rho;
    const Field ub = E.m_bar / E.rho_bar;
    const Field vb = E.J_bar / E.rho_bar;
    double e = 0.0;
    double sum = 0.0;
    for (int j = 0; j < g.size(); ++j) {
        const double du = u[j] - ub[j];
        const double dv = v[j] - vb[j];
        const double dr = U.rho[j] - E.rho_bar[j];
        const double expect = 0.5 * U.rho[j] * (du * du + dv * dv) + dr * dr;
        e = std::max(e, std::abs(eta[j] - expect));
        sum += expect;
    }
    CHECK(e < 1e-14);
    CHECK(psi(U, E, p) == doctest::Approx(sum * g.dx()).epsilon(1e-13));
}

TEST_CASE("entropy budget is the time derivative of Psi") {
    // Psi is differentiated along the straight line through (U, E) in the
    // direction of the two flows; the budget must match to O(h^2).
    const TorusGrid g(256);
    for (double nu : {0.0, 0.1}) {
        for (auto [gamma, s] : {std::pair{2.0, 0.0}, std::pair{3.0, 1.0}, std::pair{2.0, -1.0}}) {
            const FluidParams p = fluid(gamma, s, 0.2, nu);
            const RelaxState U = perturbed(g, p);
            const Field rb = rho_bar_profile(g);
            const EquilibriumFields E = make_equilibrium_fields({0.0, rb}, p);
            const NonstiffRhs r = rhs_nonstiff(U, p);
            const Field mdot = r.dm - (1.0 / (p.epsilon * p.epsilon)) * U.m;
            const Field gf = gf_rhs(rb, p);
            const double dl = 1e-5;
            const Field mbdot = (p.epsilon / (2 * dl)) * (darcy_flux(rb + dl * gf, p) - darcy_flux(rb + (-dl) * gf, p));
            const Field Jbdot = (1.0 / (2 * dl)) *
                                (constraint_momentum(rb + dl * gf, p) - constraint_momentum(rb + (-dl) * gf, p));
            auto psi_at = [&](double h) {
                const RelaxState V{0.0, U.rho + h * r.drho, U.m + h * mdot, U.J + h * r.dJ};
                const EquilibriumFields F{0.0, rb + h * gf, E.m_bar + h * mbdot, E.J_bar + h * Jbdot, E.e_bar};
                return psi(V, F, p);
            };
            auto dpsi = [&](double h) { return (psi_at(h) - psi_at(-h)) / (2 * h); };
            const double rhs = budget(U, E, p).rhs();
            const double d1 = dpsi(1e-4);
            const double d2 = dpsi(5e-5);
            CAPTURE(nu);
            CAPTURE(s);
            CHECK(std::abs(d2 - rhs) < 0.3 * std::abs(d1 - rhs));
            CHECK(std::abs((4 * d2 - d1) / 3 - rhs) < 1e-7 * std::abs(rhs));
        }
    }
}

TEST_CASE("viscous terms vanish without viscosity") {
    const TorusGrid g(64);
    const FluidParams p = fluid(2.0, 0.0, 0.2);
    const EquilibriumFields E = make_equilibrium_fields({0.0, rho_bar_profile(g)}, p);
    const EntropyBudget b = budget(perturbed(g, p), E, p);
    CHECK(b.visc_q1 == 0.0);
    CHECK(b.visc_q2 == 0.0);
    CHECK(b.visc_x1 == 0.0);
    CHECK(b.visc_x2 == 0.0);
    CHECK(b.friction < 0.0);
}

TEST_CASE("error field scales with eps") {
    const TorusGrid g(64);
    const Field rb = rho_bar_profile(g);
    const FluidParams a = fluid(2.0, 0.0, 0.4);
    const FluidParams b = fluid(2.0, 0.0, 0.1);
    const EquilibriumFields Ea = make_equilibrium_fields({0.0, rb}, a);
    const EquilibriumFields Eb = make_equilibrium_fields({0.0, rb}, b);
    CHECK(max_norm(Ea.e_bar - 4.0 * Eb.e_bar) < 1e-13 * Ea.e_bar.max_abs());
    CHECK(max_norm(Ea.m_bar - 4.0 * Eb.m_bar) < 1e-15 * Ea.m_bar.max_abs());
    const Field e_hat = error_term_scaled(rb, a);
    const EquilibriumFields Ec = make_equilibrium_fields({0.0, rb}, b, &e_hat);
    CHECK(max_norm(Ec.e_bar - Eb.e_bar) == 0.0);
}

TEST_CASE("mismatched inputs are rejected") {
    const TorusGrid g(64);
    const FluidParams p = fluid(2.0, 0.0, 0.2);
    const EquilibriumFields E = make_equilibrium_fields({0.0, rho_bar_profile(g)}, p);
    const TorusGrid h(32);
    const RelaxState other{0.0, Field(h, 1.0), Field(h, 0.0), Field(h, 0.0)};
    CHECK_THROWS_AS(psi(other, E, p), UsageError);
    RelaxState late = perturbed(g, p);
    late.t = 0.5;
    CHECK_THROWS_AS(budget(late, E, p), UsageError);
}

TEST_CASE("derivative identity for mu") {
    const TorusGrid g(128);
    for (double s : {-1.0, -0.5, 0.0, 1.0, 2.0}) {
        const FluidParams p = fluid(2.0, s, 1.0);
        CAPTURE(s);
        CHECK(mu_identity_residual(rho_profile(g), rho_bar_profile(g), p) < 1e-12);
    }
}

TEST_CASE("trapezoid slack on a synthetic budget") {
    // Psi = exp(-t) with rhs = -exp(-t) + 0.1: slack grows as 0.1 t
    std::vector<EntropyBudget> budgets;
    const int n = 200;
    for (int k = 0; k <= n; ++k) {
        EntropyBudget b;
        b.t = k * 0.01;
        b.psi = std::exp(-b.t);
        b.friction = -std::exp(-b.t);
        b.err = 0.1;
        budgets.push_back(b);
    }
    const InequalityReport rep = inequality_check(budgets, 0.5);
    CHECK(rep.tol == doctest::Approx(1e-6));
    CHECK(rep.passed);
    CHECK(rep.slack.size() == budgets.size());
    // trapezoid error for exp(-t) is h^2/12 (1 - exp(-2))
    const double trap = 1e-4 / 12 * (1 - std::exp(-2.0));
    CHECK(rep.slack.back() == doctest::Approx(0.2 - trap).epsilon(1e-6));

    SlackTracker tracker(0.5);
    tracker.add_output(budgets[0]);
    for (int k = 1; k <= n; ++k) {
        tracker.add_rate(budgets[k].t, budgets[k].rhs());
        if (k % 20 == 0) {
            tracker.add_output(budgets[k]);
        }
    }
    CHECK(tracker.report().slack.size() == 11);
    CHECK(tracker.report().slack.back() == doctest::Approx(rep.slack.back()).epsilon(1e-12));

    for (auto& b : budgets) {
        b.err = -0.1;
    }
    const InequalityReport bad = inequality_check(budgets, 0.5);
    CHECK_FALSE(bad.passed);
    CHECK(bad.slack_min == doctest::Approx(-0.2 - trap).epsilon(1e-6));
}

TEST_CASE("slack tracker usage") {
    SlackTracker tracker(0.1);
    CHECK_THROWS_AS(tracker.add_rate(0.1, 0.0), UsageError);
    EntropyBudget b;
    b.psi = 1.0;
    tracker.add_output(b);
    tracker.add_rate(0.1, 0.0);
    b.t = 0.2;
    CHECK_THROWS_AS(tracker.add_output(b), UsageError);
    // tolerance floor eps^4 when Psi(0) vanishes
    SlackTracker zero(0.1, 1e-3);
    zero.add_output(EntropyBudget{});
    CHECK(zero.report().tol == doctest::Approx(1e-7));
}

TEST_CASE("lemma constant sampling for s = 0") {
    // rho |mu'(rho) - mu'(rho_bar)|^2 / h(rho | rho_bar) = 2.25 rho / (sqrt(rho) + sqrt(rho_bar))^2
    // for gamma = 2, increasing in rho and decreasing in rho_bar
    const FluidParams p = fluid(2.0, 0.0, 1.0);
    auto closed = [](double r, double rb) {
        const double d = std::sqrt(r) + std::sqrt(rb);
        return 2.25 * r / (d * d);
    };
    const int n = 50;
    const LemmaSampling L = sample_lemma_constant(p, 0.5, 2.0, 0.1, 4.0, n);
    CHECK(L.c_train == doctest::Approx(closed(4.0, 0.5)).epsilon(1e-12));
    const double r_top = 4.0 - 3.9 / (2 * n);
    const double rb_low = 0.5 + 1.5 / (2 * n);
    CHECK(L.test_max == doctest::Approx(closed(r_top, rb_low)).epsilon(1e-12));
    CHECK(L.argmax_rho == doctest::Approx(r_top));
    CHECK(L.argmax_rho_bar == doctest::Approx(rb_low));
    CHECK(L.holds);
    CHECK_THROWS_AS(sample_lemma_constant(p, 0.0, 1.0, 0.1, 1.0), ConfigError);
    CHECK_THROWS_AS(sample_lemma_constant(p, 1.0, 2.0, 0.1, 1.0, 1), ConfigError);
}

TEST_CASE("budget csv") {
    std::vector<EntropyBudget> budgets(3);
    for (int k = 0; k < 3; ++k) {
        budgets[k].t = 0.1 * k;
        budgets[k].psi = 1.0;
    }
    const InequalityReport rep = inequality_check(budgets, 0.2);
    const auto path = std::filesystem::temp_directory_path() / "ekrelax_budget_test.csv";
    write_budget_csv(budgets, rep, path.string());
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    int rows = 0;
    for (std::string line; std::getline(in, line);) {
        ++rows;
    }
    std::filesystem::remove(path);
    CHECK(header.rfind("t,psi", 0) == 0);
    CHECK(rows == 3);
}
