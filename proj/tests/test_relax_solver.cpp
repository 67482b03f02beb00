#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "ekrelax/errors.hpp"
#include "ekrelax/relax_solver.hpp"

using namespace ekrelax;

namespace {

FluidParams fluid(double eps, double nu = 0.0) {
    FluidParams p;
    p.gamma = 2.0;
    p.s = 0.0;
    p.epsilon = eps;
    p.nu = nu;
    return p;
}

Field bump(const TorusGrid& g) {
    return Field::from_function(g, [](double x) { return 2.0 + 0.5 * std::cos(x) + 0.1 * std::sin(2 * x); });
}

double state_diff(const RelaxState& a, const RelaxState& b) {
    return std::max({max_norm(a.rho - b.rho), max_norm(a.m - b.m), max_norm(a.J - b.J)});
}

RelaxState advance(RelaxState s, double dt, int n, const FluidParams& p, StepScheme scheme) {
    for (int i = 0; i < n; ++i) {
        s = step(s, dt, p, 0.0, scheme);
    }
    return s;
}

}  // namespace

TEST_CASE("friction decay is exact when the fluxes vanish") {
    // constant rho and m, J = 0: every flux is constant in x
    const TorusGrid g(32);
    const FluidParams p = fluid(0.1);
    const RelaxState s{0.0, Field(g, 2.0), Field(g, 0.3), Field(g, 0.0)};
    const double dt = 0.004;  // dt / eps^2 = 0.4
    for (StepScheme scheme : {StepScheme::strang, StepScheme::integrating_factor}) {
        const RelaxState out = step(s, dt, p, 0.0, scheme);
        CHECK(max_norm(out.m - Field(g, 0.3 * std::exp(-0.4))) < 1e-15);
        CHECK(max_norm(out.rho - s.rho) == 0.0);
        CHECK(out.t == doctest::Approx(dt));
    }
}

TEST_CASE("stiff friction stays bounded") {
    const TorusGrid g(32);
    const FluidParams p = fluid(1e-3);
    const RelaxState s{0.0, Field(g, 1.0), Field(g, 1.0), Field(g, 0.0)};
    const RelaxState out = step(s, 1e-3, p, 0.0);  // dt / eps^2 = 1000
    CHECK(out.m.max_abs() < 1e-300);
}

TEST_CASE("temporal order on smooth data") {
    const TorusGrid g(32);
    const FluidParams p = fluid(0.5);
    const RelaxState init = prepare_initial(bump(g), p, Preparation::ill);
    SolverConfig sc;
    sc.params = p;
    sc.grid = g;
    const double dt0 = cfl_dt(init, sc);
    const double T = 64 * dt0;
    // the splitting limits the Strang scheme to second order
    for (auto [scheme, expected] : {std::pair{StepScheme::strang, 2.0}, std::pair{StepScheme::integrating_factor, 3.0}}) {
        const RelaxState ref = advance(init, T / 512, 512, p, scheme);
        const double e1 = state_diff(advance(init, T / 16, 16, p, scheme), ref);
        const double e2 = state_diff(advance(init, T / 32, 32, p, scheme), ref);
        const double e3 = state_diff(advance(init, T / 64, 64, p, scheme), ref);
        CAPTURE(e1);
        CAPTURE(e2);
        CAPTURE(e3);
        const double order = std::log2(e2 / e3);
        CHECK(std::abs(order - expected) < 0.3);
        CHECK(std::abs(std::log2(e1 / e2) - expected) < 0.3);
    }
}

TEST_CASE("well-prepared data") {
    const TorusGrid g(64);
    const FluidParams p = fluid(0.2);
    const Field rho = bump(g);
    const RelaxState w = prepare_initial(rho, p, Preparation::well);
    CHECK(max_norm(w.m - 0.2 * darcy_flux(rho, p)) < 1e-15);
    CHECK(max_norm(w.J - constraint_momentum(rho, p)) == 0.0);
    CHECK(constraint_drift(w, p) == 0.0);
    const RelaxState ill = prepare_initial(rho, p, Preparation::ill);
    CHECK(ill.m.max_abs() == 0.0);
    CHECK_THROWS_AS(prepare_initial(rho, p, Preparation::well, 3.0), NumericalAbort);
}

TEST_CASE("J from mu(rho)") {
    // mu = rho^(3/2) for s = 0
    const TorusGrid g(128);
    const Field rho = Field::from_function(g, [](double x) { return 2.0 + std::cos(x); });
    const Field J = constraint_momentum(rho, fluid(1.0));
    double e = 0.0;
    for (int j = 0; j < g.size(); ++j) {
        const double x = g.x(j);
        e = std::max(e, std::abs(J[j] + 1.5 * std::sqrt(2.0 + std::cos(x)) * std::sin(x)));
    }
    CHECK(e < 1e-12);
}

TEST_CASE("darcy flux linearization") {
    const TorusGrid g(128);
    for (double s : {-1.0, 0.0, 1.0}) {
        FluidParams p = fluid(1.0);
        p.s = s;
        p.gamma = 3.0;
        const Field rho = bump(g);
        const Field dir = Field::from_function(g, [](double x) { return std::sin(x) + 0.3 * std::cos(2 * x); });
        const Field lin = darcy_flux_derivative(rho, dir, p);
        // central difference oracle with one Richardson step
        auto cd = [&](double d) {
            Field r = darcy_flux(rho + d * dir, p) - darcy_flux(rho + (-d) * dir, p);
            r *= 0.5 / d;
            return r;
        };
        const Field fd = (4.0 * cd(5e-4) - cd(1e-3)) * (1.0 / 3.0);
        CAPTURE(s);
        CHECK(max_norm(fd - lin) < 1e-7 * max_norm(lin));
    }
}

TEST_CASE("run lands on the output times and conserves mass") {
    const TorusGrid g(64);
    for (double nu : {0.0, 0.1}) {
        SolverConfig sc;
        sc.params = fluid(0.3, nu);
        sc.grid = g;
        sc.t_final = 0.05;
        sc.n_outputs = 5;
        const RelaxState init = prepare_initial(bump(g), sc.params);
        int outputs = 0;
        long long steps = 0;
        const Trajectory traj = run(
            init, sc,
            [&](int k, const RelaxState& s) {
                CHECK(s.t == doctest::Approx(0.01 * k).epsilon(1e-15));
                ++outputs;
            },
            [&](int, const RelaxState&) { ++steps; });
        CHECK(outputs == 6);
        CHECK(steps == traj.steps);
        CHECK(traj.records.size() == 6);
        CHECK(traj.states.size() == 6);
        CHECK(traj.max_mass_drift() < 1e-13);
        CHECK(traj.max_energy_excess_rate() < 1e-8);
        // energy is dissipated, not lost
        CHECK(traj.records.back().energy < traj.records.front().energy);
        CHECK(traj.records.back().dissipated > 0.0);
    }
}

TEST_CASE("floor violation aborts with the time") {
    const TorusGrid g(32);
    const FluidParams p = fluid(0.5);
    const RelaxState s = prepare_initial(bump(g), p);
    CHECK_THROWS_AS(step(s, 1e-4, p, 1.8), NumericalAbort);
    try {
        step(s, 1e-4, p, 1.8);
    } catch (const NumericalAbort& e) {
        CHECK(e.time() == 0.0);
    }
    CHECK_THROWS_AS(step(s, -1.0, p), UsageError);
}

TEST_CASE("CFL step shrinks with the grid and eps") {
    SolverConfig sc;
    sc.params = fluid(0.2);
    sc.grid = TorusGrid(64);
    const RelaxState a = prepare_initial(bump(sc.grid), sc.params);
    const double dt64 = cfl_dt(a, sc);
    sc.grid = TorusGrid(128);
    const double dt128 = cfl_dt(prepare_initial(bump(sc.grid), sc.params), sc);
    CHECK(dt128 < 0.3 * dt64);
    sc.params.epsilon = 0.1;
    CHECK(cfl_dt(prepare_initial(bump(sc.grid), sc.params), sc) < dt128);
}

TEST_CASE("snapshot round trip is exact") {
    const TorusGrid g(32, 3.5);
    const FluidParams p = fluid(0.2);
    RelaxState s = prepare_initial(bump(g), p);
    s.t = 0.123456789012345;
    const auto path = std::filesystem::temp_directory_path() / "ekrelax_snapshot_test.txt";
    write_snapshot(s, path.string());
    const RelaxState r = read_snapshot(path.string());
    std::filesystem::remove(path);
    CHECK(r.t == s.t);
    CHECK(r.rho.grid() == g);
    CHECK(state_diff(r, s) == 0.0);
}

TEST_CASE("Bohm form of the stress") {
    const TorusGrid g(256);
    const Field rho = Field::from_function(g, [](double x) { return 2.0 + std::cos(x); });
    for (double s : {-1.0, 0.0, 1.0}) {
        FluidParams p = fluid(1.0);
        p.gamma = 3.0;
        p.s = s;
        CHECK(bohm_residual(rho, p, kRoundoffChop).max_abs() < 1e-8);
    }
}
