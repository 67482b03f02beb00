#include "ekrelax/property_suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "ekrelax/constitutive.hpp"
#include "ekrelax/entropy_metrics.hpp"
#include "ekrelax/equilibrium_solver.hpp"
#include "ekrelax/relax_solver.hpp"

namespace ekrelax {

namespace {

template <typename F>
PropertyResult timed(const std::string& name, F&& body) {
    PropertyResult r;
    r.name = name;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::string sci(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

FluidParams fluid(double gamma, double s) {
    FluidParams p;
    p.gamma = gamma;
    p.s = s;
    return p;
}

Field cosine_density(int n, double mean, double amp) {
    return Field::from_function(TorusGrid(n), [=](double x) { return mean + amp * std::cos(x); });
}

SolverConfig solver_config(const ExperimentConfig& c, double eps, double nu) {
    SolverConfig sc;
    sc.params = c.fluid(eps, nu);
    sc.grid = TorusGrid(c.n, c.length);
    sc.t_final = c.t_final;
    sc.n_outputs = c.outputs;
    sc.cfl_advective = c.cfl_advective;
    sc.cfl_dispersive = c.cfl_dispersive;
    sc.cfl_viscous = c.cfl_viscous;
    if (c.dt_max > 0.0) {
        sc.dt_max = c.dt_max;
    }
    sc.scheme = c.scheme;
    sc.keep_states = false;
    return sc;
}

}  // namespace

PropertyResult check_constitutive_identities() {
    return timed("constitutive identities", [](PropertyResult& r) {
        double worst = 0.0;
        const double pairs[][2] = {{2.0, 0.0}, {2.0, -1.0}, {3.0, 1.0}, {1.4, -1.0}};
        for (const auto& gs : pairs) {
            const FluidParams p = fluid(gs[0], gs[1]);
            for (int i = 0; i < 100; ++i) {
                const double rho = 0.1 * std::pow(100.0, i / 99.0);
                const double rho_bar = 0.2 * std::pow(30.0, ((i * 37) % 100) / 99.0);
                worst = std::max(worst, rel_err(h_second(rho, p), pressure_prime(rho, p) / rho));
                const double mp = mu_prime(rho, p);
                worst = std::max(worst, rel_err(mp * mp, rho * capillarity_k(rho, p)));
                worst = std::max(worst, rel_err(lambda_cap(rho, p), (p.s + 1.0) * mu(rho, p)));
                if (rho != rho_bar) {
                    worst = std::max(worst, rel_err(p_rel(rho, rho_bar, p), (p.gamma - 1.0) * h_rel(rho, rho_bar, p)));
                }
            }
        }
        r.passed = worst <= 1e-12;
        r.detail = "max relative error " + sci(worst);
    });
}

PropertyResult check_bohm_identity() {
    return timed("Bohm identity", [](PropertyResult& r) {
        const Field rho = cosine_density(256, 2.0, 1.0);
        double worst = 0.0;
        for (double s : {-1.0, 0.0, 1.0}) {
            worst = std::max(worst, bohm_residual(rho, fluid(3.0, s), kRoundoffChop).max_abs());
        }
        r.passed = worst <= 1e-8;
        r.detail = "max residual " + sci(worst);
    });
}

PropertyResult check_dual_gradient_flow() {
    return timed("dual gradient-flow forms", [](PropertyResult& r) {
        const Field rho = cosine_density(256, 2.0, 1.0);
        double worst = 0.0;
        for (double s : {-1.0, 0.0, 1.0}) {
            const FluidParams p = fluid(3.0, s);
            worst = std::max(worst, max_norm(gf_rhs(rho, p, kRoundoffChop) - gf_rhs_bohm_form(rho, p, kRoundoffChop)));
        }
        r.passed = worst <= 1e-8;
        r.detail = "max difference " + sci(worst);
    });
}

PropertyResult check_conservation(const ExperimentConfig& config) {
    return timed("conservation and dissipation", [&](PropertyResult& r) {
        std::ostringstream os;
        bool ok = true;
        const Field rho0 = config.initial_density();
        for (double nu : {0.0, 0.1}) {
            const SolverConfig sc = solver_config(config, 0.2, nu);
            const Trajectory tr = run(prepare_initial(rho0, sc.params), sc);
            const double drift = tr.max_mass_drift();
            const double excess = tr.max_energy_excess_rate();
            ok = ok && drift <= 1e-12 && excess <= 1e-8;
            os << "nu=" << nu << " mass drift " << drift << " energy excess rate " << excess << "; ";
        }
        EquilibriumConfig ec;
        ec.params = config.fluid(1.0, 0.0);
        ec.grid = TorusGrid(config.n, config.length);
        ec.t_final = config.t_final;
        ec.n_outputs = config.outputs;
        ec.rho_min = config.delta;
        ec.margin = config.equilibrium_margin;
        ec.base_substeps = config.equilibrium_substeps;
        ec.richardson_levels = config.equilibrium_levels;
        ec.keep_states = false;
        const EquilibriumTrajectory eq = run_equilibrium(rho0, ec);
        ok = ok && eq.max_mass_drift() <= 1e-12;
        os << "equilibrium mass drift " << eq.max_mass_drift();
        r.passed = ok;
        r.detail = os.str();
    });
}

PropertyResult check_constraint_drift(const ExperimentConfig& config) {
    return timed("constraint drift under dt halving", [&](PropertyResult& r) {
        SolverConfig sc = solver_config(config, 0.2, 0.0);
        const RelaxState init = prepare_initial(config.initial_density(), sc.params);
        // fix dt through dt_max, with the CFL bounds loosened so they do not bind
        const double dt = cfl_dt(init, sc);
        sc.cfl_advective = 1.0;
        sc.cfl_dispersive = 1.0;
        sc.cfl_viscous = 1.0;
        sc.dt_max = dt;
        const double coarse = run(init, sc).records.back().constraint_drift;
        sc.dt_max = 0.5 * dt;
        const double fine = run(init, sc).records.back().constraint_drift;
        const double ratio = coarse / fine;
        r.passed = ratio >= 3.0;
        std::ostringstream os;
        os << "drift " << coarse << " (dt) -> " << fine << " (dt/2), ratio " << ratio;
        r.detail = os.str();
    });
}

PropertyResult check_lemma_sampling() {
    return timed("lemma constant sampling", [](PropertyResult& r) {
        const LemmaSampling s = sample_lemma_constant(fluid(2.0, 0.0), 0.5, 4.0, 0.1, 10.0, 100);
        r.passed = s.holds;
        std::ostringstream os;
        os << "C_train " << s.c_train << ", test max " << s.test_max << " at rho " << s.argmax_rho << ", rho_bar "
           << s.argmax_rho_bar;
        r.detail = os.str();
    });
}

PropertyResult check_mu_identity() {
    return timed("mu'' identity", [](PropertyResult& r) {
        const TorusGrid g(256);
        const Field rho = Field::from_function(g, [](double x) { return 2.0 + std::cos(x); });
        const Field rho_bar = Field::from_function(g, [](double x) { return 2.0 + 0.5 * std::sin(2.0 * x); });
        double worst = 0.0;
        for (double s : {-1.0, 0.0, 1.0}) {
            worst = std::max(worst, mu_identity_residual(rho, rho_bar, fluid(3.0, s)));
        }
        r.passed = worst <= 1e-10;
        r.detail = "max residual " + sci(worst);
    });
}

std::vector<PropertyResult> run_property_suite(const ExperimentConfig& config, bool with_runs) {
    std::vector<PropertyResult> out{check_constitutive_identities(), check_bohm_identity(), check_dual_gradient_flow(),
                                    check_lemma_sampling(), check_mu_identity()};
    if (with_runs) {
        out.push_back(check_conservation(config));
        out.push_back(check_constraint_drift(config));
    }
    return out;
}

}  // namespace ekrelax
