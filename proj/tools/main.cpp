#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "ekrelax/config.hpp"
#include "ekrelax/equilibrium_solver.hpp"
#include "ekrelax/errors.hpp"
#include "ekrelax/property_suite.hpp"
#include "ekrelax/relax_solver.hpp"
#include "ekrelax/reports.hpp"
#include "ekrelax/sweep.hpp"

using namespace ekrelax;

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalAbort = 3;
constexpr int kPropertyFailure = 4;

struct Common {
    std::string config_path;
    std::map<std::string, std::string> overrides;
};

// one --<key> flag per config key, applied on top of the file
void add_common(CLI::App* cmd, Common& common) {
    cmd->add_option("config", common.config_path, "config file (key = value)");
    for (const auto& key : config_keys()) {
        cmd->add_option_function<std::string>(
            "--" + key, [&common, key](const std::string& v) { common.overrides[key] = v; }, "override " + key);
    }
}

ExperimentConfig resolve(const Common& common) {
    ExperimentConfig c = common.config_path.empty() ? ExperimentConfig{} : load_config(common.config_path);
    for (const auto& [key, value] : common.overrides) {
        apply_setting(c, key, value);
    }
    c.validate();
    return c;
}

int cmd_simulate(const Common& common, double eps_flag, int series) {
    const ExperimentConfig c = resolve(common);
    const double eps = eps_flag > 0.0 ? eps_flag : c.epsilon.front();
    if (series < 0 || series >= static_cast<int>(c.nu.size())) {
        throw ConfigError("--series out of range");
    }
    const double nu = c.nu[static_cast<std::size_t>(series)].at(eps);
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
    std::filesystem::create_directories(c.out_dir);
    sc.dump_path = (std::filesystem::path(c.out_dir) / "abort_state.txt").string();

    const RelaxState init = prepare_initial(c.initial_density(), sc.params, c.prepared);
    RelaxState last = init;
    const Trajectory traj = run(init, sc, [&](int, const RelaxState& s) { last = s; });
    const auto dir = std::filesystem::path(c.out_dir);
    write_trajectory_csv(traj, (dir / "trajectory.csv").string());
    write_snapshot(last, (dir / "final_state.txt").string());
    std::printf("eps %g nu %g steps %lld mass drift %.3e energy excess rate %.3e constraint drift %.3e\n", eps, nu,
                traj.steps, traj.max_mass_drift(), traj.max_energy_excess_rate(),
                traj.records.back().constraint_drift);
    return 0;
}

int cmd_equilibrium(const Common& common) {
    const ExperimentConfig c = resolve(common);
    EquilibriumConfig ec;
    ec.params = c.fluid(1.0, 0.0);
    ec.grid = TorusGrid(c.n, c.length);
    ec.t_final = c.t_final;
    ec.n_outputs = c.outputs;
    ec.rho_min = c.delta;
    ec.margin = c.equilibrium_margin;
    ec.base_substeps = c.equilibrium_substeps;
    ec.richardson_levels = c.equilibrium_levels;
    const EquilibriumTrajectory eq = run_equilibrium(c.initial_density(), ec);
    std::filesystem::create_directories(c.out_dir);
    const auto dir = std::filesystem::path(c.out_dir);
    write_equilibrium_csv(eq, (dir / "equilibrium.csv").string());
    write_snapshot(RelaxState{eq.states.back().t, eq.states.back().rho_bar, Field(ec.grid), Field(ec.grid)},
                   (dir / "equilibrium_final.txt").string());
    std::printf("steps %lld mass drift %.3e max free energy increase %.3e\n", eq.steps, eq.max_mass_drift(),
                eq.max_free_energy_increase());
    return 0;
}

int cmd_sweep(const Common& common) {
    const ExperimentConfig c = resolve(common);
    const SweepResult result = run_sweep(c);
    for (const auto& path : emit_reports(result, c)) {
        std::printf("wrote %s\n", path.c_str());
    }
    for (const auto& r : result.records) {
        if (r.completed) {
            std::printf("eps %-8g nu %-10g sup psi %.4e  sup psi/eps^4 %.4f  slack_min %.3e (tol %.3e)\n", r.epsilon,
                        r.nu, r.sup_psi, r.sup_psi / std::pow(r.epsilon, 4), r.slack_min, r.tol_slack);
        } else {
            std::printf("eps %-8g nu %-10g FAILED: %s\n", r.epsilon, r.nu, r.error.c_str());
        }
    }
    for (const auto& s : result.series) {
        std::printf("series %d (nu = %s): slope %.4f  C_emp %.4f  spread %.3f\n", s.series, s.nu_label.c_str(),
                    s.fit.slope, s.c_emp, s.c_spread);
    }
    return result.complete ? 0 : kNumericalAbort;
}

int cmd_check(const Common& common, bool quick) {
    const ExperimentConfig c = resolve(common);
    bool ok = true;
    for (const auto& r : run_property_suite(c, !quick)) {
        std::printf("%s %s: %s (%.2fs)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str(), r.seconds);
        ok = ok && r.passed;
    }
    return ok ? 0 : kPropertyFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relaxation of Euler-Korteweg to its gradient-flow limit"};
    app.require_subcommand(1);

    Common sim_opts;
    double eps = 0.0;
    int series = 0;
    auto* sim = app.add_subcommand("simulate", "one relaxation run");
    add_common(sim, sim_opts);
    sim->add_option("--epsilon", eps, "eps for this run (default: first sweep entry)");
    sim->add_option("--series", series, "index into fluid.nu");

    Common eq_opts;
    auto* eq = app.add_subcommand("equilibrium", "one gradient-flow run");
    add_common(eq, eq_opts);

    Common sweep_opts;
    auto* sweep = app.add_subcommand("sweep", "eps sweep with rate fit and reports");
    add_common(sweep, sweep_opts);

    Common check_opts;
    bool quick = false;
    auto* check = app.add_subcommand("check", "property suite");
    add_common(check, check_opts);
    check->add_flag("--quick", quick, "skip the solver runs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (*sim) {
            return cmd_simulate(sim_opts, eps, series);
        }
        if (*eq) {
            return cmd_equilibrium(eq_opts);
        }
        if (*sweep) {
            return cmd_sweep(sweep_opts);
        }
        return cmd_check(check_opts, quick);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const NumericalAbort& e) {
        std::cerr << "numerical abort at t = " << e.time() << ": " << e.what() << '\n';
        return kNumericalAbort;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
