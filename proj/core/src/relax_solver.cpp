#include "ekrelax/relax_solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "ekrelax/errors.hpp"

namespace ekrelax {

namespace {

using Workspace = SpectralWorkspace;

Field ddx_trunc(const Field& f) {
    Field out(f.grid());
    Workspace::for_grid(f.grid()).derivative(f.values(), out.values(), 1, true);
    return out;
}

Field ddx(const Field& f, int order = 1) {
    Field out(f.grid());
    Workspace::for_grid(f.grid()).derivative(f.values(), out.values(), order, false);
    return out;
}

// rho mu'(rho), the 1-D stress modulus mu + lambda/2
Field stress_modulus(const Field& rho, const FluidParams& params) {
    Field a(rho.grid());
    for (int j = 0; j < rho.size(); ++j) {
        a[j] = rho[j] * mu_prime(rho[j], params);
    }
    return a;
}

void check_state(const RelaxState& s, double rho_floor, const char* where) {
    if (!s.rho.all_finite() || !s.m.all_finite() || !s.J.all_finite()) {
        std::ostringstream os;
        os << where << ": non-finite value at t = " << s.t;
        throw NumericalAbort(os.str(), s.t);
    }
    const double rmin = s.rho.min();
    if (rmin < rho_floor || !(rmin > 0.0)) {
        std::ostringstream os;
        os << where << ": density " << rmin << " below floor " << rho_floor << " at t = " << s.t;
        throw NumericalAbort(os.str(), s.t);
    }
}

// u_x^2 (2 mu_L + lambda_L) weighted integral, without the nu/eps factor
double viscous_integral(const RelaxState& s, const FluidParams& params) {
    const Field ux = ddx_trunc(s.m / s.rho);
    double sum = 0.0;
    for (int j = 0; j < ux.size(); ++j) {
        sum += viscous_modulus(s.rho[j], params) * ux[j] * ux[j];
    }
    return s.rho.grid().dx() * sum;
}

double kinetic_m(const Field& m, const Field& rho) {
    double sum = 0.0;
    for (int j = 0; j < m.size(); ++j) {
        sum += m[j] * m[j] / rho[j];
    }
    return 0.5 * rho.grid().dx() * sum;
}

void add_combination(RelaxState& s, double a, const NonstiffRhs& ra, double b, const NonstiffRhs& rb, double c,
                     const NonstiffRhs& rc) {
    for (int j = 0; j < s.rho.size(); ++j) {
        s.rho[j] += a * ra.drho[j] + b * rb.drho[j] + c * rc.drho[j];
        s.m[j] += a * ra.dm[j] + b * rb.dm[j] + c * rc.dm[j];
        s.J[j] += a * ra.dJ[j] + b * rb.dJ[j] + c * rc.dJ[j];
    }
}

double friction_rate(const RelaxState& s, double eps) { return 2.0 * kinetic_m(s.m, s.rho) / (eps * eps); }

double dissipation_rate(const RelaxState& s, const FluidParams& params, bool friction) {
    double rate = friction ? friction_rate(s, params.epsilon) : 0.0;
    if (params.nu > 0.0) {
        rate += params.nu / params.epsilon * viscous_integral(s, params);
    }
    return rate;
}

RelaxState step_strang(const RelaxState& state, double dt, const FluidParams& params, double rho_floor,
                       double* dissipated) {
    const double eps = params.epsilon;
    const double decay = std::exp(-0.5 * dt / (eps * eps));
    double lost = 0.0;

    RelaxState s0 = state;
    const double k_before = kinetic_m(s0.m, s0.rho);
    s0.m *= decay;
    lost += k_before - kinetic_m(s0.m, s0.rho);

    // SSP-RK3 in increment form; rounded 1/3, 2/3 convex weights would
    // bias the mass
    const NonstiffRhs r0 = rhs_nonstiff(s0, params, rho_floor);
    RelaxState s1 = s0;
    add_combination(s1, dt, r0, 0.0, r0, 0.0, r0);
    check_state(s1, rho_floor, "step stage 1");

    const NonstiffRhs r1 = rhs_nonstiff(s1, params, rho_floor);
    RelaxState s2 = s0;
    add_combination(s2, 0.25 * dt, r0, 0.25 * dt, r1, 0.0, r1);
    check_state(s2, rho_floor, "step stage 2");

    const NonstiffRhs r2 = rhs_nonstiff(s2, params, rho_floor);
    RelaxState s3 = s0;
    add_combination(s3, dt / 6.0, r0, dt / 6.0, r1, 2.0 * dt / 3.0, r2);

    if (dissipated != nullptr && params.nu > 0.0) {
        lost += dt * (dissipation_rate(s0, params, false) / 6.0 + dissipation_rate(s1, params, false) / 6.0 +
                      2.0 * dissipation_rate(s2, params, false) / 3.0);
    }

    const double k_mid = kinetic_m(s3.m, s3.rho);
    s3.m *= decay;
    lost += k_mid - kinetic_m(s3.m, s3.rho);
    s3.t = state.t + dt;
    check_state(s3, rho_floor, "step");
    if (dissipated != nullptr) {
        *dissipated += lost;
    }
    return s3;
}

// SSP-RK3 applied to e^{t/eps^2} m, i.e. with friction as an integrating
// factor. E(h) = exp(-h/eps^2) acts on m only.
RelaxState step_lawson(const RelaxState& state, double dt, const FluidParams& params, double rho_floor,
                       double* dissipated) {
    const double eps = params.epsilon;
    const double tau = dt / (eps * eps);
    const double e1 = std::exp(-tau);
    const double eh = std::exp(-0.5 * tau);
    const double ehi = std::exp(0.5 * tau);
    const RelaxState& s0 = state;
    const int n = s0.rho.size();

    const NonstiffRhs k1 = rhs_nonstiff(s0, params, rho_floor);
    RelaxState s1 = s0;
    for (int j = 0; j < n; ++j) {
        s1.rho[j] += dt * k1.drho[j];
        s1.m[j] = e1 * (s0.m[j] + dt * k1.dm[j]);
        s1.J[j] += dt * k1.dJ[j];
    }
    check_state(s1, rho_floor, "step stage 1");

    const NonstiffRhs k2 = rhs_nonstiff(s1, params, rho_floor);
    RelaxState s2 = s0;
    for (int j = 0; j < n; ++j) {
        s2.rho[j] += 0.25 * dt * (k1.drho[j] + k2.drho[j]);
        s2.m[j] = eh * s0.m[j] + 0.25 * dt * (eh * k1.dm[j] + ehi * k2.dm[j]);
        s2.J[j] += 0.25 * dt * (k1.dJ[j] + k2.dJ[j]);
    }
    check_state(s2, rho_floor, "step stage 2");

    const NonstiffRhs k3 = rhs_nonstiff(s2, params, rho_floor);
    RelaxState s3 = s0;
    for (int j = 0; j < n; ++j) {
        s3.rho[j] += dt * (k1.drho[j] / 6.0 + k2.drho[j] / 6.0 + 2.0 * k3.drho[j] / 3.0);
        s3.m[j] = e1 * s0.m[j] + dt * (e1 * k1.dm[j] / 6.0 + k2.dm[j] / 6.0 + 2.0 * eh * k3.dm[j] / 3.0);
        s3.J[j] += dt * (k1.dJ[j] / 6.0 + k2.dJ[j] / 6.0 + 2.0 * k3.dJ[j] / 3.0);
    }
    s3.t = state.t + dt;
    check_state(s3, rho_floor, "step");

    if (dissipated != nullptr) {
        // stage times 0, dt, dt/2 with weights 1/6, 1/6, 2/3
        *dissipated += dt * (dissipation_rate(s0, params, true) / 6.0 + dissipation_rate(s1, params, true) / 6.0 +
                             2.0 * dissipation_rate(s2, params, true) / 3.0);
    }
    return s3;
}

RelaxState step_impl(const RelaxState& state, double dt, const FluidParams& params, double rho_floor,
                     StepScheme scheme, double* dissipated) {
    if (dt < 0.0 || !std::isfinite(dt)) {
        throw UsageError("step: dt must be finite and >= 0");
    }
    if (dt == 0.0) {
        return state;
    }
    if (scheme == StepScheme::strang) {
        return step_strang(state, dt, params, rho_floor, dissipated);
    }
    return step_lawson(state, dt, params, rho_floor, dissipated);
}

}  // namespace

void SolverConfig::validate() const {
    params.validate();
    std::ostringstream os;
    auto in_unit = [](double c) { return c > 0.0 && c <= 1.0; };
    if (!in_unit(cfl_advective) || !in_unit(cfl_dispersive) || !in_unit(cfl_viscous)) {
        os << "CFL factors must lie in (0, 1]";
    } else if (!(t_final > 0.0) || !std::isfinite(t_final)) {
        os << "t_final must be > 0, got " << t_final;
    } else if (n_outputs < 1) {
        os << "n_outputs must be >= 1, got " << n_outputs;
    } else if (!(dt_max > 0.0)) {
        os << "dt_max must be > 0, got " << dt_max;
    } else if (rho_floor < 0.0) {
        os << "rho_floor must be >= 0, got " << rho_floor;
    }
    if (!os.str().empty()) {
        throw ConfigError(os.str());
    }
}

StressPair stresses(const RelaxState& state, const FluidParams& params) {
    const Field a = stress_modulus(state.rho, params);
    return {a * ddx_trunc(state.J / state.rho), a * ddx_trunc(state.m / state.rho)};
}

Field constraint_momentum(const Field& rho, const FluidParams& params, double chop) {
    Field mu_rho(rho.grid());
    for (int j = 0; j < rho.size(); ++j) {
        mu_rho[j] = mu(rho[j], params);
    }
    return deriv_chopped(mu_rho, 1, chop);
}

Field darcy_flux(const Field& rho, const FluidParams& params, double chop) {
    const Field J = constraint_momentum(rho, params, chop);
    Field flux = stress_modulus(rho, params) * deriv_chopped(J / rho, 1, chop);
    for (int j = 0; j < rho.size(); ++j) {
        flux[j] -= pressure(rho[j], params);
    }
    return deriv_chopped(flux, 1, chop);
}

Field darcy_flux_derivative(const Field& rho, const Field& dir, const FluidParams& params, double chop) {
    if (!(dir.grid() == rho.grid())) {
        throw UsageError("darcy_flux_derivative: mismatched grids");
    }
    Field mu_rho(rho.grid());
    Field dmu(rho.grid());
    Field dmod(rho.grid());
    Field dp(rho.grid());
    for (int j = 0; j < rho.size(); ++j) {
        const double r = rho[j];
        const double mp = mu_prime(r, params);
        mu_rho[j] = mu(r, params);
        dmu[j] = mp * dir[j];
        dmod[j] = (mp + r * mu_second(r, params)) * dir[j];
        dp[j] = pressure_prime(r, params) * dir[j];
    }
    const Field J = deriv_chopped(mu_rho, 1, chop);
    const Field dJ = deriv_chopped(dmu, 1, chop);
    // d(J / rho) = dJ / rho - J dir / rho^2
    const Field dv = dJ / rho - J * dir / (rho * rho);
    Field flux = dmod * deriv_chopped(J / rho, 1, chop) + stress_modulus(rho, params) * deriv_chopped(dv, 1, chop);
    flux -= dp;
    return deriv_chopped(flux, 1, chop);
}

Field bohm_residual(const Field& rho, const FluidParams& params, double chop) {
    Field mu_rho(rho.grid());
    for (int j = 0; j < rho.size(); ++j) {
        mu_rho[j] = mu(rho[j], params);
    }
    const Field v = deriv_chopped(mu_rho, 1, chop) / rho;
    const Field lhs = deriv_chopped(stress_modulus(rho, params) * deriv_chopped(v, 1, chop), 1, chop);

    const Field rx = deriv_chopped(rho, 1, chop);
    const Field rxx = deriv_chopped(rho, 2, chop);
    Field inner(rho.grid());
    for (int j = 0; j < rho.size(); ++j) {
        inner[j] = capillarity_k(rho[j], params) * rxx[j] +
                   0.5 * capillarity_k_prime(rho[j], params) * rx[j] * rx[j];
    }
    return lhs - rho * deriv_chopped(inner, 1, chop);
}

NonstiffRhs rhs_nonstiff(const RelaxState& state, const FluidParams& params, double rho_floor) {
    check_state(state, rho_floor, "rhs_nonstiff");
    const TorusGrid& grid = state.rho.grid();
    const int n = grid.size();
    const double inv_eps = 1.0 / params.epsilon;
    const bool viscous = params.nu > 0.0;

    const Field u = state.m / state.rho;
    const Field ux = ddx_trunc(u);
    const Field vx = ddx_trunc(state.J / state.rho);

    Field flux_m(grid);
    Field flux_J(grid);
    for (int j = 0; j < n; ++j) {
        const double r = state.rho[j];
        const double a = r * mu_prime(r, params);
        double fm = state.m[j] * u[j] + pressure(r, params) - a * vx[j];
        if (viscous) {
            fm -= params.nu * viscous_modulus(r, params) * ux[j];
        }
        flux_m[j] = fm;
        flux_J[j] = state.J[j] * u[j] + a * ux[j];
    }

    NonstiffRhs out{ddx(state.m), ddx_trunc(flux_m), ddx_trunc(flux_J)};
    out.drho *= -inv_eps;
    out.dm *= -inv_eps;
    out.dJ *= -inv_eps;
    return out;
}

RelaxState step(const RelaxState& state, double dt, const FluidParams& params, double rho_floor,
                StepScheme scheme) {
    return step_impl(state, dt, params, rho_floor, scheme, nullptr);
}

double cfl_dt(const RelaxState& state, const SolverConfig& config) {
    const FluidParams& params = config.params;
    const double dx = state.rho.grid().dx();
    const double eps = params.epsilon;
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double wave = 0.0;
    double disp = 0.0;
    double visc = 0.0;
    for (int j = 0; j < state.rho.size(); ++j) {
        const double r = state.rho[j];
        wave = std::max(wave, std::abs(state.m[j] / r) + std::sqrt(pressure_prime(r, params)));
        disp = std::max(disp, mu_prime(r, params));
        if (params.nu > 0.0) {
            visc = std::max(visc, params.nu * viscous_modulus(r, params) / r);
        }
    }
    double dt = std::numeric_limits<double>::infinity();
    if (wave > 0.0) {
        dt = std::min(dt, config.cfl_advective * eps * dx / wave);
    }
    if (disp > 0.0) {
        dt = std::min(dt, config.cfl_dispersive * eps * dx * dx / (pi2 * disp));
    }
    if (visc > 0.0) {
        dt = std::min(dt, config.cfl_viscous * eps * dx * dx / (pi2 * visc));
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ConfigError("cfl_dt: no positive stable time step");
    }
    return dt;
}

RelaxState prepare_initial(const Field& rho0, const FluidParams& params, Preparation mode,
                           double rho_floor) {
    RelaxState s{0.0, rho0, Field(rho0.grid()), constraint_momentum(rho0, params)};
    check_state(s, rho_floor, "prepare_initial");
    if (mode == Preparation::well) {
        s.m = params.epsilon * darcy_flux(rho0, params);
    }
    return s;
}

double mass(const RelaxState& state) { return integrate(state.rho); }

double energy(const RelaxState& state, const FluidParams& params) {
    double sum = 0.0;
    for (int j = 0; j < state.rho.size(); ++j) {
        const double r = state.rho[j];
        sum += 0.5 * (state.m[j] * state.m[j] + state.J[j] * state.J[j]) / r + h_internal(r, params);
    }
    return state.rho.grid().dx() * sum;
}

double friction_dissipation(const RelaxState& state, const FluidParams& params) {
    return 2.0 * kinetic_m(state.m, state.rho) / (params.epsilon * params.epsilon);
}

double viscous_dissipation(const RelaxState& state, const FluidParams& params) {
    if (params.nu == 0.0) {
        return 0.0;
    }
    return params.nu / params.epsilon * viscous_integral(state, params);
}

double constraint_drift(const RelaxState& state, const FluidParams& params) {
    return l2_norm(state.J - constraint_momentum(state.rho, params));
}

double Trajectory::max_mass_drift() const {
    if (records.empty()) {
        return 0.0;
    }
    const double m0 = records.front().mass;
    double worst = 0.0;
    for (const auto& r : records) {
        worst = std::max(worst, std::abs(r.mass - m0) / std::abs(m0));
    }
    return worst;
}

double Trajectory::max_energy_excess_rate() const {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < records.size(); ++k) {
        const auto& a = records[k - 1];
        const auto& b = records[k];
        const double dt = b.t - a.t;
        worst = std::max(worst, ((b.energy + b.dissipated) - (a.energy + a.dissipated)) / dt);
    }
    return worst;
}

namespace {

TrajectoryRecord make_record(const RelaxState& s, const SolverConfig& config, double dissipated) {
    TrajectoryRecord r;
    r.t = s.t;
    r.mass = mass(s);
    if (config.energy_monitor) {
        r.energy = energy(s, config.params);
        r.friction_dissipation = friction_dissipation(s, config.params);
        r.viscous_dissipation = viscous_dissipation(s, config.params);
    }
    if (config.constraint_monitor) {
        r.constraint_drift = constraint_drift(s, config.params);
    }
    r.dissipated = dissipated;
    return r;
}

}  // namespace

Trajectory run(const RelaxState& initial, const SolverConfig& config, const Observer& observer,
               const StepObserver& step_observer) {
    config.validate();
    if (!(initial.rho.grid() == config.grid)) {
        throw UsageError("run: initial state grid differs from the configured grid");
    }
    Trajectory traj;
    traj.rho_floor = config.rho_floor > 0.0 ? config.rho_floor : 1e-6 * initial.rho.mean();
    check_state(initial, traj.rho_floor, "run");

    RelaxState state = initial;
    double dissipated = 0.0;
    traj.records.push_back(make_record(state, config, dissipated));
    if (config.keep_states) {
        traj.states.push_back(state);
    }
    if (observer) {
        observer(0, state);
    }

    const double t0 = initial.t;
    const int n = config.n_outputs;
    for (int k = 1; k <= n; ++k) {
        const double t_target = t0 + config.t_final * k / n;
        const double span = t_target - state.t;
        const double dt_bound = std::min(cfl_dt(state, config), config.dt_max);
        const long long nsub = std::max(1LL, static_cast<long long>(std::ceil(span / dt_bound - 1e-9)));
        const double dt = span / static_cast<double>(nsub);
        for (long long i = 0; i < nsub; ++i) {
            try {
                state = step_impl(state, dt, config.params, traj.rho_floor, config.scheme, &dissipated);
            } catch (const NumericalAbort&) {
                if (!config.dump_path.empty()) {
                    write_snapshot(state, config.dump_path);
                }
                throw;
            }
            if (step_observer) {
                if (i + 1 == nsub) {
                    state.t = t_target;
                }
                step_observer(k, state);
            }
        }
        traj.steps += nsub;
        state.t = t_target;
        traj.records.push_back(make_record(state, config, dissipated));
        if (config.keep_states) {
            traj.states.push_back(state);
        }
        if (observer) {
            observer(k, state);
        }
    }
    return traj;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << "t,mass,energy,friction_dissipation,viscous_dissipation,constraint_drift\n";
    out << std::setprecision(17);
    for (const auto& r : traj.records) {
        out << r.t << ',' << r.mass << ',' << r.energy << ',' << r.friction_dissipation << ','
            << r.viscous_dissipation << ',' << r.constraint_drift << '\n';
    }
}

void write_snapshot(const RelaxState& state, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << std::setprecision(17);
    out << state.rho.size() << ' ' << state.rho.grid().length() << ' ' << state.t << '\n';
    for (const Field* f : {&state.rho, &state.m, &state.J}) {
        for (double v : f->values()) {
            out << v << '\n';
        }
    }
}

RelaxState read_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read " + path);
    }
    int n = 0;
    double length = 0.0;
    double t = 0.0;
    in >> n >> length >> t;
    const TorusGrid grid(n, length);
    RelaxState s{t, Field(grid), Field(grid), Field(grid)};
    for (Field* f : {&s.rho, &s.m, &s.J}) {
        for (double& v : f->values()) {
            if (!(in >> v)) {
                throw std::runtime_error("truncated snapshot " + path);
            }
        }
    }
    return s;
}

}  // namespace ekrelax
