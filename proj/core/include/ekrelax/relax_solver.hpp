#pragma once

// Scaled augmented Euler-Korteweg system in 1-D (Navier-Stokes-Korteweg when
// nu > 0), unknowns (rho, m = rho u, J = rho v):
//
//   rho_t = -(1/eps) m_x
//   m_t   = -(1/eps) (m^2/rho + p - S1 - nu (2 mu_L + lambda_L) u_x)_x - m / eps^2
//   J_t   = -(1/eps) (J m / rho + S2)_x
//
// S1 = rho mu'(rho) v_x and S2 = rho mu'(rho) u_x, since mu + lambda/2 = rho mu'
// in one dimension.

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ekrelax/constitutive.hpp"
#include "ekrelax/torus_grid.hpp"

namespace ekrelax {

struct RelaxState {
    double t = 0.0;
    Field rho;
    Field m;
    Field J;
};

struct StressPair {
    Field S1;
    Field S2;
};

enum class Preparation { well, ill };

/// strang: exact friction half steps around SSP-RK3 on the fluxes.
/// integrating_factor: SSP-RK3 on exp(t/eps^2) m (Lawson form).
enum class StepScheme { strang, integrating_factor };

struct SolverConfig {
    FluidParams params;
    TorusGrid grid;
    double t_final = 0.3;
    int n_outputs = 60;
    double cfl_advective = 0.5;
    double cfl_dispersive = 0.5;
    double cfl_viscous = 0.5;
    double dt_max = std::numeric_limits<double>::infinity();
    StepScheme scheme = StepScheme::integrating_factor;
    /// 0 selects 1e-6 * mean(rho0) at run start.
    double rho_floor = 0.0;
    bool constraint_monitor = true;
    bool energy_monitor = true;
    bool keep_states = true;
    /// Snapshot of the last good state is written here on abort, if set.
    std::string dump_path;

    void validate() const;
};

struct NonstiffRhs {
    Field drho;
    Field dm;
    Field dJ;
};

/// S1 from v = J/rho and S2 from u = m/rho, same rho mu'(rho) factor.
StressPair stresses(const RelaxState& state, const FluidParams& params);

// The functions below take a chop level for deriv_chopped. The solvers use
// chop = 0, which keeps every field a smooth function of rho; a hard
// threshold makes fields jump whenever a mode crosses it. The identity
// checks pass kRoundoffChop to compare operators below the round-off floor.

/// d/dx mu(rho): the J consistent with rho.
Field constraint_momentum(const Field& rho, const FluidParams& params, double chop = 0.0);
/// G = -p(rho)_x + S1(rho)_x with v = mu(rho)_x / rho. The well-prepared
/// momentum is eps * G.
Field darcy_flux(const Field& rho, const FluidParams& params, double chop = 0.0);
/// Directional derivative DG[rho](dir) of darcy_flux, linearized by hand.
Field darcy_flux_derivative(const Field& rho, const Field& dir, const FluidParams& params, double chop = 0.0);
/// S1(rho)_x - rho (k rho_xx + k' rho_x^2 / 2)_x
Field bohm_residual(const Field& rho, const FluidParams& params, double chop = 0.0);

NonstiffRhs rhs_nonstiff(const RelaxState& state, const FluidParams& params, double rho_floor = 0.0);

/// One step with exact treatment of the friction. Both schemes reproduce
/// m exp(-dt/eps^2) when the fluxes vanish and leave rho, J to the fluxes.
/// Throws NumericalAbort on a floor violation or non-finite values.
RelaxState step(const RelaxState& state, double dt, const FluidParams& params, double rho_floor = 0.0,
                StepScheme scheme = StepScheme::integrating_factor);

/// Largest stable step from the advective, dispersive and viscous bounds.
double cfl_dt(const RelaxState& state, const SolverConfig& config);

/// Well-prepared: m = eps G(rho0), J = mu(rho0)_x. Ill-prepared: m = 0.
RelaxState prepare_initial(const Field& rho0, const FluidParams& params,
                           Preparation mode = Preparation::well, double rho_floor = 0.0);

double mass(const RelaxState& state);
/// int (m^2/(2 rho) + J^2/(2 rho) + h(rho)) dx
double energy(const RelaxState& state, const FluidParams& params);
/// (1/eps^2) int m^2/rho dx
double friction_dissipation(const RelaxState& state, const FluidParams& params);
/// (nu/eps) int (2 mu_L + lambda_L) u_x^2 dx
double viscous_dissipation(const RelaxState& state, const FluidParams& params);
/// || J - mu(rho)_x ||_2
double constraint_drift(const RelaxState& state, const FluidParams& params);

struct TrajectoryRecord {
    double t = 0.0;
    double mass = 0.0;
    double energy = 0.0;
    double friction_dissipation = 0.0;
    double viscous_dissipation = 0.0;
    double constraint_drift = 0.0;
    /// Energy removed by friction and viscosity since t = 0, accumulated
    /// step by step (exact friction decay for strang, RK3 stage weights
    /// otherwise).
    double dissipated = 0.0;
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    std::vector<RelaxState> states;  ///< empty unless keep_states
    long long steps = 0;
    double rho_floor = 0.0;

    double max_mass_drift() const;
    /// max over output intervals of (E + D)(t_{k+1}) - (E + D)(t_k), per unit time.
    double max_energy_excess_rate() const;
};

using Observer = std::function<void(int index, const RelaxState& state)>;
/// Called after every solver step; index is that of the output interval end.
using StepObserver = std::function<void(int index, const RelaxState& state)>;

/// Integrates to t_final, landing exactly on t_k = k T / n_outputs.
Trajectory run(const RelaxState& initial, const SolverConfig& config, const Observer& observer = {},
               const StepObserver& step_observer = {});

void write_trajectory_csv(const Trajectory& traj, const std::string& path);
/// Header "N L t", then rho, m, J, one value per line.
void write_snapshot(const RelaxState& state, const std::string& path);
RelaxState read_snapshot(const std::string& path);

}  // namespace ekrelax
