#pragma once

// Limiting gradient flow
//
//   rho_t = -(G(rho))_x,   G = -p(rho)_x + S1(rho)_x
//
// and the equilibrium fields m_bar = eps G, J_bar = mu(rho_bar)_x and
// e_bar = (1/eps)(m_bar^2/rho_bar)_x + (m_bar)_t.

#include <string>
#include <vector>

#include "ekrelax/constitutive.hpp"
#include "ekrelax/torus_grid.hpp"

namespace ekrelax {

struct EquilibriumState {
    double t = 0.0;
    Field rho_bar;
};

Field m_bar(const EquilibriumState& eq, const FluidParams& params);
Field u_bar(const EquilibriumState& eq, const FluidParams& params);
Field J_bar(const EquilibriumState& eq, const FluidParams& params);
Field v_bar(const EquilibriumState& eq, const FluidParams& params);

/// -(G(rho_bar))_x, sharing the stress code path with the relaxation solver.
Field gf_rhs(const Field& rho_bar, const FluidParams& params, double chop = 0.0);

/// (rho_bar (h'(rho_bar) - k rho_bar_xx - k' rho_bar_x^2 / 2)_x)_x
Field gf_rhs_bohm_form(const Field& rho_bar, const FluidParams& params, double chop = 0.0);

/// max(rho_bar k(rho_bar)) (1 + margin)
double stabilization_constant(const Field& rho_bar, const FluidParams& params, double margin = 0.5);

/// (1 + dt A xi^4) rho^{n+1} = rho^n + dt (gf + A xi^4 rho^n), diagonal in
/// Fourier space. Throws NumericalAbort if the result drops below rho_floor.
Field step_semi_implicit(const Field& rho_bar, double dt, const FluidParams& params,
                         double margin = 0.5, double rho_floor = 0.0);
Field step_semi_implicit_fixed(const Field& rho_bar, double dt, double A, const FluidParams& params,
                               double rho_floor = 0.0);

/// (G^2/rho_bar)_x + DG[rho_bar](gf_rhs(rho_bar)); independent of eps.
Field error_term_scaled(const Field& rho_bar, const FluidParams& params);

/// eps * error_term_scaled
Field error_term(const Field& rho_bar, const FluidParams& params);

/// int (h(rho) + k(rho) rho_x^2 / 2) dx
double free_energy(const Field& rho_bar, const FluidParams& params);

struct EquilibriumConfig {
    FluidParams params;
    TorusGrid grid;
    double t_final = 0.3;
    int n_outputs = 60;
    /// Lower bound delta; 0 selects 1e-6 * mean(rho0).
    double rho_min = 0.0;
    double margin = 0.5;
    /// Substeps of the coarsest level per output interval.
    int base_substeps = 4;
    /// Levels of the Richardson table (each halves the step); 1 disables it.
    int richardson_levels = 4;
    bool keep_states = true;

    void validate() const;
};

struct EquilibriumRecord {
    double t = 0.0;
    double mass = 0.0;
    double free_energy = 0.0;
};

struct EquilibriumTrajectory {
    std::vector<EquilibriumRecord> records;
    std::vector<EquilibriumState> states;
    long long steps = 0;

    double max_mass_drift() const;
    /// max_k E(t_{k+1}) - E(t_k)
    double max_free_energy_increase() const;
};

/// Advances each output interval with the stabilized step at several step
/// sizes and combines them in a Richardson table.
EquilibriumTrajectory run_equilibrium(const Field& rho0, const EquilibriumConfig& config);

void write_equilibrium_csv(const EquilibriumTrajectory& traj, const std::string& path);

/// Equilibrium states on a uniform node grid in t together with gf_rhs and
/// error_term_scaled at every node. Between nodes rho_bar is the cubic
/// Hermite interpolant (slopes from gf_rhs) and e_hat the cubic Lagrange
/// interpolant through four neighbouring nodes; at nodes both are the
/// stored values.
class EquilibriumTrack {
public:
    EquilibriumTrack(const EquilibriumTrajectory& traj, const FluidParams& params);

    int nodes() const { return static_cast<int>(rho_.size()); }
    double spacing() const { return h_; }
    const Field& rho_bar_node(int i) const { return rho_[i]; }
    const Field& e_hat_node(int i) const { return e_hat_[i]; }

    Field rho_bar_at(double t) const;
    Field e_hat_at(double t) const;

private:
    double t0_ = 0.0;
    double h_ = 0.0;
    std::vector<Field> rho_;
    std::vector<Field> gf_;
    std::vector<Field> e_hat_;

    int interval(double t) const;
};

}  // namespace ekrelax
