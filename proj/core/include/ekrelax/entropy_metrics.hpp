#pragma once

// Relative entropy between a relaxation state U = (rho, m, J) and the
// equilibrium fields (rho_bar, m_bar, J_bar):
//
//   eta(U | U_bar) = rho |u - u_bar|^2 / 2 + rho |v - v_bar|^2 / 2 + h(rho | rho_bar)
//   Psi(t) = int eta dx
//
// and the terms bounding dPsi/dt, written out for one space dimension
// (d = u - u_bar, w = v - v_bar).

#include <string>
#include <vector>

#include "ekrelax/constitutive.hpp"
#include "ekrelax/equilibrium_solver.hpp"
#include "ekrelax/relax_solver.hpp"
#include "ekrelax/torus_grid.hpp"

namespace ekrelax {

/// Equilibrium fields at one instant for a given eps.
struct EquilibriumFields {
    double t = 0.0;
    Field rho_bar;
    Field m_bar;
    Field J_bar;
    Field e_bar;
};

/// e_hat, when given, is the eps-free error_term_scaled(rho_bar) and saves
/// recomputing it per eps.
EquilibriumFields make_equilibrium_fields(const EquilibriumState& eq, const FluidParams& params,
                                          const Field* e_hat = nullptr);

struct EntropyBudget {
    double t = 0.0;
    double psi = 0.0;
    double friction = 0.0;  ///< -(1/eps^2) int rho d^2
    double conv_u = 0.0;    ///< -(1/eps) int rho u_bar_x d^2
    double conv_v = 0.0;    ///< -(1/eps) int rho u_bar_x w^2
    double pressure = 0.0;  ///< -(1/eps) int p(rho | rho_bar) u_bar_x
    double err = 0.0;       ///< -int e_bar (rho / rho_bar) d
    double mu2 = 0.0;       ///< -(1/eps) int rho (mu''(rho) rho_x - mu''(rho_bar) rho_bar_x)(w u_bar_x - d v_bar_x)
    double mu1 = 0.0;       ///< -(1/eps) int rho (mu'(rho) - mu'(rho_bar))(w u_bar_xx - d v_bar_xx)
    double visc_q1 = 0.0;   ///< -(2 nu/eps) int mu_L d_x^2
    double visc_q2 = 0.0;   ///< -(nu/eps) int lambda_L d_x^2
    double visc_x1 = 0.0;   ///< -(2 nu/eps) int mu_L u_bar_x d_x
    double visc_x2 = 0.0;   ///< -(nu/eps) int lambda_L u_bar_x d_x

    double rhs() const;
};

/// Throws UsageError on mismatched grids or times.
double psi(const RelaxState& state, const EquilibriumFields& eq, const FluidParams& params);

/// Quadratic form of eta, checked pointwise against the Bregman expansion
/// eta(U) - eta(U_bar) - D eta(U_bar)(U - U_bar); throws ConsistencyError if
/// they differ by more than 1e-10 of the magnitude of the expansion terms.
Field relative_entropy_density(const RelaxState& state, const EquilibriumFields& eq, const FluidParams& params);

EntropyBudget budget(const RelaxState& state, const EquilibriumFields& eq, const FluidParams& params);

/// max | mu''(rho) rho_x - mu''(rho_bar) rho_bar_x - ((s+1)/2)(v - v_bar) |
/// with v = mu(rho)_x / rho.
double mu_identity_residual(const Field& rho, const Field& rho_bar, const FluidParams& params);

struct InequalityReport {
    std::vector<double> t;
    std::vector<double> slack;  ///< Psi(0) + int_0^t RHS - Psi(t), trapezoid in t
    double slack_min = 0.0;
    double tol = 0.0;
    bool passed = true;
};

/// tol = tol_rel * max(Psi(0), eps^4)
InequalityReport inequality_check(const std::vector<EntropyBudget>& budgets, double eps, double tol_rel = 1e-6);

/// Running form of the check. add_rate() feeds the integrand at every
/// solver step (trapezoid between consecutive calls); add_output() records
/// Psi at a synchronized output time, which must coincide with the last
/// add_rate() time.
class SlackTracker {
public:
    SlackTracker(double eps, double tol_rel = 1e-6) : eps_(eps), tol_rel_(tol_rel) {}

    void add_rate(double t, double rhs);
    void add_output(const EntropyBudget& b);
    const InequalityReport& report() const { return report_; }

private:
    double eps_;
    double tol_rel_;
    bool started_ = false;
    double psi0_ = 0.0;
    double t_prev_ = 0.0;
    double rhs_prev_ = 0.0;
    double integral_ = 0.0;
    InequalityReport report_;
};

void write_budget_csv(const std::vector<EntropyBudget>& budgets, const InequalityReport& report,
                      const std::string& path);

struct LemmaSampling {
    double c_train = 0.0;
    double test_max = 0.0;
    double argmax_rho = 0.0;
    double argmax_rho_bar = 0.0;
    bool holds = false;
};

/// Largest rho |mu'(rho) - mu'(rho_bar)|^2 / h(rho | rho_bar) on an
/// n x n tensor grid with endpoints (the diagonal uses the rho -> rho_bar
/// limit), then checked on the n x n cell-midpoint grid.
LemmaSampling sample_lemma_constant(const FluidParams& params, double rho_bar_lo, double rho_bar_hi,
                                    double rho_lo, double rho_hi, int n = 100);

}  // namespace ekrelax
