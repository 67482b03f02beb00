#pragma once

// Self-checks run by the `check` subcommand: identities of the constitutive
// family and the spectral operators, conservation and dissipation of the
// solvers, and the sampled lemma constant.

#include <string>
#include <vector>

#include "ekrelax/config.hpp"

namespace ekrelax {

struct PropertyResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

/// h'' = p'/rho, mu'^2 = rho k, lambda = (s+1) mu, p_rel = (gamma-1) h_rel
/// on 100 points each for several (gamma, s).
PropertyResult check_constitutive_identities();
/// bohm_residual of 2 + cos x at N = 256 for s in {-1, 0, 1}.
PropertyResult check_bohm_identity();
/// gf_rhs against gf_rhs_bohm_form.
PropertyResult check_dual_gradient_flow();
/// Mass drift of both solvers and the energy balance of the relaxation
/// solver at eps = 0.2 with nu = 0 and nu = 0.1, grid and data from config.
PropertyResult check_conservation(const ExperimentConfig& config);
/// Final constraint drift at eps = 0.2 with a fixed dt and with dt / 2.
PropertyResult check_constraint_drift(const ExperimentConfig& config);
/// Lemma-ratio constant fitted on 10^4 tensor points, tested on 10^4 midpoints.
PropertyResult check_lemma_sampling();
/// mu_identity_residual at N = 256 for s in {-1, 0, 1}.
PropertyResult check_mu_identity();

/// All of the above; the two solver checks only when with_runs is set.
std::vector<PropertyResult> run_property_suite(const ExperimentConfig& config, bool with_runs = true);

}  // namespace ekrelax
