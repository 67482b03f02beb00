#pragma once

// eps (and nu) sweeps against one shared equilibrium trajectory, rate
// fitting and the Hilbert-expansion orders.

#include <string>
#include <utility>
#include <vector>

#include "ekrelax/config.hpp"
#include "ekrelax/entropy_metrics.hpp"
#include "ekrelax/relax_solver.hpp"

namespace ekrelax {

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  ///< max |log residual|
};

/// Least squares on (log eps, log value). Needs >= 3 points with value > 0;
/// throws DomainError otherwise.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points);

struct RunRecord {
    double epsilon = 0.0;
    double nu = 0.0;
    int series = 0;  ///< index into ExperimentConfig::nu
    bool completed = false;
    std::string error;

    double sup_psi = 0.0;
    double psi0 = 0.0;
    double slack_min = 0.0;
    double tol_slack = 0.0;
    /// ||m(T)||_2
    double m_norm = 0.0;
    /// ||m(T) - eps G(rho_bar(T))||_2
    double m_darcy_diff = 0.0;
    /// ||sqrt(rho) (u - u_bar)(T)||_2
    double velocity_diff = 0.0;
    double constraint_drift = 0.0;
    double mass_drift = 0.0;
    double energy_excess_rate = 0.0;
    long long steps = 0;
    double wall_time = 0.0;  ///< seconds; not part of the deterministic outputs

    std::vector<EntropyBudget> budgets;
    InequalityReport inequality;
};

struct SeriesSummary {
    int series = 0;
    std::string nu_label;
    bool complete = false;
    RateFit fit;  ///< log sup Psi against log eps; zero unless complete
    /// max over eps of sup Psi / (Psi(0) + eps^4 [+ nu eps])
    double c_emp = 0.0;
    /// max / min of that ratio over eps
    double c_spread = 0.0;
    double expected_slope = 4.0;
};

struct SweepResult {
    bool complete = false;
    std::vector<RunRecord> records;  ///< descending eps, then series
    std::vector<SeriesSummary> series;
    double equilibrium_mass_drift = 0.0;
    double equilibrium_energy_increase = 0.0;
    double equilibrium_wall_time = 0.0;
};

/// Runs every (eps, nu) pair on a worker pool. A failed run is kept with
/// completed = false and its error message; the sweep is then incomplete.
/// Throws ConfigError for invalid configs and NumericalAbort if the
/// equilibrium itself fails.
SweepResult run_sweep(const ExperimentConfig& config);

/// Computes c_emp and, for complete series, the rate fit.
std::vector<SeriesSummary> summarize(const ExperimentConfig& config, const std::vector<RunRecord>& records);

struct HilbertSeries {
    int series = 0;
    bool complete = false;
    RateFit m_norm;
    RateFit m_darcy_diff;
    RateFit velocity_diff;
};

/// Slopes of the three end-time norms against eps, per nu series. A series
/// with a zero norm (constant data) reports a zero fit.
std::vector<HilbertSeries> hilbert_orders(const SweepResult& result);
std::vector<HilbertSeries> hilbert_orders(const ExperimentConfig& config);

}  // namespace ekrelax
