#pragma once

// Experiment configuration: flat "key = value" text with dotted keys, '#'
// starts a comment. Unknown keys are rejected.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ekrelax/constitutive.hpp"
#include "ekrelax/relax_solver.hpp"

namespace ekrelax {

enum class ModelType { ek, nsk };

/// One viscosity series: either a fixed nu or nu = coeff * eps^power.
struct NuSpec {
    double value = 0.0;
    double coeff = 1.0;
    double power = 0.0;
    bool eps_power = false;

    double at(double eps) const;
    std::string label() const;
};

struct ExperimentConfig {
    ModelType model = ModelType::ek;
    double gamma = 2.0;
    double s = 0.0;
    std::vector<NuSpec> nu{NuSpec{}};
    LameMode lame_mode = LameMode::match_capillarity;
    PowerLawCoefficient lame_mu{1.0, 1.0};
    PowerLawCoefficient lame_lambda{0.0, 1.0};

    std::vector<double> epsilon{0.4, 0.2, 0.1, 0.05};
    int workers = 0;  ///< 0: hardware concurrency

    int n = 256;
    double length = 6.283185307179586;

    double rho_mean = 2.0;
    double amplitude = 0.5;
    int wavenumber = 1;
    double delta = 1e-3;
    Preparation prepared = Preparation::well;

    double t_final = 0.3;
    int outputs = 60;

    double cfl_advective = 0.5;
    double cfl_dispersive = 0.5;
    double cfl_viscous = 0.5;
    double dt_max = 0.0;  ///< 0: unbounded
    StepScheme scheme = StepScheme::integrating_factor;

    /// Equilibrium nodes per output interval.
    int equilibrium_refine = 80;
    int equilibrium_levels = 4;
    int equilibrium_substeps = 2;
    double equilibrium_margin = 0.5;

    double tol_slack = 1e-6;
    std::string out_dir = "out";

    /// Throws ConfigError.
    void validate() const;

    FluidParams fluid(double eps, double nu_value) const;
    /// rho_mean + amplitude cos(wavenumber x 2 pi / length)
    Field initial_density() const;
};

/// Key/value pairs in file order; throws ConfigError on malformed lines or
/// repeated keys, std::runtime_error if the file cannot be read.
std::vector<std::pair<std::string, std::string>> read_key_values(const std::string& path);
std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text,
                                                                  const std::string& origin = "<text>");

/// Sets one key; throws ConfigError for unknown keys or bad values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

ExperimentConfig load_config(const std::string& path);

/// Canonical "key = value" rendering; load(render(c)) == c.
std::string render_config(const ExperimentConfig& config);

/// Keys accepted by apply_setting.
const std::vector<std::string>& config_keys();

}  // namespace ekrelax
