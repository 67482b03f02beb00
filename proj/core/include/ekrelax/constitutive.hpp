#pragma once

// Power-law constitutive family for the Euler-Korteweg / Navier-Stokes-Korteweg
// systems:
//
//   p(rho) = rho^gamma,            h(rho) = rho^gamma / (gamma - 1)
//   k(rho) = ((s+3)^2 / 4) rho^s,  mu(rho) = rho^((s+3)/2),  mu'^2 = rho k
//   lambda(rho) = 2 (rho mu'(rho) - mu(rho)) = (s+1) mu(rho)
//
// with gamma > 1, s >= -1 and s + 2 <= gamma.

#include <cmath>

namespace ekrelax {

enum class LameMode { match_capillarity, custom };

/// c * rho^exponent
struct PowerLawCoefficient {
    double coeff = 1.0;
    double exponent = 1.0;

    double operator()(double rho) const;
};

struct FluidParams {
    double gamma = 2.0;
    double s = 0.0;
    double epsilon = 0.1;
    double nu = 0.0;  ///< 0 selects Euler-Korteweg
    LameMode lame_mode = LameMode::match_capillarity;
    PowerLawCoefficient lame_mu{1.0, 1.0};      ///< used in custom mode only
    PowerLawCoefficient lame_lambda{0.0, 1.0};  ///< used in custom mode only

    /// Throws ConfigError on any violated invariant, including Lame
    /// admissibility at a set of probe densities.
    void validate() const;
};

/// x^e with exact fast paths for small integer and half-integer exponents.
/// Deterministic; agrees with std::pow to a few ulp.
double fast_pow(double x, double e);

// Pressure and internal energy. All throw DomainError for rho < 0.
double pressure(double rho, const FluidParams& params);
double pressure_prime(double rho, const FluidParams& params);
double h_internal(double rho, const FluidParams& params);
double h_prime(double rho, const FluidParams& params);
double h_second(double rho, const FluidParams& params);

/// h(rho) - h(rho_bar) - h'(rho_bar)(rho - rho_bar), evaluated without
/// cancellation near rho = rho_bar. Requires rho >= 0, rho_bar > 0.
double h_rel(double rho, double rho_bar, const FluidParams& params);

/// p(rho) - p(rho_bar) - p'(rho_bar)(rho - rho_bar).
double p_rel(double rho, double rho_bar, const FluidParams& params);

struct CapillarityValues {
    double k;
    double k_prime;
    double mu;
    double mu_prime;
    double mu_second;
    double lambda;
};

// Capillarity family. Singular entries (k, k', mu'') at rho = 0 with s < 0
// throw SingularInputError.
double capillarity_k(double rho, const FluidParams& params);
double capillarity_k_prime(double rho, const FluidParams& params);
double mu(double rho, const FluidParams& params);
double mu_prime(double rho, const FluidParams& params);
double mu_second(double rho, const FluidParams& params);
/// 2 (rho mu'(rho) - mu(rho)), from its definition.
double lambda_cap(double rho, const FluidParams& params);

CapillarityValues capillarity_family(double rho, const FluidParams& params);

struct LameValues {
    double mu_l;
    double lambda_l;
};

/// (mu_L, lambda_L): (mu, lambda) in match_capillarity mode, the user power
/// laws in custom mode.
LameValues lame_coefficients(double rho, const FluidParams& params);

/// 2 mu_L + lambda_L; the 1-D viscous modulus.
double viscous_modulus(double rho, const FluidParams& params);

/// rho |mu'(rho) - mu'(rho_bar)|^2 / h(rho | rho_bar).
/// Throws UndefinedRatioError when rho == rho_bar.
double lemma_ratio(double rho, double rho_bar, const FluidParams& params);

}  // namespace ekrelax
