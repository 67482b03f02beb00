#include "ekrelax/constitutive.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "ekrelax/errors.hpp"

namespace ekrelax {

namespace {

double ipow(double x, int n) {
    if (n < 0) {
        return 1.0 / ipow(x, -n);
    }
    double result = 1.0;
    double base = x;
    while (n > 0) {
        if (n & 1) {
            result *= base;
        }
        base *= base;
        n >>= 1;
    }
    return result;
}

void require_nonnegative(double rho, const char* what) {
    if (!(rho >= 0.0)) {
        std::ostringstream os;
        os << what << ": density must be >= 0, got " << rho;
        throw DomainError(os.str());
    }
}

void require_positive(double rho, const char* what) {
    if (!(rho > 0.0)) {
        std::ostringstream os;
        os << what << ": reference density must be > 0, got " << rho;
        throw DomainError(os.str());
    }
}

void require_regular(double rho, double exponent, const char* what) {
    if (rho == 0.0 && exponent < 0.0) {
        std::ostringstream os;
        os << what << ": singular at rho = 0 (exponent " << exponent << ")";
        throw SingularInputError(os.str());
    }
}

// phi = (1 + delta)^g - 1 - g delta >= 0 for g > 1. Near delta = 0 the binomial
// series avoids the cancellation of the direct form.
double bregman_kernel(double delta, double g) {
    if (std::abs(delta) < 0.25) {
        double coeff = g * (g - 1.0) / 2.0;
        double power = delta * delta;
        double sum = 0.0;
        for (int n = 2; n < 80; ++n) {
            const double term = coeff * power;
            sum += term;
            if (term == 0.0 || std::abs(term) <= 1e-19 * std::abs(sum)) {
                break;
            }
            coeff *= (g - n) / (n + 1.0);
            power *= delta;
        }
        return std::max(sum, 0.0);
    }
    return std::max(fast_pow(1.0 + delta, g) - 1.0 - g * delta, 0.0);
}

}  // namespace

double fast_pow(double x, double e) {
    const double twice = 2.0 * e;
    if (std::abs(e) <= 16.0 && twice == std::floor(twice)) {
        const int n2 = static_cast<int>(twice);
        if (n2 % 2 == 0) {
            return ipow(x, n2 / 2);
        }
        return ipow(x, static_cast<int>(std::floor(e))) * std::sqrt(x);
    }
    return std::pow(x, e);
}

double PowerLawCoefficient::operator()(double rho) const {
    return coeff * fast_pow(rho, exponent);
}

void FluidParams::validate() const {
    std::ostringstream os;
    if (!(gamma > 1.0)) {
        os << "gamma must be > 1, got " << gamma;
    } else if (!(s >= -1.0)) {
        os << "s must be >= -1, got " << s;
    } else if (!(s + 2.0 <= gamma)) {
        os << "s + 2 <= gamma violated (s = " << s << ", gamma = " << gamma << ")";
    } else if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        os << "epsilon must be > 0, got " << epsilon;
    } else if (!(nu >= 0.0) || !std::isfinite(nu)) {
        os << "nu must be >= 0, got " << nu;
    }
    if (!os.str().empty()) {
        throw ConfigError(os.str());
    }
    if (lame_mode == LameMode::custom) {
        // log-spaced probes over twelve decades
        for (int i = 0; i <= 120; ++i) {
            const double rho = std::pow(10.0, -6.0 + 0.1 * i);
            const LameValues l = lame_coefficients(rho, *this);
            if (!(l.mu_l >= 0.0) || !(2.0 * l.mu_l + l.lambda_l >= 0.0)) {
                os << "custom Lame coefficients not admissible at rho = " << rho
                   << " (mu_L = " << l.mu_l << ", 2 mu_L + lambda_L = "
                   << 2.0 * l.mu_l + l.lambda_l << ")";
                throw ConfigError(os.str());
            }
        }
    }
}

double pressure(double rho, const FluidParams& params) {
    require_nonnegative(rho, "pressure");
    return fast_pow(rho, params.gamma);
}

double pressure_prime(double rho, const FluidParams& params) {
    require_nonnegative(rho, "pressure_prime");
    return params.gamma * fast_pow(rho, params.gamma - 1.0);
}

double h_internal(double rho, const FluidParams& params) {
    require_nonnegative(rho, "h_internal");
    return fast_pow(rho, params.gamma) / (params.gamma - 1.0);
}

double h_prime(double rho, const FluidParams& params) {
    require_nonnegative(rho, "h_prime");
    return params.gamma / (params.gamma - 1.0) * fast_pow(rho, params.gamma - 1.0);
}

double h_second(double rho, const FluidParams& params) {
    require_nonnegative(rho, "h_second");
    require_regular(rho, params.gamma - 2.0, "h_second");
    return params.gamma * fast_pow(rho, params.gamma - 2.0);
}

double h_rel(double rho, double rho_bar, const FluidParams& params) {
    require_nonnegative(rho, "h_rel");
    require_positive(rho_bar, "h_rel");
    const double g = params.gamma;
    return fast_pow(rho_bar, g) / (g - 1.0) * bregman_kernel((rho - rho_bar) / rho_bar, g);
}

double p_rel(double rho, double rho_bar, const FluidParams& params) {
    require_nonnegative(rho, "p_rel");
    require_positive(rho_bar, "p_rel");
    const double g = params.gamma;
    return fast_pow(rho_bar, g) * bregman_kernel((rho - rho_bar) / rho_bar, g);
}

double capillarity_k(double rho, const FluidParams& params) {
    require_nonnegative(rho, "capillarity_k");
    require_regular(rho, params.s, "capillarity_k");
    const double c = (params.s + 3.0) * (params.s + 3.0) / 4.0;
    return c * fast_pow(rho, params.s);
}

double capillarity_k_prime(double rho, const FluidParams& params) {
    require_nonnegative(rho, "capillarity_k_prime");
    if (params.s == 0.0) {
        return 0.0;
    }
    require_regular(rho, params.s - 1.0, "capillarity_k_prime");
    const double c = (params.s + 3.0) * (params.s + 3.0) / 4.0;
    return c * params.s * fast_pow(rho, params.s - 1.0);
}

double mu(double rho, const FluidParams& params) {
    require_nonnegative(rho, "mu");
    return fast_pow(rho, 0.5 * (params.s + 3.0));
}

double mu_prime(double rho, const FluidParams& params) {
    require_nonnegative(rho, "mu_prime");
    const double a = 0.5 * (params.s + 3.0);
    return a * fast_pow(rho, a - 1.0);
}

double mu_second(double rho, const FluidParams& params) {
    require_nonnegative(rho, "mu_second");
    const double a = 0.5 * (params.s + 3.0);
    if (a == 1.0) {
        return 0.0;
    }
    require_regular(rho, a - 2.0, "mu_second");
    return a * (a - 1.0) * fast_pow(rho, a - 2.0);
}

double lambda_cap(double rho, const FluidParams& params) {
    return 2.0 * (rho * mu_prime(rho, params) - mu(rho, params));
}

CapillarityValues capillarity_family(double rho, const FluidParams& params) {
    return CapillarityValues{capillarity_k(rho, params),  capillarity_k_prime(rho, params),
                             mu(rho, params),             mu_prime(rho, params),
                             mu_second(rho, params),      lambda_cap(rho, params)};
}

LameValues lame_coefficients(double rho, const FluidParams& params) {
    require_nonnegative(rho, "lame_coefficients");
    if (params.lame_mode == LameMode::match_capillarity) {
        return {mu(rho, params), lambda_cap(rho, params)};
    }
    return {params.lame_mu(rho), params.lame_lambda(rho)};
}

double viscous_modulus(double rho, const FluidParams& params) {
    const LameValues l = lame_coefficients(rho, params);
    return 2.0 * l.mu_l + l.lambda_l;
}

double lemma_ratio(double rho, double rho_bar, const FluidParams& params) {
    if (rho == rho_bar) {
        throw UndefinedRatioError("lemma_ratio: rho == rho_bar; the ratio is 0/0 there");
    }
    const double diff = mu_prime(rho, params) - mu_prime(rho_bar, params);
    const double num = rho * diff * diff;
    const double den = h_rel(rho, rho_bar, params);
    if (den == 0.0) {
        throw UndefinedRatioError("lemma_ratio: relative energy underflowed to zero");
    }
    return num / den;
}

}  // namespace ekrelax
