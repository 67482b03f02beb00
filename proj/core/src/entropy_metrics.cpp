#include "ekrelax/entropy_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "ekrelax/errors.hpp"

namespace ekrelax {

namespace {

void require_compatible(const RelaxState& state, const EquilibriumFields& eq) {
    if (!(state.rho.grid() == eq.rho_bar.grid())) {
        throw UsageError("relaxation and equilibrium fields live on different grids");
    }
    if (std::abs(state.t - eq.t) > 1e-12 * std::max(1.0, std::abs(state.t))) {
        std::ostringstream os;
        os << "relaxation time " << state.t << " differs from equilibrium time " << eq.t;
        throw UsageError(os.str());
    }
}

// The limit of the lemma ratio as rho -> rho_bar: 2 rho_bar mu''^2 / h''.
double lemma_diagonal(double rho_bar, const FluidParams& params) {
    const double m2 = mu_second(rho_bar, params);
    return 2.0 * rho_bar * m2 * m2 / h_second(rho_bar, params);
}

double lemma_value(double rho, double rho_bar, const FluidParams& params) {
    if (rho == rho_bar) {
        return lemma_diagonal(rho_bar, params);
    }
    return lemma_ratio(rho, rho_bar, params);
}

}  // namespace

EquilibriumFields make_equilibrium_fields(const EquilibriumState& eq, const FluidParams& params,
                                          const Field* e_hat) {
    EquilibriumFields f{eq.t, eq.rho_bar, m_bar(eq, params), J_bar(eq, params), Field(eq.rho_bar.grid())};
    f.e_bar = e_hat != nullptr ? params.epsilon * *e_hat : error_term(eq.rho_bar, params);
    return f;
}

double EntropyBudget::rhs() const {
    return friction + conv_u + conv_v + pressure + err + mu2 + mu1 + visc_q1 + visc_q2 + visc_x1 + visc_x2;
}

Field relative_entropy_density(const RelaxState& state, const EquilibriumFields& eq, const FluidParams& params) {
    require_compatible(state, eq);
    Field out(state.rho.grid());
    for (int j = 0; j < out.size(); ++j) {
        const double r = state.rho[j];
        const double rb = eq.rho_bar[j];
        const double u = state.m[j] / r;
        const double v = state.J[j] / r;
        const double ub = eq.m_bar[j] / rb;
        const double vb = eq.J_bar[j] / rb;
        const double quad = 0.5 * r * (u - ub) * (u - ub) + 0.5 * r * (v - vb) * (v - vb) + h_rel(r, rb, params);

        const double eta = 0.5 * (state.m[j] * u + state.J[j] * v) + h_internal(r, params);
        const double eta_bar = 0.5 * (eq.m_bar[j] * ub + eq.J_bar[j] * vb) + h_internal(rb, params);
        const double eta_rho = h_prime(rb, params) - 0.5 * ub * ub - 0.5 * vb * vb;
        const double t_rho = eta_rho * (r - rb);
        const double t_m = ub * (state.m[j] - eq.m_bar[j]);
        const double t_J = vb * (state.J[j] - eq.J_bar[j]);
        const double bregman = eta - eta_bar - t_rho - t_m - t_J;

        const double scale = std::abs(eta) + std::abs(eta_bar) + std::abs(t_rho) + std::abs(t_m) + std::abs(t_J);
        if (std::abs(quad - bregman) > 1e-10 * scale) {
            std::ostringstream os;
            os << std::setprecision(17) << "relative entropy density: quadratic form " << quad
               << " and Bregman form " << bregman << " disagree at node " << j;
            throw ConsistencyError(os.str());
        }
        out[j] = quad;
    }
    return out;
}

double psi(const RelaxState& state, const EquilibriumFields& eq, const FluidParams& params) {
    return integrate(relative_entropy_density(state, eq, params));
}

EntropyBudget budget(const RelaxState& state, const EquilibriumFields& eq, const FluidParams& params) {
    require_compatible(state, eq);
    const double eps = params.epsilon;
    const double nu = params.nu;
    const Field& rho = state.rho;
    const Field& rb = eq.rho_bar;

    const Field u = state.m / rho;
    const Field v = state.J / rho;
    const Field ub = eq.m_bar / rb;
    const Field vb = eq.J_bar / rb;
    const Field d = u - ub;
    const Field w = v - vb;
    const Field ub_x = deriv(ub, 1);
    const Field ub_xx = deriv(ub, 2);
    const Field vb_x = deriv(vb, 1);
    const Field vb_xx = deriv(vb, 2);
    const Field rho_x = deriv(rho, 1);
    const Field rb_x = deriv(rb, 1);
    const Field d_x = deriv(d, 1);

    double friction = 0.0;
    double conv_u = 0.0;
    double conv_v = 0.0;
    double pres = 0.0;
    double err = 0.0;
    double mu2 = 0.0;
    double mu1 = 0.0;
    double q1 = 0.0;
    double q2 = 0.0;
    double x1 = 0.0;
    double x2 = 0.0;
    for (int j = 0; j < rho.size(); ++j) {
        const double r = rho[j];
        friction += r * d[j] * d[j];
        // grad u_bar : (u - u_bar) (x) (u - u_bar) -> u_bar_x d^2
        conv_u += r * ub_x[j] * d[j] * d[j];
        conv_v += r * ub_x[j] * w[j] * w[j];
        // p(rho | rho_bar) div u_bar -> p_rel u_bar_x
        pres += p_rel(r, rb[j], params) * ub_x[j];
        err += eq.e_bar[j] * (r / rb[j]) * d[j];
        // (v - v_bar) . grad div u_bar - (u - u_bar) . grad div v_bar -> w u_bar_xx - d v_bar_xx
        const double cross1 = w[j] * ub_x[j] - d[j] * vb_x[j];
        const double cross2 = w[j] * ub_xx[j] - d[j] * vb_xx[j];
        mu2 += r * (mu_second(r, params) * rho_x[j] - mu_second(rb[j], params) * rb_x[j]) * cross1;
        mu1 += r * (mu_prime(r, params) - mu_prime(rb[j], params)) * cross2;
        if (nu > 0.0) {
            // |D(u - u_bar)|^2 and |div(u - u_bar)|^2 -> d_x^2; D u_bar : D(u - u_bar) -> u_bar_x d_x
            const LameValues l = lame_coefficients(r, params);
            q1 += l.mu_l * d_x[j] * d_x[j];
            q2 += l.lambda_l * d_x[j] * d_x[j];
            x1 += l.mu_l * ub_x[j] * d_x[j];
            x2 += l.lambda_l * ub_x[j] * d_x[j];
        }
    }
    const double dx = rho.grid().dx();
    EntropyBudget b;
    b.t = state.t;
    b.psi = psi(state, eq, params);
    b.friction = -dx * friction / (eps * eps);
    b.conv_u = -dx * conv_u / eps;
    b.conv_v = -dx * conv_v / eps;
    b.pressure = -dx * pres / eps;
    b.err = -dx * err;
    b.mu2 = -dx * mu2 / eps;
    b.mu1 = -dx * mu1 / eps;
    if (nu > 0.0) {
        b.visc_q1 = -2.0 * nu * dx * q1 / eps;
        b.visc_q2 = -nu * dx * q2 / eps;
        b.visc_x1 = -2.0 * nu * dx * x1 / eps;
        b.visc_x2 = -nu * dx * x2 / eps;
    }
    return b;
}

double mu_identity_residual(const Field& rho, const Field& rho_bar, const FluidParams& params) {
    auto drift = [&](const Field& r) {
        Field mu_r(r.grid());
        for (int j = 0; j < r.size(); ++j) {
            mu_r[j] = mu(r[j], params);
        }
        return deriv(mu_r, 1) / r;
    };
    const Field v = drift(rho);
    const Field vb = drift(rho_bar);
    const Field rx = deriv(rho, 1);
    const Field rbx = deriv(rho_bar, 1);
    const double c = 0.5 * (params.s + 1.0);
    double worst = 0.0;
    for (int j = 0; j < rho.size(); ++j) {
        const double lhs = mu_second(rho[j], params) * rx[j] - mu_second(rho_bar[j], params) * rbx[j];
        worst = std::max(worst, std::abs(lhs - c * (v[j] - vb[j])));
    }
    return worst;
}

InequalityReport inequality_check(const std::vector<EntropyBudget>& budgets, double eps, double tol_rel) {
    InequalityReport rep;
    if (budgets.empty()) {
        return rep;
    }
    const double psi0 = budgets.front().psi;
    rep.tol = tol_rel * std::max(psi0, eps * eps * eps * eps);
    double integral = 0.0;
    rep.slack_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < budgets.size(); ++k) {
        if (k > 0) {
            const double h = budgets[k].t - budgets[k - 1].t;
            integral += 0.5 * h * (budgets[k].rhs() + budgets[k - 1].rhs());
        }
        const double slack = psi0 + integral - budgets[k].psi;
        rep.t.push_back(budgets[k].t);
        rep.slack.push_back(slack);
        rep.slack_min = std::min(rep.slack_min, slack);
    }
    rep.passed = rep.slack_min >= -rep.tol;
    return rep;
}

void SlackTracker::add_rate(double t, double rhs) {
    if (!started_) {
        throw UsageError("SlackTracker: add_output at the initial time comes first");
    }
    integral_ += 0.5 * (t - t_prev_) * (rhs + rhs_prev_);
    t_prev_ = t;
    rhs_prev_ = rhs;
}

void SlackTracker::add_output(const EntropyBudget& b) {
    if (!started_) {
        started_ = true;
        psi0_ = b.psi;
        t_prev_ = b.t;
        rhs_prev_ = b.rhs();
        report_.tol = tol_rel_ * std::max(psi0_, eps_ * eps_ * eps_ * eps_);
        report_.slack_min = std::numeric_limits<double>::infinity();
    } else if (std::abs(b.t - t_prev_) > 1e-12 * std::max(1.0, std::abs(b.t))) {
        throw UsageError("SlackTracker: output time is not the last integration time");
    }
    const double slack = psi0_ + integral_ - b.psi;
    report_.t.push_back(b.t);
    report_.slack.push_back(slack);
    report_.slack_min = std::min(report_.slack_min, slack);
    report_.passed = report_.slack_min >= -report_.tol;
}

void write_budget_csv(const std::vector<EntropyBudget>& budgets, const InequalityReport& report,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << "t,psi,friction,conv_u,conv_v,pressure,err,mu2,mu1,visc_q1,visc_q2,visc_x1,visc_x2,slack\n";
    out << std::setprecision(17);
    for (std::size_t k = 0; k < budgets.size(); ++k) {
        const auto& b = budgets[k];
        const double slack = k < report.slack.size() ? report.slack[k] : 0.0;
        out << b.t << ',' << b.psi << ',' << b.friction << ',' << b.conv_u << ',' << b.conv_v << ','
            << b.pressure << ',' << b.err << ',' << b.mu2 << ',' << b.mu1 << ',' << b.visc_q1 << ','
            << b.visc_q2 << ',' << b.visc_x1 << ',' << b.visc_x2 << ',' << slack << '\n';
    }
}

LemmaSampling sample_lemma_constant(const FluidParams& params, double rho_bar_lo, double rho_bar_hi,
                                    double rho_lo, double rho_hi, int n) {
    if (n < 2 || !(rho_bar_lo > 0.0) || !(rho_bar_hi >= rho_bar_lo) || !(rho_lo >= 0.0) || !(rho_hi >= rho_lo)) {
        throw ConfigError("sample_lemma_constant: invalid sampling box");
    }
    LemmaSampling out;
    const double sb = (rho_bar_hi - rho_bar_lo);
    const double sr = (rho_hi - rho_lo);
    for (int i = 0; i < n; ++i) {
        const double rb = rho_bar_lo + sb * i / (n - 1);
        for (int j = 0; j < n; ++j) {
            const double r = rho_lo + sr * j / (n - 1);
            out.c_train = std::max(out.c_train, lemma_value(r, rb, params));
        }
    }
    for (int i = 0; i < n; ++i) {
        const double rb = rho_bar_lo + sb * (i + 0.5) / n;
        for (int j = 0; j < n; ++j) {
            const double r = rho_lo + sr * (j + 0.5) / n;
            const double value = lemma_value(r, rb, params);
            if (value > out.test_max) {
                out.test_max = value;
                out.argmax_rho = r;
                out.argmax_rho_bar = rb;
            }
        }
    }
    out.holds = out.test_max <= out.c_train;
    return out;
}

}  // namespace ekrelax
