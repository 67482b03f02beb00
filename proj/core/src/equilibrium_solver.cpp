#include "ekrelax/equilibrium_solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "ekrelax/errors.hpp"
#include "ekrelax/relax_solver.hpp"

namespace ekrelax {

namespace {

void check_density(const Field& rho, double floor, double t, const char* where) {
    if (!rho.all_finite()) {
        std::ostringstream os;
        os << where << ": non-finite density at t = " << t;
        throw NumericalAbort(os.str(), t);
    }
    const double rmin = rho.min();
    if (rmin < floor || !(rmin > 0.0)) {
        std::ostringstream os;
        os << where << ": density " << rmin << " below " << floor << " at t = " << t;
        throw NumericalAbort(os.str(), t);
    }
}

}  // namespace

Field m_bar(const EquilibriumState& eq, const FluidParams& params) {
    return params.epsilon * darcy_flux(eq.rho_bar, params);
}

Field u_bar(const EquilibriumState& eq, const FluidParams& params) { return m_bar(eq, params) / eq.rho_bar; }

Field J_bar(const EquilibriumState& eq, const FluidParams& params) {
    return constraint_momentum(eq.rho_bar, params);
}

Field v_bar(const EquilibriumState& eq, const FluidParams& params) { return J_bar(eq, params) / eq.rho_bar; }

Field gf_rhs(const Field& rho_bar, const FluidParams& params, double chop) {
    check_density(rho_bar, 0.0, 0.0, "gf_rhs");
    return -deriv_chopped(darcy_flux(rho_bar, params, chop), 1, chop);
}

Field gf_rhs_bohm_form(const Field& rho_bar, const FluidParams& params, double chop) {
    check_density(rho_bar, 0.0, 0.0, "gf_rhs_bohm_form");
    const Field rx = deriv_chopped(rho_bar, 1, chop);
    const Field rxx = deriv_chopped(rho_bar, 2, chop);
    Field chem(rho_bar.grid());
    for (int j = 0; j < rho_bar.size(); ++j) {
        const double r = rho_bar[j];
        chem[j] = h_prime(r, params) - capillarity_k(r, params) * rxx[j] -
                  0.5 * capillarity_k_prime(r, params) * rx[j] * rx[j];
    }
    return deriv_chopped(rho_bar * deriv_chopped(chem, 1, chop), 1, chop);
}

double stabilization_constant(const Field& rho_bar, const FluidParams& params, double margin) {
    double a = 0.0;
    for (double r : rho_bar.values()) {
        a = std::max(a, r * capillarity_k(r, params));
    }
    return a * (1.0 + margin);
}

Field step_semi_implicit(const Field& rho_bar, double dt, const FluidParams& params, double margin,
                         double rho_floor) {
    return step_semi_implicit_fixed(rho_bar, dt, stabilization_constant(rho_bar, params, margin), params,
                                    rho_floor);
}

Field step_semi_implicit_fixed(const Field& rho_bar, double dt, double A, const FluidParams& params,
                               double rho_floor) {
    if (!(dt > 0.0)) {
        throw UsageError("step_semi_implicit: dt must be > 0");
    }
    const TorusGrid& grid = rho_bar.grid();
    auto& ws = SpectralWorkspace::for_grid(grid);
    std::vector<std::complex<double>> g_hat;
    ws.forward(gf_rhs(rho_bar, params).values(), g_hat);
    // rho_hat^{n+1} = rho_hat^n + dt g_hat / (1 + dt A xi^4)
    for (std::size_t j = 0; j < g_hat.size(); ++j) {
        const double xi = grid.wavenumber(static_cast<int>(j));
        g_hat[j] *= dt / (1.0 + dt * A * xi * xi * xi * xi);
    }
    Field out(grid);
    ws.inverse(g_hat, out.values());
    out += rho_bar;
    check_density(out, rho_floor, 0.0, "step_semi_implicit");
    return out;
}

Field error_term_scaled(const Field& rho_bar, const FluidParams& params) {
    const Field G = darcy_flux(rho_bar, params);
    return deriv_dealiased(G * G / rho_bar, 1) + darcy_flux_derivative(rho_bar, gf_rhs(rho_bar, params), params);
}

Field error_term(const Field& rho_bar, const FluidParams& params) {
    return params.epsilon * error_term_scaled(rho_bar, params);
}

double free_energy(const Field& rho_bar, const FluidParams& params) {
    const Field rx = deriv(rho_bar, 1);
    double sum = 0.0;
    for (int j = 0; j < rho_bar.size(); ++j) {
        const double r = rho_bar[j];
        sum += h_internal(r, params) + 0.5 * capillarity_k(r, params) * rx[j] * rx[j];
    }
    return rho_bar.grid().dx() * sum;
}

void EquilibriumConfig::validate() const {
    params.validate();
    std::ostringstream os;
    if (!(t_final > 0.0) || !std::isfinite(t_final)) {
        os << "equilibrium t_final must be > 0, got " << t_final;
    } else if (n_outputs < 1) {
        os << "equilibrium n_outputs must be >= 1, got " << n_outputs;
    } else if (!(margin >= 0.0)) {
        os << "stabilization margin must be >= 0, got " << margin;
    } else if (base_substeps < 1) {
        os << "equilibrium base_substeps must be >= 1, got " << base_substeps;
    } else if (richardson_levels < 1 || richardson_levels > 8) {
        os << "richardson_levels must be in 1..8, got " << richardson_levels;
    } else if (rho_min < 0.0) {
        os << "rho_min must be >= 0, got " << rho_min;
    }
    if (!os.str().empty()) {
        throw ConfigError(os.str());
    }
}

double EquilibriumTrajectory::max_mass_drift() const {
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

double EquilibriumTrajectory::max_free_energy_increase() const {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < records.size(); ++k) {
        worst = std::max(worst, records[k].free_energy - records[k - 1].free_energy);
    }
    return worst;
}

EquilibriumTrajectory run_equilibrium(const Field& rho0, const EquilibriumConfig& config) {
    config.validate();
    if (!(rho0.grid() == config.grid)) {
        throw UsageError("run_equilibrium: initial density grid differs from the configured grid");
    }
    const FluidParams& params = config.params;
    const double floor = config.rho_min > 0.0 ? config.rho_min : 1e-6 * rho0.mean();
    check_density(rho0, floor, 0.0, "run_equilibrium");

    EquilibriumTrajectory traj;
    Field rho = rho0;
    auto record = [&](double t) {
        traj.records.push_back({t, integrate(rho), free_energy(rho, params)});
        if (config.keep_states) {
            traj.states.push_back({t, rho});
        }
    };
    record(0.0);

    const int levels = config.richardson_levels;
    std::vector<Field> table;
    for (int k = 1; k <= config.n_outputs; ++k) {
        const double t_prev = config.t_final * (k - 1) / config.n_outputs;
        const double t_next = config.t_final * k / config.n_outputs;
        const double span = t_next - t_prev;
        const double A = stabilization_constant(rho, params, config.margin);

        // table[i] holds the i-th column entry of the current row
        table.clear();
        for (int level = 0; level < levels; ++level) {
            const int nsub = config.base_substeps << level;
            const double dt = span / nsub;
            Field y = rho;
            for (int i = 0; i < nsub; ++i) {
                try {
                    y = step_semi_implicit_fixed(y, dt, A, params, floor);
                } catch (const NumericalAbort& e) {
                    throw NumericalAbort(e.what(), t_prev + i * dt);
                }
            }
            traj.steps += nsub;
            // eliminate error orders 1..level of the first-order scheme
            std::vector<Field> row{y};
            for (int j = 1; j <= level; ++j) {
                const double f = std::ldexp(1.0, j);
                row.push_back((f * row[j - 1] - table[j - 1]) * (1.0 / (f - 1.0)));
            }
            table = std::move(row);
        }
        rho = table.back();
        check_density(rho, floor, t_next, "run_equilibrium");
        record(t_next);
    }
    return traj;
}

void write_equilibrium_csv(const EquilibriumTrajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << "t,mass,free_energy\n" << std::setprecision(17);
    for (const auto& r : traj.records) {
        out << r.t << ',' << r.mass << ',' << r.free_energy << '\n';
    }
}

EquilibriumTrack::EquilibriumTrack(const EquilibriumTrajectory& traj, const FluidParams& params) {
    if (traj.states.size() < 4) {
        throw UsageError("EquilibriumTrack: needs at least four stored states");
    }
    t0_ = traj.states.front().t;
    h_ = (traj.states.back().t - t0_) / static_cast<double>(traj.states.size() - 1);
    for (const auto& st : traj.states) {
        rho_.push_back(st.rho_bar);
        gf_.push_back(gf_rhs(st.rho_bar, params));
        e_hat_.push_back(error_term_scaled(st.rho_bar, params));
    }
}

int EquilibriumTrack::interval(double t) const {
    const int last = nodes() - 1;
    const int k = static_cast<int>(std::ceil((t - t0_) / h_ - 1e-9));
    return std::clamp(k, 1, last);
}

Field EquilibriumTrack::rho_bar_at(double t) const {
    const int k = interval(t);
    const double th = std::clamp((t - t0_ - (k - 1) * h_) / h_, 0.0, 1.0);
    if (th == 1.0) {
        return rho_[k];
    }
    if (th == 0.0) {
        return rho_[k - 1];
    }
    const double t2 = th * th;
    const double t3 = t2 * th;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + th;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    Field out(rho_[k].grid());
    const Field& a = rho_[k - 1];
    const Field& b = rho_[k];
    const Field& ga = gf_[k - 1];
    const Field& gb = gf_[k];
    for (int j = 0; j < out.size(); ++j) {
        out[j] = h00 * a[j] + h01 * b[j] + h_ * (h10 * ga[j] + h11 * gb[j]);
    }
    return out;
}

Field EquilibriumTrack::e_hat_at(double t) const {
    const double x = (t - t0_) / h_;
    const int near = static_cast<int>(std::lround(x));
    if (std::abs(x - near) < 1e-9 && near >= 0 && near < nodes()) {
        return e_hat_[near];
    }
    const int k = interval(t);
    const int i0 = std::clamp(k - 2, 0, nodes() - 4);
    const double xi = x - i0;
    Field out(e_hat_[0].grid());
    for (int i = 0; i < 4; ++i) {
        double w = 1.0;
        for (int j = 0; j < 4; ++j) {
            if (j != i) {
                w *= (xi - j) / static_cast<double>(i - j);
            }
        }
        const Field& e = e_hat_[i0 + i];
        for (int n = 0; n < out.size(); ++n) {
            out[n] += w * e[n];
        }
    }
    return out;
}

}  // namespace ekrelax
