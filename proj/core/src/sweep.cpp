#include "ekrelax/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "ekrelax/equilibrium_solver.hpp"
#include "ekrelax/errors.hpp"

namespace ekrelax {

RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) {
        throw DomainError("fit_rate: need at least 3 points");
    }
    const double n = static_cast<double>(points.size());
    double sx = 0.0;
    double sy = 0.0;
    for (const auto& [e, v] : points) {
        if (!(e > 0.0) || !(v > 0.0)) {
            throw DomainError("fit_rate: eps and values must be > 0");
        }
        sx += std::log(e);
        sy += std::log(v);
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& [e, v] : points) {
        const double dx = std::log(e) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(v) - my);
    }
    if (sxx == 0.0) {
        throw DomainError("fit_rate: all eps are equal");
    }
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    for (const auto& [e, v] : points) {
        fit.residual = std::max(fit.residual, std::abs(std::log(v) - fit.intercept - fit.slope * std::log(e)));
    }
    return fit;
}

namespace {

RunRecord run_one(const ExperimentConfig& config, const EquilibriumTrack& track, double eps, int series) {
    RunRecord rec;
    rec.epsilon = eps;
    rec.series = series;
    rec.nu = config.nu[static_cast<std::size_t>(series)].at(eps);
    const auto start = std::chrono::steady_clock::now();
    SlackTracker tracker(eps, config.tol_slack);
    try {
        const FluidParams q = config.fluid(eps, rec.nu);
        SolverConfig sc;
        sc.params = q;
        sc.grid = TorusGrid(config.n, config.length);
        sc.t_final = config.t_final;
        sc.n_outputs = config.outputs;
        sc.cfl_advective = config.cfl_advective;
        sc.cfl_dispersive = config.cfl_dispersive;
        sc.cfl_viscous = config.cfl_viscous;
        if (config.dt_max > 0.0) {
            sc.dt_max = config.dt_max;
        }
        sc.scheme = config.scheme;
        sc.keep_states = false;

        const RelaxState init = prepare_initial(config.initial_density(), q, config.prepared);
        const int refine = config.equilibrium_refine;

        auto on_step = [&](int, const RelaxState& s) {
            const EquilibriumState es{s.t, track.rho_bar_at(s.t)};
            const Field e_hat = track.e_hat_at(s.t);
            tracker.add_rate(s.t, budget(s, make_equilibrium_fields(es, q, &e_hat), q).rhs());
        };
        auto on_output = [&](int k, const RelaxState& s) {
            const int node = k * refine;
            const EquilibriumState es{s.t, track.rho_bar_node(node)};
            const EquilibriumFields f = make_equilibrium_fields(es, q, &track.e_hat_node(node));
            const EntropyBudget b = budget(s, f, q);
            tracker.add_output(b);
            rec.budgets.push_back(b);
            rec.sup_psi = std::max(rec.sup_psi, b.psi);
            if (k == config.outputs) {
                rec.m_norm = l2_norm(s.m);
                rec.m_darcy_diff = l2_norm(s.m - f.m_bar);
                const Field d = s.m / s.rho - f.m_bar / f.rho_bar;
                rec.velocity_diff = l2_norm(apply(s.rho, [](double r) { return std::sqrt(r); }) * d);
            }
        };
        const Trajectory traj = run(init, sc, on_output, on_step);

        rec.psi0 = rec.budgets.front().psi;
        rec.inequality = tracker.report();
        rec.slack_min = rec.inequality.slack_min;
        rec.tol_slack = rec.inequality.tol;
        rec.constraint_drift = traj.records.back().constraint_drift;
        rec.mass_drift = traj.max_mass_drift();
        rec.energy_excess_rate = traj.max_energy_excess_rate();
        rec.steps = traj.steps;
        rec.completed = true;
    } catch (const std::exception& e) {
        rec.completed = false;
        rec.error = e.what();
        rec.inequality = tracker.report();
    }
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

double normalizer(const RunRecord& r) {
    const double e4 = r.epsilon * r.epsilon * r.epsilon * r.epsilon;
    return r.psi0 + e4 + r.nu * r.epsilon;
}

}  // namespace

std::vector<SeriesSummary> summarize(const ExperimentConfig& config, const std::vector<RunRecord>& records) {
    std::vector<SeriesSummary> out;
    for (int s = 0; s < static_cast<int>(config.nu.size()); ++s) {
        SeriesSummary sum;
        sum.series = s;
        const NuSpec& spec = config.nu[static_cast<std::size_t>(s)];
        sum.nu_label = spec.label();
        if (config.model == ModelType::nsk) {
            sum.expected_slope = spec.eps_power ? std::min(4.0, spec.power + 1.0) : 1.0;
        }
        std::vector<std::pair<double, double>> points;
        bool all_done = true;
        double lo = std::numeric_limits<double>::infinity();
        for (const auto& r : records) {
            if (r.series != s) {
                continue;
            }
            if (!r.completed) {
                all_done = false;
                continue;
            }
            const double c = r.sup_psi / normalizer(r);
            sum.c_emp = std::max(sum.c_emp, c);
            lo = std::min(lo, c);
            points.emplace_back(r.epsilon, r.sup_psi);
        }
        sum.c_spread = lo > 0.0 && std::isfinite(lo) ? sum.c_emp / lo : 0.0;
        sum.complete = all_done && points.size() >= 3;
        if (sum.complete) {
            try {
                sum.fit = fit_rate(points);
            } catch (const DomainError&) {
                // zero sup Psi or repeated eps only
                sum.complete = false;
            }
        }
        out.push_back(sum);
    }
    return out;
}

SweepResult run_sweep(const ExperimentConfig& config) {
    config.validate();
    SweepResult result;

    const auto eq_start = std::chrono::steady_clock::now();
    EquilibriumConfig ec;
    ec.params = config.fluid(1.0, 0.0);
    ec.grid = TorusGrid(config.n, config.length);
    ec.t_final = config.t_final;
    ec.n_outputs = config.outputs * config.equilibrium_refine;
    ec.rho_min = config.delta;
    ec.margin = config.equilibrium_margin;
    ec.base_substeps = config.equilibrium_substeps;
    ec.richardson_levels = config.equilibrium_levels;
    const EquilibriumTrajectory eq = run_equilibrium(config.initial_density(), ec);
    const EquilibriumTrack track(eq, ec.params);
    result.equilibrium_mass_drift = eq.max_mass_drift();
    result.equilibrium_energy_increase = eq.max_free_energy_increase();
    result.equilibrium_wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - eq_start).count();

    struct Job {
        double eps;
        int series;
    };
    std::vector<Job> jobs;
    for (double eps : config.epsilon) {
        for (int s = 0; s < static_cast<int>(config.nu.size()); ++s) {
            jobs.push_back({eps, s});
        }
    }
    // small eps runs dominate the cost; dispatch them first
    std::vector<std::size_t> order(jobs.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = order.size() - 1 - i;
    }

    result.records.resize(jobs.size());
    std::atomic<std::size_t> next{0};
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers =
        std::min<std::size_t>(jobs.size(), config.workers > 0 ? static_cast<std::size_t>(config.workers) : hw);
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < jobs.size(); i = next++) {
                    const std::size_t j = order[i];
                    result.records[j] = run_one(config, track, jobs[j].eps, jobs[j].series);
                }
            });
        }
    }

    std::stable_sort(result.records.begin(), result.records.end(), [](const RunRecord& a, const RunRecord& b) {
        return a.epsilon != b.epsilon ? a.epsilon > b.epsilon : a.series < b.series;
    });
    result.complete = std::all_of(result.records.begin(), result.records.end(),
                                  [](const RunRecord& r) { return r.completed; });
    result.series = summarize(config, result.records);
    return result;
}

std::vector<HilbertSeries> hilbert_orders(const SweepResult& result) {
    std::vector<HilbertSeries> out;
    for (const auto& sum : result.series) {
        HilbertSeries h;
        h.series = sum.series;
        std::vector<std::pair<double, double>> m;
        std::vector<std::pair<double, double>> md;
        std::vector<std::pair<double, double>> vd;
        bool done = true;
        for (const auto& r : result.records) {
            if (r.series != sum.series) {
                continue;
            }
            done = done && r.completed;
            if (r.completed) {
                m.emplace_back(r.epsilon, r.m_norm);
                md.emplace_back(r.epsilon, r.m_darcy_diff);
                vd.emplace_back(r.epsilon, r.velocity_diff);
            }
        }
        h.complete = done && m.size() >= 3;
        auto safe_fit = [](const std::vector<std::pair<double, double>>& pts) {
            const bool positive = std::all_of(pts.begin(), pts.end(), [](const auto& p) { return p.second > 0.0; });
            if (!positive) {
                return RateFit{};
            }
            try {
                return fit_rate(pts);
            } catch (const DomainError&) {
                return RateFit{};
            }
        };
        if (h.complete) {
            h.m_norm = safe_fit(m);
            h.m_darcy_diff = safe_fit(md);
            h.velocity_diff = safe_fit(vd);
        }
        out.push_back(h);
    }
    return out;
}

std::vector<HilbertSeries> hilbert_orders(const ExperimentConfig& config) { return hilbert_orders(run_sweep(config)); }

}  // namespace ekrelax
