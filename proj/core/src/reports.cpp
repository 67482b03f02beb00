#include "ekrelax/reports.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ekrelax {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string budget_file_name(const RunRecord& record) {
    return "budget_eps" + format_number(record.epsilon) + "_s" + std::to_string(record.series) + ".csv";
}

std::string plot_file_name(int series) { return "rate_s" + std::to_string(series) + ".dat"; }

std::string render_summary(const SweepResult& result, const ExperimentConfig& config) {
    std::ostringstream os;
    auto kv = [&os](const std::string& key, const std::string& value) { os << key << " = " << value << '\n'; };
    auto num = [](double v) { return format_number(v); };

    kv("status", result.complete ? "complete" : "incomplete");
    kv("model", config.model == ModelType::ek ? "ek" : "nsk");
    kv("records", std::to_string(result.records.size()));
    kv("equilibrium.mass_drift", num(result.equilibrium_mass_drift));
    kv("equilibrium.free_energy_increase", num(result.equilibrium_energy_increase));

    const auto hilbert = hilbert_orders(result);
    for (const auto& s : result.series) {
        const std::string p = "series." + std::to_string(s.series) + ".";
        kv(p + "nu", s.nu_label);
        kv(p + "complete", s.complete ? "true" : "false");
        kv(p + "slope", num(s.fit.slope));
        kv(p + "intercept", num(s.fit.intercept));
        kv(p + "residual", num(s.fit.residual));
        kv(p + "expected_slope", num(s.expected_slope));
        kv(p + "c_emp", num(s.c_emp));
        kv(p + "c_spread", num(s.c_spread));
        const auto& h = hilbert[static_cast<std::size_t>(s.series)];
        kv(p + "hilbert.m_slope", num(h.m_norm.slope));
        kv(p + "hilbert.m_darcy_slope", num(h.m_darcy_diff.slope));
        kv(p + "hilbert.velocity_slope", num(h.velocity_diff.slope));
    }
    if (!result.series.empty()) {
        // first series under the short names
        kv("sweep.slope", num(result.series.front().fit.slope));
        kv("sweep.c_emp", num(result.series.front().c_emp));
        kv("sweep.c_spread", num(result.series.front().c_spread));
    }

    for (std::size_t i = 0; i < result.records.size(); ++i) {
        const RunRecord& r = result.records[i];
        const std::string p = "run." + std::to_string(i) + ".";
        kv(p + "epsilon", num(r.epsilon));
        kv(p + "nu", num(r.nu));
        kv(p + "series", std::to_string(r.series));
        kv(p + "completed", r.completed ? "true" : "false");
        if (!r.completed) {
            std::string msg = r.error;
            for (char& c : msg) {
                if (c == '\n') {
                    c = ' ';
                }
            }
            kv(p + "error", msg);
        }
        kv(p + "sup_psi", num(r.sup_psi));
        kv(p + "psi0", num(r.psi0));
        kv(p + "slack_min", num(r.slack_min));
        kv(p + "tol_slack", num(r.tol_slack));
        kv(p + "m_norm", num(r.m_norm));
        kv(p + "m_darcy_diff", num(r.m_darcy_diff));
        kv(p + "velocity_diff", num(r.velocity_diff));
        kv(p + "constraint_drift", num(r.constraint_drift));
        kv(p + "mass_drift", num(r.mass_drift));
        kv(p + "energy_excess_rate", num(r.energy_excess_rate));
        kv(p + "steps", std::to_string(r.steps));
        kv(p + "budget_file", budget_file_name(r));
    }
    return os.str();
}

std::vector<std::string> emit_reports(const SweepResult& result, const ExperimentConfig& config) {
    namespace fs = std::filesystem;
    const fs::path dir(config.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw std::runtime_error("cannot create output directory " + dir.string());
    }
    std::vector<std::string> written;

    const fs::path summary = dir / "summary.txt";
    write_text(summary, render_summary(result, config));
    written.push_back(summary.string());

    for (const auto& r : result.records) {
        const fs::path p = dir / budget_file_name(r);
        write_budget_csv(r.budgets, r.inequality, p.string());
        written.push_back(p.string());
    }

    for (const auto& s : result.series) {
        std::ostringstream os;
        os << "# log_eps log_sup_psi  nu = " << s.nu_label << "  expected_slope = " << format_number(s.expected_slope)
           << '\n';
        for (const auto& r : result.records) {
            if (r.series == s.series && r.completed && r.sup_psi > 0.0) {
                os << format_number(std::log(r.epsilon)) << ' ' << format_number(std::log(r.sup_psi)) << '\n';
            }
        }
        const fs::path p = dir / plot_file_name(s.series);
        write_text(p, os.str());
        written.push_back(p.string());
    }

    std::ostringstream timing;
    timing << "equilibrium " << result.equilibrium_wall_time << '\n';
    for (const auto& r : result.records) {
        timing << "eps " << format_number(r.epsilon) << " series " << r.series << ' ' << r.wall_time << '\n';
    }
    const fs::path tp = dir / "timing.txt";
    write_text(tp, timing.str());
    written.push_back(tp.string());
    return written;
}

}  // namespace ekrelax
