#pragma once

// Sweep output files. Everything except timing.txt is a deterministic
// function of the config.
//
//   summary.txt               key = value, see write_summary
//   budget_eps<e>_s<k>.csv    per run, write_budget_csv schema
//   rate_s<k>.dat             "log_eps log_sup_psi" rows, one header line
//   timing.txt                wall times

#include <string>
#include <vector>

#include "ekrelax/config.hpp"
#include "ekrelax/sweep.hpp"

namespace ekrelax {

/// Shortest round-trip decimal form.
std::string format_number(double v);

std::string budget_file_name(const RunRecord& record);
std::string plot_file_name(int series);

std::string render_summary(const SweepResult& result, const ExperimentConfig& config);

/// Writes all files into config.out_dir (created if missing) and returns
/// their paths. Throws std::runtime_error naming the path on I/O failure.
std::vector<std::string> emit_reports(const SweepResult& result, const ExperimentConfig& config);

}  // namespace ekrelax
