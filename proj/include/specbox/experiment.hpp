#pragma once

#include "specbox/config.hpp"

#include <string>
#include <vector>

namespace specbox {

/// Process exit codes shared by the library entry points and the CLI.
enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kBlowUp = 3,
    kVerifyFailure = 4,
};

/// Runs one experiment: series.csv, report.json and per-horizon checkpoints
/// under the output directory. Deterministic bytes for a fixed config.
int run_experiment(const ExperimentConfig& config, const std::string& out_dir);

/// Runs the ensemble driver: ensemble.json plus per-realization reports under
/// indexed subdirectories.
int run_ensemble_experiment(const ExperimentConfig& config, const std::string& out_dir);

/// Re-checks every invariant recorded in the reports under `dir`; prints one
/// PASS/FAIL line per criterion. Returns kOk only if all pass.
int verify_reports(const std::string& dir, std::vector<std::string>* failures = nullptr);

/// Resolves the effective output directory (env override applied).
std::string resolve_output_dir(const ExperimentConfig& config);

/// CLI entry point: run | ensemble | verify | checkpoint-info.
int cli_main(const std::vector<std::string>& args);

} // namespace specbox
