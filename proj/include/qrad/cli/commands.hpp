#pragma once

#include "qrad/cli/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qrad::cli {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_numeric = 3 };

inline constexpr int schema_version = 1;

struct Options {
    std::string config_path;
    std::string out = "-";
    std::optional<std::uint64_t> seed;
    bool synthetic = false;
    std::optional<double> tau_p;
    unsigned jobs = 1;  // 0: hardware concurrency
    std::vector<std::string> data_files;
    std::string data_out;  // calibrate --synthetic: also write the generated sweeps
};

struct CommandOutput {
    std::string content;
    std::vector<std::string> warnings;
};

// Each command validates everything before computing and returns the full
// output text; nothing is written on failure.
CommandOutput cmd_spectra(const ExperimentConfig& config, const Options& opts);
CommandOutput cmd_oracle_compare(const ExperimentConfig& config, const Options& opts);
CommandOutput cmd_calibrate(const ExperimentConfig& config, const Options& opts);
CommandOutput cmd_metrics(const ExperimentConfig& config, const Options& opts);

/// argv-style entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qrad::cli
