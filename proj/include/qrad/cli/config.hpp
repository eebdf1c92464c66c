#pragma once

#include "qrad/calibration.hpp"
#include "qrad/oracle.hpp"
#include "qrad/quantities.hpp"

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qrad::cli {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SweepSpec {
    std::vector<double> delta_a;  // rad/s, sorted
    std::vector<double> tau_p;    // s, sorted
    std::vector<double> n_probe;  // oracle-compare
};

struct CalibrationSpec {
    SyntheticTruth truth;
    SyntheticPlan plan;
    double far_threshold = 0.0;  // rad/s
    double n_vts_ref = 0.0;
    std::size_t seeds = 1;
};

struct MetricsSpec {
    double a0 = 0.0;  // from the readout model unless given
    double n_r_para = 0.0;
    std::vector<double> n_sys_lin{1.0};
    double dead_time = 0.0;
};

struct ExperimentConfig {
    ModeParams mode;
    QubitParams qubit;
    BathPopulations baths;
    PulseTiming timing;
    SweepSpec sweep;
    OracleConfig oracle;
    CalibrationSpec calibration;
    MetricsSpec metrics;
    std::uint64_t seed = 0;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

}  // namespace qrad::cli
