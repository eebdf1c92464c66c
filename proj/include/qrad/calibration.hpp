#pragma once

// Three-step calibration from families of dephasing spectra: response
// function from the added-noise sweep, link losses from the bath-temperature
// sweep slopes, bath populations from its intercepts. Also the system-noise
// budget referred to the antenna input.

#include "qrad/dephasing.hpp"
#include "qrad/quantities.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace qrad {

struct SweepRecord {
    double delta_a = 0.0;        // rad/s
    double control_value = 0.0;  // n_add or n_vts
    double n_r_eff = 0.0;
    std::optional<double> sigma;  // absent: unweighted fits
};

struct LinePoint {
    double x = 0.0;
    double y = 0.0;
    std::optional<double> sigma;
};

struct FitLine {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_sigma = 0.0;
    double intercept_sigma = 0.0;
    double covariance = 0.0;  // cov(slope, intercept)
    bool weighted = true;
};

/// Minimizes sum ((y - a - b x) / sigma)^2. Any missing sigma switches to an
/// unweighted fit with the covariance scaled by the residual variance.
FitLine fit_line_weighted(std::span<const LinePoint> points);

struct Estimate {
    double value = 0.0;
    double sigma = 0.0;
};

struct EtaEstimate {
    double delta_a = 0.0;
    double eta = 0.0;
    double sigma = 0.0;
    bool far = false;  // used as the reference
};

/// Lines of n_r_eff against the control value, one per detuning (ascending).
struct DetuningLine {
    double delta_a = 0.0;
    FitLine line;
};
std::vector<DetuningLine> fit_lines_by_detuning(std::span<const SweepRecord> records);

/// Step A: eta_a(delta) = 1 - slope(delta) / slope_far, where slope_far is the
/// inverse-variance mean over |delta_a| >= far_threshold.
std::vector<EtaEstimate> step_a_eta(std::span<const SweepRecord> spectra_vs_n_add, double far_threshold);

struct LossEstimate {
    Estimate t_loss;
    Estimate t_leak;
};

/// Step B, from the n_vts sweep (n_add = 0). Detunings whose eta_a is more
/// than 3 sigma from zero contribute per-detuning t_loss values, combined by
/// inverse-variance averaging.
LossEstimate step_b_losses(std::span<const SweepRecord> spectra_vs_n_vts, std::span<const EtaEstimate> eta_a,
                           const ModeParams& params, double far_threshold);

struct BathEstimate {
    Estimate n_ext;
    Estimate n_loss;
    bool n_loss_identifiable = true;  // false at t_loss = 1 (sigma infinite)
};

/// Step C from the intercepts of the same n_vts sweep.
BathEstimate step_c_baths(std::span<const SweepRecord> spectra_vs_n_vts, std::span<const EtaEstimate> eta_a,
                          double t_loss, const ModeParams& params, double far_threshold);

struct SystemNoise {
    double n_para = 0.0;
    double n_shot = 0.0;
    double n_sys = 0.0;
};

/// n_para from the bath model, qubit-decoherence shot noise referred to the
/// antenna input, and their sum.
SystemNoise assemble_system_noise(const QubitParams& qubit, const ModeParams& params, const BathPopulations& baths,
                                  const PulseTiming& timing, double a0);

struct CalibrationResult {
    Estimate t_loss, t_leak, n_ext, n_loss;
    Estimate n_para, n_shot, n_sys;
    Estimate t_ext, t_loss_bath, t_para, t_sys;  // K, via temperature_of at f_a
    bool n_loss_identifiable = true;
    bool weighted = true;
    std::vector<EtaEstimate> eta_a;
};

struct CalibrationInputs {
    std::vector<SweepRecord> vs_n_add;
    std::vector<SweepRecord> vs_n_vts;
    double far_threshold = 0.0;  // rad/s
    double n_vts_ref = 0.0;      // bath population at which n_para is quoted
};

/// Steps A to C plus the noise budget. Standard errors of the final numbers come
/// from a numerical Jacobian over every fitted line parameter.
CalibrationResult calibrate(const CalibrationInputs& inputs, const ModeParams& params, const QubitParams& qubit,
                            const PulseTiming& timing, double a0);

struct SyntheticTruth {
    double t_loss = 0.52;
    double t_leak = 0.046;
    double n_ext = 0.014;
    double n_loss = 0.09;
};

struct SyntheticPlan {
    std::vector<double> detunings;     // rad/s
    std::vector<double> n_add_values;  // step A sweep
    std::vector<double> n_vts_values;  // step B/C sweep
    double n_vts_during_n_add = 0.0;
    double sigma = 0.002;
};

/// Plan spanning +-2 chi on a 17-point grid, far points at +-10 and +-12 chi,
/// n_add in {0, 0.5, 1, 1.5, 2} and n_vts at 1.03 ... 2.2 K.
SyntheticPlan default_synthetic_plan(const ModeParams& params);

/// Far-reference threshold matching default_synthetic_plan.
double default_far_threshold(const ModeParams& params);

/// Spectra from radiometer_response with Gaussian noise of the plan's sigma.
CalibrationInputs synthesize_sweeps(const ModeParams& params, const PulseTiming& timing,
                                    const SyntheticTruth& truth, const SyntheticPlan& plan, std::uint64_t seed,
                                    const EtaCache* cache = nullptr);

}  // namespace qrad
