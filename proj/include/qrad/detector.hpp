#pragma once

// The Ramsey radiometer viewed as a single-photon detector, and its precision
// against a linear-amplifier total-power radiometer.

#include "qrad/quantities.hpp"

#include <span>
#include <vector>

namespace qrad {

struct DetectorFigures {
    double eta = 0.0;
    double p_dc = 0.0;
    double eta_prime = 0.0;  // with the parasitic readout background
    double p_dc_prime = 0.0;
    double dynamic_range_db = 0.0;

    // dN_click / d(R tau_p) at zero signal.
    double n_click_slope() const { return eta; }
};

enum class DetectorVariant { bare, parasitic };

struct PrecisionInputs {
    double n_sys_lin = 1.0;
    double bandwidth_b = 0.0;  // rad/s
    double tau_int = 0.0;      // s
    double delta_g_over_g = 0.0;

    void validate() const;
};

/// Clicks per window for click probability p: ln(1 / (1 - p)).
double n_click(double p_click);

/// g-outcome probability after the sequence for a nonzero-photon rate r0 = kappa_r n.
double click_probability(const QubitParams& qubit, const ModeParams& params, const PulseTiming& timing, double a0,
                         double r0, double n_r_para = 0.0);

/// N_click against r0 tau_p, for plotting and slope checks.
std::vector<double> n_click_curve(const QubitParams& qubit, const ModeParams& params, const PulseTiming& timing,
                                  double a0, std::span<const double> r0_tau_p, double n_r_para = 0.0);

DetectorFigures detector_figures(const QubitParams& qubit, const ModeParams& params, const PulseTiming& timing,
                                 double a0, double n_r_para);

/// Relative precision dn / n_sys of a total-power radiometer.
double precision_linear(const PrecisionInputs& inputs);

/// Precision of the readout population after n_shots sequences.
double precision_dephasing(const DetectorFigures& figures, const ModeParams& params, const PulseTiming& timing,
                           double n_shots, DetectorVariant variant = DetectorVariant::bare);

/// Sequences that fit in tau_int; dead_time is the readout and reset overhead per sequence.
double shots_in(double tau_int, const PulseTiming& timing, double dead_time = 0.0);

/// dn_lin / dn_qu at equal integration time with B = kappa_r.
double outperform_ratio(const DetectorFigures& figures, const ModeParams& params, const PulseTiming& timing,
                        double n_sys_lin, DetectorVariant variant = DetectorVariant::bare);

/// 10 log10 of (2 pi (f_ge - f_ef) / chi) / (delta_gamma_2r / kappa_r).
double dynamic_range(const QubitParams& qubit, const ModeParams& params);

}  // namespace qrad
