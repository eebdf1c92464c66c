#pragma once

// Ramsey fringes with and without antenna radiation: forward model with
// preparation/readout errors and binomial shot noise, sinusoid fit, and the
// ratio estimator for the effective readout population.

#include "qrad/quantities.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace qrad {

class ReadoutModel {
public:
    ReadoutModel(double p_e_ini, double p_read_e_given_g, double p_read_g_given_e);
    explicit ReadoutModel(const QubitParams& qubit);
    static ReadoutModel ideal() { return {0.0, 0.0, 0.0}; }

    double p_e_ini() const { return p_e_ini_; }
    double p_read_e_given_g() const { return p_eg_; }
    double p_read_g_given_e() const { return p_ge_; }

    // Outcome populations with no Ramsey pulses (tau = 0, qubit left as prepared).
    double p_g0() const;
    double p_e0() const { return 1.0 - p_g0(); }
    double a0() const { return p_g0() - p_e0(); }

    // Scale applied to the ideal fringe amplitude by preparation and readout
    // errors: (P_g^ini - P_e^ini)(1 - P(e|g) - P(g|e)).
    double fringe_contrast() const;

    // Probability of reading g when the ideal (error-free) g population is p_g.
    double measured_g(double p_g) const;

private:
    double p_e_ini_;
    double p_eg_;
    double p_ge_;
};

struct RamseyFringe {
    std::vector<double> phases;
    std::vector<double> p_click;  // probability of the g outcome
    std::optional<std::vector<std::int64_t>> counts;  // g outcomes out of n_rep
    std::size_t n_rep = 0;
    double amplitude = 0.0;
    double phase_offset = 0.0;
    double amp_sigma = 0.0;
};

struct FringeFit {
    double amplitude = 0.0;
    double phase_offset = 0.0;  // in [0, 2 pi)
    double offset = 0.0;
    double amp_sigma = 0.0;
};

/// 21 points over [0, 4 pi).
std::vector<double> default_phase_grid();

/// Fringe amplitude with the pump off, (1/2) exp(-gamma_2r tau).
double amp_off(const QubitParams& qubit, const PulseTiming& timing);
/// Fringe amplitude with the pump on for mean antenna dephasing rate gamma_a_mean.
double amp_on(double gamma_a_mean, const QubitParams& qubit, const PulseTiming& timing);
/// A_off / A_on = exp((gamma_a_mean - gamma_2r) tau_p).
double amp_ratio(double gamma_a_mean, const QubitParams& qubit, const PulseTiming& timing);

/// Exact outcome probabilities, p(phi) = measured_g(1/2 - c amplitude cos(phi - phi0)),
/// c the preparation contrast. No counts; fit fields filled from the exact curve.
RamseyFringe ideal_fringe(double amplitude, double phase_offset, const ReadoutModel& readout,
                          const std::vector<double>& phases = default_phase_grid());

/// Binomial sampling of timing.n_rep() shots per phase, deterministic for a seed.
/// Fit fields are filled from the sampled frequencies.
RamseyFringe synth_fringe(double amplitude, double phase_offset, const ReadoutModel& readout,
                          const PulseTiming& timing, std::uint64_t seed,
                          const std::vector<double>& phases = default_phase_grid());

/// Least-squares fit of p(phi) = c0 - A cos(phi - phi0). With counts the fit is
/// weighted by the binomial variance of the fitted curve; without, amp_sigma
/// comes from the residual scatter.
FringeFit fit_fringe(const RamseyFringe& fringe);

struct PopulationEstimate {
    double gamma_mean = 0.0;   // 1/s
    double gamma_sigma = 0.0;
    double n_r_eff = 0.0;
    double sigma = 0.0;
};

/// Mean antenna dephasing from the fitted on/off amplitudes and the readout
/// population it corresponds to. Uses the fitted fields of both fringes.
PopulationEstimate estimate_n_r_eff(const RamseyFringe& fringe_on, const RamseyFringe& fringe_off,
                                    const QubitParams& qubit, const PulseTiming& timing, const ModeParams& params);

}  // namespace qrad
