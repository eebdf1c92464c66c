#pragma once

// Gaussian-ansatz solution of the cascaded antenna -> readout master equation
// in the P representation. Used as an independent check of the small-population
// dephasing theory and to explore larger bath populations.

#include "qrad/ode.hpp"
#include "qrad/quantities.hpp"

#include <complex>

namespace qrad {

struct OracleConfig {
    double epsilon = 1e-8;  // occupation of the Gaussian standing in for the vacuum
    double rtol = 1e-10;
    double atol = 1e-12;
    double max_step = 0.0;  // s, 0: unbounded
    // Pump off removes only the cascade coupling; the cavity keeps decaying at kappa_r.
    // false drops kappa_r_c from the decay as well.
    bool keep_dissipation_when_off = true;
    // Rerun at epsilon/10 and throw ConvergenceError if the ratio moves by more than this.
    bool check_convergence = false;
    double convergence_tol = 1e-6;

    void validate() const;
};

// P(alpha, beta) = E exp(-A|alpha|^2 - B|beta|^2 - C alpha beta* - D beta alpha*)
struct GaussianAnsatzState {
    std::complex<double> a, b, c, d, e;
    double t = 0.0;

    ode::State<5> pack() const { return {a, b, c, d, e}; }
    static GaussianAnsatzState unpack(const ode::State<5>& y, double t) { return {y[0], y[1], y[2], y[3], y[4], t}; }

    // Integral of P over both phase spaces, E pi^2 / (A B - C D).
    std::complex<double> norm() const;
};

GaussianAnsatzState ansatz_rhs(const GaussianAnsatzState& state, const ModeParams& params, double n_vts,
                               double delta_a, bool pump_on, bool keep_dissipation_when_off = true);

GaussianAnsatzState initial_state(const ModeParams& params, double n_vts, double epsilon);

/// |I(tau)| / |I(0)|: the Ramsey coherence remaining after the pulse sequence.
double dephasing_ratio(const ModeParams& params, double n_vts, const PulseTiming& timing, double delta_a,
                       const OracleConfig& config = {});
double dephasing_ratio(const ModeParams& params, double n_vts, const PulseTiming& timing,
                       const OracleConfig& config = {});

/// -ln(ratio) / tau_p
double mean_dephasing_oracle(const ModeParams& params, double n_vts, const PulseTiming& timing, double delta_a,
                             const OracleConfig& config = {});

/// Response function from the oracle dephasing with the eta_a normalization.
double eta_a_oracle(const ModeParams& params, const PulseTiming& timing, double delta_a, double n_probe,
                    const OracleConfig& config = {});

}  // namespace qrad
