#pragma once

// Small-thermal-population (first-cumulant) theory of dephasing induced by
// pulsed Lorentzian noise, plus the white-noise rate and its inverse.

#include "qrad/quantities.hpp"

#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

namespace qrad {

/// Parameters needed to evaluate the readout-mode correlators driven by the
/// transmitted antenna noise. Bath kernel:
///   L(t,t') = kappa_a g (1-g) exp(-kappa_a |t-t'| / 2) exp(i w_a (t-t')).
class CorrelatorKernel {
public:
    explicit CorrelatorKernel(const ModeParams& params);

    double kappa_a() const { return kappa_a_; }
    double kappa_r() const { return kappa_r_; }
    double kappa_r_c() const { return kappa_r_c_; }
    double chi() const { return chi_; }
    double gamma() const { return gamma_; }

    // kappa_a kappa_r_c g (1-g): the prefactor of every correlator per bath photon.
    double prefactor() const { return kappa_a_ * kappa_r_c_ * gamma_ * (1.0 - gamma_); }

private:
    double kappa_a_;
    double kappa_r_;
    double kappa_r_c_;
    double chi_;
    double gamma_;
};

/// <b_1^dag b_2>(t) during the pump window for a readout mode pair whose
/// combined decay is kappa (complex for the cross terms) and whose detuning
/// from the antenna image is delta. Zero at t = 0.
std::complex<double> correlator_n(const CorrelatorKernel& kernel, double t, std::complex<double> kappa,
                                  double delta, double n_vts);

/// t -> infinity limit of correlator_n with the pump left on.
std::complex<double> correlator_n_steady(const CorrelatorKernel& kernel, std::complex<double> kappa,
                                         double delta, double n_vts);

/// White-noise photon-induced dephasing rate for readout thermal population n.
double gamma_th(const ModeParams& params, double n_r_th);

/// Linear-regime slope d gamma_th / dn at n = 0, chi^2 kappa_r / (chi^2 + kappa_r^2).
double gamma_th_slope(const ModeParams& params);

/// The unique n >= 0 with gamma_th(n) = gamma. Throws DomainError for gamma < 0.
double invert_gamma_th(const ModeParams& params, double gamma);

/// kappa_r/2 <D^dag D>(t), D = b_g - b_e, at time t in [0, tau] of the Ramsey
/// delay (pump on for t < tau_p, free ring-down afterwards).
double dephasing_integrand(const ModeParams& params, double n_vts, const PulseTiming& timing, double delta_a,
                           double t);

/// Average dephasing rate (1/tau_p) int_0^tau Gamma_a(t) dt from the internal
/// bath, transmitted through the antenna. Exactly linear in n_vts.
double mean_dephasing_transmitted(const ModeParams& params, double n_vts, const PulseTiming& timing,
                                  double delta_a);
double mean_dephasing_transmitted(const ModeParams& params, double n_vts, const PulseTiming& timing);

/// Detector response function eta_a at antenna detuning delta_a (rad/s).
double eta_a(const ModeParams& params, const PulseTiming& timing, double delta_a);

/// Effective readout population the Ramsey protocol reports for the full
/// bath model (transmitted, reflected, leakage, and link-loss terms).
double radiometer_response(const ModeParams& params, const BathPopulations& baths, const PulseTiming& timing,
                           double delta_a);

// Same response given a precomputed eta_a value.
double radiometer_response_from_eta(const ModeParams& params, const BathPopulations& baths, double eta);

struct DephasingSpectrum {
    std::vector<double> detunings;  // delta_a, rad/s
    std::vector<double> n_r_eff;
    std::vector<double> sigma;
    PulseTiming timing;
};

DephasingSpectrum response_spectrum(const ModeParams& params, const BathPopulations& baths,
                                    const PulseTiming& timing, std::span<const double> detunings);

/// Thread-safe memo of eta_a keyed by (delta_a, tau, tau_p) for a fixed ModeParams.
class EtaCache {
public:
    explicit EtaCache(ModeParams params) : params_(std::move(params)) {}

    double operator()(const PulseTiming& timing, double delta_a) const;
    const ModeParams& params() const { return params_; }

private:
    ModeParams params_;
    mutable std::mutex mutex_;
    mutable std::map<std::tuple<double, double, double>, double> table_;
};

}  // namespace qrad
