#include "qrad/quantities.hpp"

#include "qrad/errors.hpp"

#include <cmath>
#include <string>

namespace qrad {

namespace {

double photon_temperature(double f_hz) { return constants::planck * f_hz / constants::boltzmann; }

void require(bool ok, const char* what) {
    if (!ok) throw ValidationError(what);
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

double bose_einstein(double f_hz, double temperature_k) {
    if (!(f_hz > 0.0) || !(temperature_k > 0.0))
        throw DomainError("bose_einstein: frequency and temperature must be positive");
    const double x = photon_temperature(f_hz) / temperature_k;
    // expm1 overflows to +inf for large x, giving the vacuum limit 0.
    return 1.0 / std::expm1(x);
}

double temperature_of(double f_hz, double occupation) {
    if (!(f_hz > 0.0)) throw DomainError("temperature_of: frequency must be positive");
    if (!(occupation > 0.0)) throw DomainError("temperature_of: occupation must be positive");
    return photon_temperature(f_hz) / std::log1p(1.0 / occupation);
}

ModeParams::ModeParams(const Spec& spec) : s_(spec) {
    require(std::isfinite(s_.f_a) && std::isfinite(s_.f_r) && std::isfinite(s_.f_p),
            "ModeParams: frequencies must be finite");
    require(finite_nonneg(s_.chi), "ModeParams: chi must be >= 0");
    require(finite_nonneg(s_.kappa_r_c) && finite_nonneg(s_.kappa_r_i) && finite_nonneg(s_.kappa_a_c) &&
                finite_nonneg(s_.kappa_a_i),
            "ModeParams: rates must be >= 0");
    require(kappa_r() > 0.0, "ModeParams: kappa_r must be > 0");
    require(kappa_a() > 0.0, "ModeParams: kappa_a must be > 0");
    require(s_.conversion_efficiency >= 0.0 && s_.conversion_efficiency <= 1.0,
            "ModeParams: conversion efficiency must lie in [0, 1]");
}

ModeParams ModeParams::from_hz(Spec spec_hz) {
    spec_hz.chi = angular(spec_hz.chi);
    spec_hz.kappa_r_c = angular(spec_hz.kappa_r_c);
    spec_hz.kappa_r_i = angular(spec_hz.kappa_r_i);
    spec_hz.kappa_a_c = angular(spec_hz.kappa_a_c);
    spec_hz.kappa_a_i = angular(spec_hz.kappa_a_i);
    return ModeParams(spec_hz);
}

double ModeParams::delta_a() const { return angular(s_.f_a - s_.f_r - s_.f_p); }

ModeParams ModeParams::with_f_a(double f_a_hz) const {
    Spec s = s_;
    s.f_a = f_a_hz;
    return ModeParams(s);
}

BathPopulations::BathPopulations(const Spec& spec) : s_(spec) {
    require(finite_nonneg(s_.n_vts) && finite_nonneg(s_.n_ext) && finite_nonneg(s_.n_add) &&
                finite_nonneg(s_.n_loss),
            "BathPopulations: populations must be >= 0");
    require(s_.t_loss > 0.0 && s_.t_loss <= 1.0, "BathPopulations: t_loss must lie in (0, 1]");
    require(s_.t_leak >= 0.0 && s_.t_leak < 1.0, "BathPopulations: t_leak must lie in [0, 1)");
}

PulseTiming::PulseTiming(double tau, double tau_p, std::size_t n_rep) : tau_(tau), tau_p_(tau_p), n_rep_(n_rep) {
    require(std::isfinite(tau) && std::isfinite(tau_p), "PulseTiming: times must be finite");
    require(tau_p > 0.0 && tau_p <= tau, "PulseTiming: need 0 < tau_p <= tau");
    require(n_rep >= 1, "PulseTiming: n_rep must be >= 1");
}

QubitParams::QubitParams(const Spec& spec) : s_(spec) {
    auto prob = [](double p) { return p >= 0.0 && p < 1.0; };
    require(prob(s_.p_e_ini) && prob(s_.p_read_e_given_g) && prob(s_.p_read_g_given_e),
            "QubitParams: probabilities must lie in [0, 1)");
    require(std::isfinite(s_.gamma_2r) && s_.gamma_2r >= 0.0, "QubitParams: gamma_2r must be >= 0");
    require(finite_nonneg(s_.t1), "QubitParams: t1 must be >= 0");
    require(finite_nonneg(s_.delta_gamma_2r), "QubitParams: delta_gamma_2r must be >= 0");
    require(s_.f_ge > s_.f_ef, "QubitParams: expected f_ge > f_ef (negative anharmonicity)");
}

}  // namespace qrad
