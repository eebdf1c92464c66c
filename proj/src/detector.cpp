#include "qrad/detector.hpp"

#include "qrad/dephasing.hpp"
#include "qrad/errors.hpp"

#include <cmath>
#include <numbers>

namespace qrad {

namespace {

double contrast(const QubitParams& q, const ModeParams& p, const PulseTiming& timing, double a0, double n_r) {
    return a0 * std::exp(-q.gamma_2r() * timing.tau_w() - gamma_th(p, n_r) * timing.tau_p());
}

double readout_filter(const ModeParams& p) {
    const double chi2 = p.chi() * p.chi();
    return chi2 / (chi2 + p.kappa_r() * p.kappa_r());
}

double check_prob(double p) {
    if (!(p >= 0.0 && p < 1.0)) throw DomainError("detector: probability must lie in [0, 1)");
    return p;
}

}  // namespace

void PrecisionInputs::validate() const {
    if (!(n_sys_lin >= 0.0) || !(tau_int >= 0.0) || !(delta_g_over_g >= 0.0))
        throw ValidationError("PrecisionInputs: values must be >= 0");
    if (!(bandwidth_b > 0.0)) throw ValidationError("PrecisionInputs: bandwidth must be > 0");
}

double n_click(double p_click) { return -std::log1p(-check_prob(p_click)); }

double click_probability(const QubitParams& qubit, const ModeParams& params, const PulseTiming& timing, double a0,
                         double r0, double n_r_para) {
    if (!(r0 >= 0.0) || !(n_r_para >= 0.0)) throw DomainError("click_probability: rates must be >= 0");
    return 0.5 - 0.5 * contrast(qubit, params, timing, a0, r0 / params.kappa_r() + n_r_para);
}

std::vector<double> n_click_curve(const QubitParams& qubit, const ModeParams& params, const PulseTiming& timing,
                                  double a0, std::span<const double> r0_tau_p, double n_r_para) {
    std::vector<double> out;
    out.reserve(r0_tau_p.size());
    for (double x : r0_tau_p)
        out.push_back(n_click(click_probability(qubit, params, timing, a0, x / timing.tau_p(), n_r_para)));
    return out;
}

DetectorFigures detector_figures(const QubitParams& qubit, const ModeParams& params, const PulseTiming& timing,
                                 double a0, double n_r_para) {
    if (!(a0 > 0.0 && a0 <= 1.0)) throw DomainError("detector_figures: a0 must lie in (0, 1]");
    if (!(n_r_para >= 0.0)) throw DomainError("detector_figures: n_r_para must be >= 0");
    DetectorFigures f;
    const double filt = readout_filter(params);
    const double x = contrast(qubit, params, timing, a0, 0.0);
    f.eta = x / (1.0 + x) * filt;
    f.p_dc = std::log(2.0 / (1.0 + x));
    const double xp = contrast(qubit, params, timing, a0, n_r_para);
    f.eta_prime = xp / (1.0 + xp) * filt;
    f.p_dc_prime = std::log(2.0 / (1.0 + xp));
    if (params.chi() > 0.0 && qubit.delta_gamma_2r() > 0.0) f.dynamic_range_db = dynamic_range(qubit, params);
    return f;
}

double precision_linear(const PrecisionInputs& in) {
    in.validate();
    if (!(in.tau_int > 0.0)) throw DomainError("precision_linear: tau_int must be > 0");
    const double g = in.delta_g_over_g;
    return std::sqrt(2.0 * std::numbers::pi / (in.bandwidth_b * in.tau_int) + g * g);
}

double precision_dephasing(const DetectorFigures& f, const ModeParams& params, const PulseTiming& timing,
                           double n_shots, DetectorVariant variant) {
    if (!(n_shots >= 1.0)) throw DomainError("precision_dephasing: need at least one shot");
    const bool primed = variant == DetectorVariant::parasitic;
    const double eta = primed ? f.eta_prime : f.eta;
    const double p = primed ? f.p_dc_prime : f.p_dc;
    return std::sqrt(p * (1.0 - p) / n_shots) / (eta * params.kappa_r() * timing.tau_p());
}

double shots_in(double tau_int, const PulseTiming& timing, double dead_time) {
    if (!(tau_int > 0.0) || !(dead_time >= 0.0)) throw DomainError("shots_in: need tau_int > 0, dead_time >= 0");
    return tau_int / (timing.tau_p() + dead_time);
}

double outperform_ratio(const DetectorFigures& f, const ModeParams& params, const PulseTiming& timing,
                        double n_sys_lin, DetectorVariant variant) {
    const bool primed = variant == DetectorVariant::parasitic;
    const double eta = primed ? f.eta_prime : f.eta;
    const double p = primed ? f.p_dc_prime : f.p_dc;
    return n_sys_lin * eta *
           std::sqrt(2.0 * std::numbers::pi * params.kappa_r() * timing.tau_p() / (p * (1.0 - p)));
}

double dynamic_range(const QubitParams& qubit, const ModeParams& params) {
    if (!(params.chi() > 0.0)) throw DomainError("dynamic_range: chi must be > 0");
    if (!(qubit.delta_gamma_2r() > 0.0)) throw DomainError("dynamic_range: delta_gamma_2r must be > 0");
    const double upper = constants::two_pi * (qubit.f_ge() - qubit.f_ef()) / params.chi();
    const double lower = qubit.delta_gamma_2r() / params.kappa_r();
    return 10.0 * std::log10(upper / lower);
}

}  // namespace qrad
