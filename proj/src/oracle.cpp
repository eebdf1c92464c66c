#include "qrad/oracle.hpp"

#include "qrad/dephasing.hpp"
#include "qrad/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qrad {

using cplx = std::complex<double>;

void OracleConfig::validate() const {
    if (!(epsilon > 0.0 && epsilon <= 1e-3)) throw ValidationError("oracle: epsilon must be in (0, 1e-3]");
    if (!(rtol > 0.0) || !(atol > 0.0)) throw ValidationError("oracle: tolerances must be positive");
    if (max_step < 0.0) throw ValidationError("oracle: max_step must be >= 0");
    if (check_convergence && !(convergence_tol > 0.0)) throw ValidationError("oracle: convergence_tol must be > 0");
}

cplx GaussianAnsatzState::norm() const {
    constexpr double pi2 = std::numbers::pi * std::numbers::pi;
    return e * pi2 / (a * b - c * d);
}

GaussianAnsatzState ansatz_rhs(const GaussianAnsatzState& s, const ModeParams& p, double n_vts, double delta_a,
                               bool pump_on, bool keep_dissipation_when_off) {
    const cplx i(0.0, 1.0);
    const double ka = p.kappa_a();
    const double kr = pump_on || keep_dissipation_when_off ? p.kappa_r() : p.kappa_r_i();
    const double chi = p.chi();
    const double g = pump_on ? std::sqrt(p.kappa_a_c() * p.kappa_r_c()) : 0.0;
    const double nk = n_vts * p.kappa_a_i();

    GaussianAnsatzState out;
    out.t = s.t;
    out.a = ka * s.a - nk * s.a * s.a + g * (s.c + s.d);
    out.b = (kr + i * chi) * s.b - nk * s.c * s.d + i * chi;
    const cplx common = 0.5 * (ka + kr + i * chi) - nk * s.a;
    out.c = (common + i * delta_a) * s.c + g * s.b;
    out.d = (common - i * delta_a) * s.d + g * s.b;
    out.e = (ka + kr + i * chi - nk * s.a) * s.e;
    return out;
}

GaussianAnsatzState initial_state(const ModeParams& p, double n_vts, double epsilon) {
    constexpr double pi2 = std::numbers::pi * std::numbers::pi;
    const double gn = p.gamma() * n_vts;
    return {1.0 / gn, 1.0 / epsilon, 0.0, 0.0, 1.0 / (pi2 * gn * epsilon), 0.0};
}

namespace {

double ratio_once(const ModeParams& p, double n_vts, const PulseTiming& timing, double delta_a,
                  const OracleConfig& cfg, double epsilon) {
    const auto s0 = initial_state(p, n_vts, epsilon);
    const ode::Tolerances tol{cfg.rtol, cfg.atol, cfg.max_step};

    // The distribution represents the ge coherence, not a density: A and B pick
    // up large imaginary parts and their real parts change sign. Only the
    // determinant is checked (the integrator rejects non-finite steps itself).
    auto observer = [](double t, const ode::State<5>& y) {
        if (y[0] * y[1] - y[2] * y[3] == 0.0)
            throw IntegrationError("oracle: Gaussian lost integrability at t = " + std::to_string(t));
    };
    auto segment = [&](bool pump_on) {
        return [&, pump_on](double t, const ode::State<5>& y) {
            return ansatz_rhs(GaussianAnsatzState::unpack(y, t), p, n_vts, delta_a, pump_on,
                              cfg.keep_dissipation_when_off)
                .pack();
        };
    };

    ode::State<5> y = s0.pack();
    y = ode::integrate<5>(segment(true), 0.0, timing.tau_p(), y, tol, observer);
    y = ode::integrate<5>(segment(false), timing.tau_p(), timing.tau(), y, tol, observer);

    const auto end = GaussianAnsatzState::unpack(y, timing.tau());
    const double r = std::abs(end.norm()) / std::abs(s0.norm());
    if (!std::isfinite(r)) throw IntegrationError("oracle: non-finite normalization");
    return r;
}

}  // namespace

double dephasing_ratio(const ModeParams& p, double n_vts, const PulseTiming& timing, double delta_a,
                       const OracleConfig& cfg) {
    cfg.validate();
    if (n_vts < 0.0) throw DomainError("oracle: n_vts must be >= 0");
    if (p.gamma() * n_vts == 0.0) return 1.0;
    const double r = ratio_once(p, n_vts, timing, delta_a, cfg, cfg.epsilon);
    if (cfg.check_convergence) {
        const double r2 = ratio_once(p, n_vts, timing, delta_a, cfg, 0.1 * cfg.epsilon);
        if (std::abs(r - r2) > cfg.convergence_tol)
            throw ConvergenceError("oracle: ratio not converged in epsilon (" + std::to_string(r) + " vs " +
                                   std::to_string(r2) + ")");
    }
    return r;
}

double dephasing_ratio(const ModeParams& p, double n_vts, const PulseTiming& timing, const OracleConfig& cfg) {
    return dephasing_ratio(p, n_vts, timing, p.delta_a(), cfg);
}

double mean_dephasing_oracle(const ModeParams& p, double n_vts, const PulseTiming& timing, double delta_a,
                             const OracleConfig& cfg) {
    return -std::log(dephasing_ratio(p, n_vts, timing, delta_a, cfg)) / timing.tau_p();
}

double eta_a_oracle(const ModeParams& p, const PulseTiming& timing, double delta_a, double n_probe,
                    const OracleConfig& cfg) {
    if (!(n_probe > 0.0)) throw DomainError("oracle: n_probe must be > 0");
    const double g = mean_dephasing_oracle(p, n_probe, timing, delta_a, cfg);
    // Tiny negative rates are integration noise around zero dephasing.
    const double n_r = g > 0.0 ? invert_gamma_th(p, g) : 0.0;
    return n_r / (p.response_scale() * n_probe);
}

}  // namespace qrad
