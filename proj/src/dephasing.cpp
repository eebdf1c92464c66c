#include "qrad/dephasing.hpp"

#include "qrad/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace qrad {

using cplx = std::complex<double>;

namespace {

constexpr cplx I{0.0, 1.0};

// Moments m_k(w) = int_0^1 u^k exp(-w u) du for k = 0..3.
std::array<cplx, 4> exp_moments(cplx w) {
    std::array<cplx, 4> m{};
    if (std::abs(w) < 1.0) {
        // Power series; 30 terms reach double precision for |w| < 1.
        cplx term = 1.0;
        for (int j = 0; j < 30; ++j) {
            for (int k = 0; k < 4; ++k) m[k] += term / static_cast<double>(k + j + 1);
            term *= -w / static_cast<double>(j + 1);
        }
        return m;
    }
    const cplx ew = std::exp(-w);
    m[0] = (1.0 - ew) / w;
    for (int k = 1; k < 4; ++k) m[k] = (static_cast<double>(k) * m[k - 1] - ew) / w;
    return m;
}

// phi(z, t) = (1 - exp(-z t)) / z = int_0^t exp(-z s) ds.
cplx phi(cplx z, double t) { return t * exp_moments(z * t)[0]; }

// Divided difference (phi(z + h) - phi(z)) / h, with a second-order Taylor
// expansion in h when the difference would cancel.
cplx phi_divided(cplx z, cplx h, double t, double scale) {
    if (std::abs(h) < 1e-6 * scale) {
        const auto m = exp_moments(z * t);
        const double t2 = t * t;
        return -t2 * m[1] + h * (t2 * t * m[2]) / 2.0 - h * h * (t2 * t2 * m[3]) / 6.0;
    }
    return (phi(z + h, t) - phi(z, t)) / h;
}

// Double integral over [0,t]^2 of exp(-p u - q v - a |u - v|).
cplx two_time_integral(cplx p, cplx q, double a, double t, double scale) {
    // Split at u = v; each half is a divided difference of phi.
    const cplx lower = -phi_divided(p + a, q - a, t, scale);
    const cplx upper = -phi_divided(q + a, p - a, t, scale);
    return lower + upper;
}

// t -> infinity: phi -> 1/z, so the divided differences are -1/(z (z + h)).
cplx two_time_integral_steady(cplx p, cplx q, double a) {
    return 1.0 / ((p + a) * (p + q)) + 1.0 / ((q + a) * (p + q));
}

struct ModeCorrelators {
    cplx gg, ee, ge;
};

ModeCorrelators correlators_at(const CorrelatorKernel& k, double t, double delta_a, double n_vts) {
    const double half_chi = 0.5 * k.chi();
    return {correlator_n(k, t, k.kappa_r(), delta_a - half_chi, n_vts),
            correlator_n(k, t, k.kappa_r(), delta_a + half_chi, n_vts),
            correlator_n(k, t, cplx(k.kappa_r(), -k.chi()), delta_a, n_vts)};
}

// <D^dag D> = <b_g^dag b_g> + <b_e^dag b_e> - 2 Re <b_g^dag b_e>.
double ddag_d(const ModeCorrelators& c) { return (c.gg + c.ee).real() - 2.0 * c.ge.real(); }

double tail_integral(const CorrelatorKernel& k, const ModeCorrelators& at_tp, double tau_w) {
    const cplx kappa_ge(k.kappa_r(), -k.chi());
    const cplx diag = (at_tp.gg + at_tp.ee) * phi(k.kappa_r(), tau_w);
    const cplx cross = at_tp.ge * phi(kappa_ge, tau_w);
    return diag.real() - 2.0 * cross.real();
}

// Gamma_bar per unit n_vts.
double mean_dephasing_per_photon(const ModeParams& params, const PulseTiming& timing, double delta_a) {
    const CorrelatorKernel kernel(params);
    const double tp = timing.tau_p();
    auto f = [&](double t) { return ddag_d(correlators_at(kernel, t, delta_a, 1.0)); };
    // The integrand is entire in t and varies on the scale 1/kappa, so a fixed
    // composite Gauss-Legendre rule is accurate to rounding.
    const int panels = std::max(4, static_cast<int>(std::ceil(tp * (kernel.kappa_a() + kernel.kappa_r() + kernel.chi()))));
    const double width = tp / panels;
    double window = 0.0;
    for (int j = 0; j < panels; ++j)
        window += boost::math::quadrature::gauss<double, 30>::integrate(f, j * width, (j + 1) * width);
    const double tail = tail_integral(kernel, correlators_at(kernel, tp, delta_a, 1.0), timing.tau_w());
    return kernel.kappa_r() / (2.0 * tp) * (window + tail);
}

constexpr double eta_probe_population = 1e-4;

}  // namespace

CorrelatorKernel::CorrelatorKernel(const ModeParams& params)
    : kappa_a_(params.kappa_a()),
      kappa_r_(params.kappa_r()),
      kappa_r_c_(params.kappa_r_c()),
      chi_(params.chi()),
      gamma_(params.gamma()) {}

cplx correlator_n(const CorrelatorKernel& kernel, double t, cplx kappa, double delta, double n_vts) {
    if (!(t >= 0.0)) throw DomainError("correlator_n: t must be >= 0");
    const cplx p = 0.5 * kappa + I * delta;
    const cplx q = 0.5 * kappa - I * delta;
    const double a = 0.5 * kernel.kappa_a();
    return n_vts * kernel.prefactor() * two_time_integral(p, q, a, t, kernel.kappa_a());
}

cplx correlator_n_steady(const CorrelatorKernel& kernel, cplx kappa, double delta, double n_vts) {
    const cplx p = 0.5 * kappa + I * delta;
    const cplx q = 0.5 * kappa - I * delta;
    return n_vts * kernel.prefactor() * two_time_integral_steady(p, q, 0.5 * kernel.kappa_a());
}

double gamma_th(const ModeParams& params, double n_r_th) {
    if (!(n_r_th >= 0.0)) throw DomainError("gamma_th: population must be >= 0");
    const double kr = params.kappa_r();
    const cplx w0 = 1.0 + I * params.chi() / kr;
    const cplx shift = 4.0 * I * params.chi() * n_r_th / kr;
    // sqrt(w0^2 + shift) - w0 rewritten without cancellation at small n.
    const cplx diff = shift / (std::sqrt(w0 * w0 + shift) + w0);
    return 0.5 * kr * diff.real();
}

double gamma_th_slope(const ModeParams& params) {
    const double chi2 = params.chi() * params.chi();
    const double kr = params.kappa_r();
    return chi2 * kr / (chi2 + kr * kr);
}

double invert_gamma_th(const ModeParams& params, double gamma) {
    if (!(gamma >= 0.0)) throw DomainError("invert_gamma_th: rate must be >= 0");
    if (gamma == 0.0) return 0.0;
    const double slope = gamma_th_slope(params);
    if (!(slope > 0.0)) throw DomainError("invert_gamma_th: chi = 0 gives no dephasing");
    // gamma_th is concave, so the linear inverse is a lower bound.
    double lo = gamma / slope;
    double hi = 2.0 * lo;
    while (gamma_th(params, hi) < gamma) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) throw DomainError("invert_gamma_th: failed to bracket");
    }
    if (gamma_th(params, lo) >= gamma) return lo;
    auto f = [&](double n) { return gamma_th(params, n) - gamma; };
    std::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(50),
                                                          iters);
    return 0.5 * (a + b);
}

double dephasing_integrand(const ModeParams& params, double n_vts, const PulseTiming& timing, double delta_a,
                           double t) {
    if (!(t >= 0.0) || t > timing.tau()) throw DomainError("dephasing_integrand: t outside [0, tau]");
    const CorrelatorKernel kernel(params);
    const double tp = timing.tau_p();
    const double kr = kernel.kappa_r();
    if (t <= tp) return 0.5 * kr * ddag_d(correlators_at(kernel, t, delta_a, n_vts));
    const auto c = correlators_at(kernel, tp, delta_a, n_vts);
    const double dt = t - tp;
    const cplx gg = c.gg * std::exp(-kr * dt);
    const cplx ee = c.ee * std::exp(-kr * dt);
    const cplx ge = c.ge * std::exp(-cplx(kr, -kernel.chi()) * dt);
    return 0.5 * kr * ddag_d({gg, ee, ge});
}

double mean_dephasing_transmitted(const ModeParams& params, double n_vts, const PulseTiming& timing,
                                  double delta_a) {
    if (!(n_vts >= 0.0)) throw DomainError("mean_dephasing_transmitted: n_vts must be >= 0");
    return n_vts * mean_dephasing_per_photon(params, timing, delta_a);
}

double mean_dephasing_transmitted(const ModeParams& params, double n_vts, const PulseTiming& timing) {
    return mean_dephasing_transmitted(params, n_vts, timing, params.delta_a());
}

double eta_a(const ModeParams& params, const PulseTiming& timing, double delta_a) {
    const double rate = mean_dephasing_transmitted(params, eta_probe_population, timing, delta_a);
    const double n_eff = invert_gamma_th(params, std::max(rate, 0.0));
    return n_eff / (params.response_scale() * eta_probe_population);
}

double radiometer_response_from_eta(const ModeParams& params, const BathPopulations& baths, double eta) {
    const double link = baths.t_loss() * params.conversion_efficiency();
    const double reflected = baths.n_ext() + baths.n_add();
    const double inner = baths.n_vts() * link * eta + reflected * link * (1.0 - eta) +
                         baths.n_loss() * (1.0 - baths.t_loss()) + baths.n_vts() * baths.t_leak() * link;
    return params.response_scale() * inner;
}

double radiometer_response(const ModeParams& params, const BathPopulations& baths, const PulseTiming& timing,
                           double delta_a) {
    return radiometer_response_from_eta(params, baths, eta_a(params, timing, delta_a));
}

DephasingSpectrum response_spectrum(const ModeParams& params, const BathPopulations& baths,
                                    const PulseTiming& timing, std::span<const double> detunings) {
    DephasingSpectrum out{{detunings.begin(), detunings.end()}, {}, {}, timing};
    out.n_r_eff.reserve(detunings.size());
    for (double d : detunings) out.n_r_eff.push_back(radiometer_response(params, baths, timing, d));
    out.sigma.assign(detunings.size(), 0.0);
    return out;
}

double EtaCache::operator()(const PulseTiming& timing, double delta_a) const {
    const auto key = std::make_tuple(delta_a, timing.tau(), timing.tau_p());
    {
        std::lock_guard lock(mutex_);
        if (auto it = table_.find(key); it != table_.end()) return it->second;
    }
    const double value = eta_a(params_, timing, delta_a);
    std::lock_guard lock(mutex_);
    table_.emplace(key, value);
    return value;
}

}  // namespace qrad
