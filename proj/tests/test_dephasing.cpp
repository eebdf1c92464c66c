#include "fixtures.hpp"
#include "qrad/dephasing.hpp"
#include "qrad/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

using namespace qrad;
using cplx = std::complex<double>;

namespace {

// Closed form for a real readout decay rate, written term by term.
cplx printed_correlator(const ModeParams& p, double t, double kappa, double delta, double n) {
    const double ka = p.kappa_a();
    const double g = p.gamma();
    const cplx i(0.0, 1.0);
    const double first = (ka / kappa - 1.0) * (1.0 - std::exp(-kappa * t)) /
                         (delta * delta + 0.25 * (ka - kappa) * (ka - kappa));
    const cplx second = (1.0 - std::exp((i * delta - 0.5 * (ka + kappa)) * t)) /
                        ((delta + i * ka / 2.0) * (delta + i * ka / 2.0) + kappa * kappa / 4.0);
    return n * ka * p.kappa_r_c() * g * (1.0 - g) * (first + 2.0 * second.real());
}

// Brute-force double integral over [0,t]^2 of exp(-p u - q v - a|u - v|),
// split along the diagonal so each piece is smooth.
cplx brute_two_time(cplx kappa, double delta, double a, double t) {
    const cplx i(0.0, 1.0);
    const cplx p = 0.5 * kappa + i * delta;
    const cplx q = 0.5 * kappa - i * delta;
    using gauss = boost::math::quadrature::gauss<double, 40>;
    auto tri = [&](cplx x, cplx y) {
        // int_0^t du int_0^u dv exp(-x u - y v - a (u - v))
        auto re = [&](double u) {
            auto inner = [&](double v) { return std::exp(-x * u - y * v - a * (u - v)).real(); };
            return gauss::integrate(inner, 0.0, u);
        };
        auto im = [&](double u) {
            auto inner = [&](double v) { return std::exp(-x * u - y * v - a * (u - v)).imag(); };
            return gauss::integrate(inner, 0.0, u);
        };
        return cplx(gauss::integrate(re, 0.0, t), gauss::integrate(im, 0.0, t));
    };
    return tri(p, q) + tri(q, p);
}

}  // namespace

TEST_CASE("gamma_th values and limits") {
    const auto p = fixtures::device();
    CHECK(gamma_th(p, 0.0) == 0.0);
    CHECK(gamma_th(p, 7e-3) == doctest::Approx(3e4).epsilon(0.2));
    CHECK(gamma_th(p, 7e-3) == doctest::Approx(34019.8067).epsilon(1e-8));
    const double lin = gamma_th_slope(p);
    CHECK(gamma_th(p, 1e-6) / 1e-6 == doctest::Approx(lin).epsilon(1e-3));
    CHECK_THROWS_AS(gamma_th(p, -1e-3), DomainError);
}

TEST_CASE("gamma_th is strictly increasing and concave") {
    const auto p = fixtures::device();
    const double h = 0.01;
    double prev = -1.0;
    for (double n = 0.0; n < 10.0; n += h) {
        const double g0 = gamma_th(p, n);
        CHECK(g0 > prev);
        prev = g0;
        const double second = gamma_th(p, n + 2 * h) - 2.0 * gamma_th(p, n + h) + g0;
        CHECK(second < 0.0);
    }
}

TEST_CASE("invert_gamma_th") {
    const auto p = fixtures::device();
    CHECK(invert_gamma_th(p, 0.0) == 0.0);
    const double n = invert_gamma_th(p, 3e4);
    CHECK(n >= 6.0e-3);
    CHECK(n <= 7.7e-3);
    CHECK(n == doctest::Approx(0.006171937).epsilon(1e-6));
    CHECK_THROWS_AS(invert_gamma_th(p, -1.0), DomainError);
    // Linear regime.
    const double g = 1e-6 * p.kappa_r();
    CHECK(invert_gamma_th(p, g) == doctest::Approx(g / gamma_th_slope(p)).epsilon(1e-5));
    for (double x = 1e-9; x <= 10.0; x *= 1.9)
        CHECK(invert_gamma_th(p, gamma_th(p, x)) == doctest::Approx(x).epsilon(1e-8));
}

TEST_CASE("correlator_n matches the closed form for real decay") {
    const auto p = fixtures::device();
    const CorrelatorKernel k(p);
    CHECK(correlator_n(k, 0.0, p.kappa_r(), 1e6, 1.0) == cplx(0.0, 0.0));
    for (double t : {1e-8, 2e-7, 1.08e-6, 5e-6}) {
        for (double d : {-2.0, -0.5, 0.0, 0.3, 1.5}) {
            const double delta = d * p.chi();
            const cplx ours = correlator_n(k, t, p.kappa_r(), delta, 0.7);
            const cplx ref = printed_correlator(p, t, p.kappa_r(), delta, 0.7);
            CHECK(ours.real() == doctest::Approx(ref.real()).epsilon(1e-9));
            CHECK(std::abs(ours.imag()) < 1e-9 * std::abs(ref.real()) + 1e-15);
        }
    }
}

TEST_CASE("correlator_n matches brute-force double integration for complex decay") {
    const auto p = fixtures::device();
    const CorrelatorKernel k(p);
    const double a = 0.5 * p.kappa_a();
    for (double t : {3e-7, 1.08e-6}) {
        for (cplx kappa : {cplx(p.kappa_r(), -p.chi()), cplx(p.kappa_r(), p.chi()), cplx(p.kappa_r(), 0.0)}) {
            for (double d : {-1.0, 0.0, 0.5}) {
                const cplx ours = correlator_n(k, t, kappa, d * p.chi(), 1.0);
                const cplx ref = k.prefactor() * brute_two_time(kappa, d * p.chi(), a, t);
                CHECK(std::abs(ours - ref) <= 1e-8 * std::abs(ref) + 1e-14);
            }
        }
    }
}

TEST_CASE("correlator_n across the removable singularity") {
    // kappa_r equal to kappa_a and zero detuning put the divided difference at h = 0.
    auto s = fixtures::device().spec();
    s.kappa_r_c = s.kappa_a_c + s.kappa_a_i - s.kappa_r_i;
    const ModeParams p(s);
    const CorrelatorKernel k(p);
    const double t = 1.08e-6;
    const double a = 0.5 * p.kappa_a();
    const cplx at = correlator_n(k, t, p.kappa_a(), 0.0, 1.0);
    const cplx ref = k.prefactor() * brute_two_time(p.kappa_a(), 0.0, a, t);
    CHECK(std::abs(at - ref) <= 1e-9 * std::abs(ref));
    for (double eps : {1e-9, 1e-7, 1e-5, 1e-3}) {
        const cplx near = correlator_n(k, t, p.kappa_a() * (1.0 + eps), 0.0, 1.0);
        const cplx ref2 = k.prefactor() * brute_two_time(p.kappa_a() * (1.0 + eps), 0.0, a, t);
        CHECK(std::abs(near - ref2) <= 1e-8 * std::abs(ref2));
    }
}

TEST_CASE("diagonal correlators are populations") {
    const auto p = fixtures::device();
    const CorrelatorKernel k(p);
    for (double t = 0.0; t < 4e-6; t += 1.3e-7)
        for (double d = -4.0; d <= 4.0; d += 0.37) CHECK(correlator_n(k, t, p.kappa_r(), d * p.chi(), 1.0).real() >= 0.0);
}

TEST_CASE("steady state equals the Lorentzian-filtered spectrum") {
    const auto p = fixtures::device();
    const CorrelatorKernel k(p);
    const double ka = p.kappa_a();
    const double kr = p.kappa_r();
    boost::math::quadrature::sinh_sinh<double> integrator;
    for (double d : {0.0, 0.23, 1.0, 3.0}) {
        const double delta = d * p.chi();
        // Antenna transmission times the readout filter, integrated over w / 2 pi.
        auto f = [&](double x) {
            const double w = x * kr;
            const double ta = p.kappa_a_c() * p.kappa_a_i() / (w * w + ka * ka / 4.0);
            return kr * ta * p.kappa_r_c() / ((w - delta) * (w - delta) + kr * kr / 4.0) / (2.0 * M_PI);
        };
        const double ref = integrator.integrate(f);
        const cplx ss = correlator_n_steady(k, kr, delta, 1.0);
        CHECK(ss.real() == doctest::Approx(ref).epsilon(1e-6));
        // And the finite-time correlator approaches it.
        CHECK(correlator_n(k, 200.0 / kr, kr, delta, 1.0).real() == doctest::Approx(ss.real()).epsilon(1e-9));
    }
}

TEST_CASE("mean dephasing: quadrature of the integrand reproduces the rate") {
    const auto p = fixtures::device();
    const auto t = fixtures::timing();
    for (double d : {0.0, 0.5, 1.3}) {
        const double delta = d * p.chi();
        auto f = [&](double s) { return dephasing_integrand(p, 1.0, t, delta, s); };
        using gk = boost::math::quadrature::gauss_kronrod<double, 61>;
        const double total = gk::integrate(f, 0.0, t.tau_p(), 6, 1e-10) + gk::integrate(f, t.tau_p(), t.tau(), 6, 1e-10);
        CHECK(mean_dephasing_transmitted(p, 1.0, t, delta) == doctest::Approx(total / t.tau_p()).epsilon(1e-9));
    }
    CHECK(mean_dephasing_transmitted(p, 1.0, t, 0.5 * p.chi()) == doctest::Approx(526653.9208).epsilon(1e-8));
}

TEST_CASE("mean dephasing properties") {
    const auto p = fixtures::device();
    const auto t = fixtures::timing();
    CHECK(mean_dephasing_transmitted(p, 0.0, t, 0.3 * p.chi()) == 0.0);
    for (double d : {-1.0, 0.1, 0.5, 2.0}) {
        const double g1 = mean_dephasing_transmitted(p, 0.37, t, d * p.chi());
        const double g2 = mean_dephasing_transmitted(p, 0.74, t, d * p.chi());
        CHECK(g2 / g1 == doctest::Approx(2.0).epsilon(1e-12));
        const double gm = mean_dephasing_transmitted(p, 0.37, t, -d * p.chi());
        CHECK(gm == doctest::Approx(g1).epsilon(1e-6));
    }
    const double near = mean_dephasing_transmitted(p, 1.0, t, 0.5 * p.chi());
    CHECK(mean_dephasing_transmitted(p, 1.0, t, 30.0 * p.chi()) < 1e-3 * near);
    CHECK_THROWS_AS(mean_dephasing_transmitted(p, -1.0, t, 0.0), DomainError);
    CHECK_THROWS_AS(dephasing_integrand(p, 1.0, t, 0.0, 1.1 * t.tau()), DomainError);
}

TEST_CASE("integrand is continuous at the end of the pump") {
    const auto p = fixtures::device();
    const auto t = fixtures::timing();
    for (double d : {0.0, 0.5, 1.7}) {
        const double left = dephasing_integrand(p, 1.0, t, d * p.chi(), t.tau_p() * (1.0 - 1e-12));
        const double right = dephasing_integrand(p, 1.0, t, d * p.chi(), t.tau_p() * (1.0 + 1e-12));
        CHECK(right == doctest::Approx(left).epsilon(1e-9));
    }
}

TEST_CASE("eta_a reference values") {
    const auto p = fixtures::device();
    const auto t = fixtures::timing();
    CHECK(eta_a(p, t, 0.0) == doctest::Approx(0.1411715591).epsilon(1e-7));
    CHECK(eta_a(p, t, 0.5 * p.chi()) == doctest::Approx(0.2482770213).epsilon(1e-7));
    CHECK(eta_a(p, t, p.chi()) == doctest::Approx(0.0370455769).epsilon(1e-7));
    CHECK(eta_a(p, t, 20.0 * p.chi()) < 1e-3);
    EtaCache cache(p);
    CHECK(cache(t, 0.5 * p.chi()) == eta_a(p, t, 0.5 * p.chi()));
    CHECK(cache(t, 0.5 * p.chi()) == eta_a(p, t, 0.5 * p.chi()));
}

TEST_CASE("eta_a stays in [0,1] and peaks at the dressed lines") {
    const auto p = fixtures::device();
    for (double tp : {1.08e-6, 2.5e-6}) {
        const auto t = fixtures::timing(tp);
        double best = -1.0;
        double arg = 0.0;
        const double step = 0.05 * p.chi();
        for (double d = -3.0 * p.chi(); d <= 3.0 * p.chi() + 1e-3; d += step) {
            const double e = eta_a(p, t, d);
            CHECK(e >= 0.0);
            CHECK(e <= 1.0);
            if (e > best + 1e-12) {
                best = e;
                arg = d;
            }
        }
        CHECK(std::abs(std::abs(arg) - 0.5 * p.chi()) <= step + 1e-6);
    }
}

TEST_CASE("eta_a peaks narrow with longer pulses") {
    const auto p = fixtures::device();
    // Outer half-maximum detuning of the g-line peak.
    auto outer_half_width = [&](double tp) {
        const auto t = fixtures::timing(tp);
        double best = 0.0;
        double arg = 0.0;
        for (double d = 0.3; d <= 0.7; d += 0.005) {
            const double e = eta_a(p, t, d * p.chi());
            if (e > best) {
                best = e;
                arg = d;
            }
        }
        double d = arg;
        while (eta_a(p, t, d * p.chi()) > 0.5 * best) d += 0.002;
        return d - arg;
    };
    const double w_short = outer_half_width(0.54e-6);
    const double w_mid = outer_half_width(1.08e-6);
    const double w_long = outer_half_width(2.5e-6);
    CHECK(w_short > w_mid);
    CHECK(w_mid > w_long);
}

TEST_CASE("radiometer_response") {
    const auto p = fixtures::device();
    const auto t = fixtures::timing();
    CHECK(radiometer_response(p, BathPopulations({}), t, 0.3 * p.chi()) == 0.0);

    // eta_a cancels when all reflected and lost baths equal the VTS bath.
    const BathPopulations flat({0.8, 0.3, 0.5, 0.8, 0.6, 0.0});
    const double ref = radiometer_response(p, flat, t, 0.0);
    for (double d : {-2.0, -0.5, 0.5, 1.0, 3.0})
        CHECK(radiometer_response(p, flat, t, d * p.chi()) == doctest::Approx(ref).epsilon(1e-12));

    // Far detuned: white-noise terms only.
    const BathPopulations b({1.59, 0.014, 0.2, 0.09, 0.57, 0.046});
    const double k = p.kappa_a() * p.kappa_r_c() / (p.kappa_r() * p.kappa_r());
    const double white = k * (b.n_loss() * (1 - b.t_loss()) + b.n_vts() * b.t_leak() * b.t_loss() +
                              (b.n_ext() + b.n_add()) * b.t_loss());
    CHECK(radiometer_response(p, b, t, 40.0 * p.chi()) == doctest::Approx(white).epsilon(1e-4));

    const std::vector<double> grid{-p.chi(), 0.0, p.chi()};
    const auto spec = response_spectrum(p, b, t, grid);
    REQUIRE(spec.n_r_eff.size() == 3);
    CHECK(spec.sigma[1] == 0.0);
    CHECK(spec.n_r_eff[2] == doctest::Approx(radiometer_response(p, b, t, p.chi())));
}
