#include "fixtures.hpp"
#include "qrad/dephasing.hpp"
#include "qrad/errors.hpp"
#include "qrad/ode.hpp"
#include "qrad/oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using namespace qrad;
using cplx = std::complex<double>;

TEST_CASE("Gaussian normalization identity against Monte Carlo") {
    // E exp(-A|x|^2 - B|y|^2 - C x y* - D y x*) with D = conj(C) is real and
    // positive definite; integrate over both complex planes by importance sampling.
    const double a = 1.7, b = 0.9;
    const cplx c(0.4, -0.7);
    const cplx d = std::conj(c);
    const double e = 2.3;
    REQUIRE(a * b - std::norm(c) > 0.0);
    std::mt19937_64 rng(12345);
    const double s = 0.8;  // sampling variance per complex component
    std::normal_distribution<double> n01(0.0, std::sqrt(s / 2.0));
    const int n = 2'000'000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const cplx x(n01(rng), n01(rng));
        const cplx y(n01(rng), n01(rng));
        const double density = std::exp(-(std::norm(x) + std::norm(y)) / s) / (std::numbers::pi * std::numbers::pi * s * s);
        const cplx expo = -a * std::norm(x) - b * std::norm(y) - c * x * std::conj(y) - d * y * std::conj(x);
        const double w = e * std::exp(expo.real()) / density;
        sum += w;
        sum2 += w * w;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    const GaussianAnsatzState st{a, b, c, d, e, 0.0};
    CHECK(std::abs(mean - st.norm().real()) < 4.0 * se);
    CHECK(se < 0.01 * mean);
}

TEST_CASE("ansatz_rhs limits") {
    const auto p = fixtures::device();
    const GaussianAnsatzState s{2.0, 3.0, 0.0, 0.0, 5.0, 0.0};
    const auto d = ansatz_rhs(s, p, 0.0, 0.0, false);
    CHECK(d.a == cplx(p.kappa_a() * 2.0, 0.0));
    CHECK(d.c == cplx(0.0, 0.0));
    const auto on = ansatz_rhs(s, p, 0.0, 0.0, true);
    CHECK(on.c.real() == doctest::Approx(std::sqrt(p.kappa_a_c() * p.kappa_r_c()) * 3.0));

    // chi = 0, zero detuning: E grows as exp((kappa_a + kappa_r) t).
    auto spec = p.spec();
    spec.chi = 0.0;
    const ModeParams p0(spec);
    auto f = [&](double t, const ode::State<5>& y) {
        return ansatz_rhs(GaussianAnsatzState::unpack(y, t), p0, 0.0, 0.0, true).pack();
    };
    const double t1 = 1e-6;
    const auto y = ode::integrate<5>(f, 0.0, t1, s.pack(), ode::Tolerances{1e-12, 1e-14});
    CHECK(y[4].real() == doctest::Approx(5.0 * std::exp((p.kappa_a() + p.kappa_r()) * t1)).epsilon(1e-9));

    // With the cascade off, C and D stay zero and A evolves on its own.
    auto g = [&](double t, const ode::State<5>& y) {
        return ansatz_rhs(GaussianAnsatzState::unpack(y, t), p, 0.0, 0.0, false).pack();
    };
    const auto z = ode::integrate<5>(g, 0.0, t1, s.pack(), ode::Tolerances{1e-12, 1e-14});
    CHECK(z[0].real() == doctest::Approx(2.0 * std::exp(p.kappa_a() * t1)).epsilon(1e-9));
    CHECK(std::abs(z[2]) == 0.0);
}

TEST_CASE("adaptive integration agrees with step-halved fixed-step reference") {
    const auto p = fixtures::device();
    const double n = 1e-3;
    const double delta = 0.5 * p.chi();
    const double tp = 1.08e-6;
    auto f = [&](double t, const ode::State<5>& y) {
        return ansatz_rhs(GaussianAnsatzState::unpack(y, t), p, n, delta, true).pack();
    };
    const auto y0 = initial_state(p, n, 1e-8).pack();
    const auto coarse = ode::integrate_fixed<5>(f, 0.0, tp, y0, 2000);
    const auto fine = ode::integrate_fixed<5>(f, 0.0, tp, y0, 4000);
    ode::Stats stats;
    const auto adaptive = ode::integrate<5>(f, 0.0, tp, y0, ode::Tolerances{1e-11, 1e-12}, &stats);
    CHECK(stats.accepted > 0);
    for (int i = 0; i < 5; ++i) {
        const double scale = std::abs(fine[i]) + 1.0;
        const double richardson = std::abs(fine[i] - coarse[i]) / 31.0;
        CHECK(richardson / scale < 1e-9);
        CHECK(std::abs(adaptive[i] - fine[i]) / scale < 1e-8);
    }
}

TEST_CASE("integrator reports failure on blow-up") {
    auto f = [](double, const ode::State<1>& y) { return ode::State<1>{y[0] * y[0]}; };
    CHECK_THROWS_AS(ode::integrate<1>(f, 0.0, 2.0, ode::State<1>{1.0}, ode::Tolerances{}), IntegrationError);
}

TEST_CASE("initial state integrates to one") {
    const auto p = fixtures::device();
    for (double n : {1e-4, 0.1, 2.0}) CHECK(std::abs(initial_state(p, n, 1e-8).norm()) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("dephasing_ratio limits") {
    const auto p = fixtures::device();
    const auto t = fixtures::timing();
    CHECK(dephasing_ratio(p, 0.0, t, 0.0) == 1.0);
    CHECK(dephasing_ratio(p, 1e-9, t, 0.5 * p.chi()) == doctest::Approx(1.0).epsilon(1e-6));

    auto spec = p.spec();
    spec.chi = 0.0;
    const ModeParams p0(spec);
    for (double n : {1e-3, 0.5})
        for (double d : {0.0, 2e6}) CHECK(dephasing_ratio(p0, n, t, d) == doctest::Approx(1.0).epsilon(1e-8));

    OracleConfig bad;
    bad.epsilon = 0.0;
    CHECK_THROWS_AS(dephasing_ratio(p, 0.1, t, 0.0, bad), ValidationError);
    bad.epsilon = 1e-2;
    CHECK_THROWS_AS(dephasing_ratio(p, 0.1, t, 0.0, bad), ValidationError);
}

TEST_CASE("dephasing_ratio matches analytic theory at small population") {
    const auto p = fixtures::device();
    const auto t = fixtures::timing();
    for (double n : {1e-3, 0.01 / p.gamma()}) {
        for (double d : {0.0, 0.5, 1.0}) {
            const double oracle = mean_dephasing_oracle(p, n, t, d * p.chi());
            const double analytic = mean_dephasing_transmitted(p, n, t, d * p.chi());
            CHECK(oracle == doctest::Approx(analytic).epsilon(0.02));
        }
    }
}

TEST_CASE("oracle dephasing falls below the linear theory for large population") {
    const auto p = fixtures::device();
    const auto t = fixtures::timing();
    for (double n : {1.0, 2.0}) {
        const double d = 0.5 * p.chi();
        CHECK(mean_dephasing_oracle(p, n, t, d) < mean_dephasing_transmitted(p, n, t, d));
    }
}

TEST_CASE("epsilon convergence") {
    const auto p = fixtures::device();
    const auto t = fixtures::timing();
    OracleConfig c;
    OracleConfig c10 = c;
    c10.epsilon = 0.1 * c.epsilon;
    for (double n : {1e-3, 0.1, 2.0})
        for (double d : {0.0, 0.5})
            CHECK(std::abs(dephasing_ratio(p, n, t, d * p.chi(), c) - dephasing_ratio(p, n, t, d * p.chi(), c10)) <
                  1e-6);
    c.check_convergence = true;
    CHECK_NOTHROW(dephasing_ratio(p, 0.1, t, 0.0, c));
    c.convergence_tol = 1e-18;
    CHECK_THROWS_AS(dephasing_ratio(p, 0.1, t, 0.0, c), ConvergenceError);
}

TEST_CASE("ratio is nonincreasing in pump duration") {
    const auto p = fixtures::device();
    double prev = 1.0;
    for (double tp = 0.2e-6; tp <= 3e-6; tp += 0.2e-6) {
        const double r = dephasing_ratio(p, 0.05, fixtures::timing(tp), 0.5 * p.chi());
        CHECK(r <= prev + 1e-12);
        prev = r;
    }
}

TEST_CASE("eta_a_oracle") {
    const auto p = fixtures::device();
    const auto t = fixtures::timing();
    for (double d : {-1.0, 0.0, 0.5, 2.0})
        CHECK(std::abs(eta_a_oracle(p, t, d * p.chi(), 1e-3) - eta_a(p, t, d * p.chi())) < 0.02);
    CHECK(eta_a_oracle(p, t, 20.0 * p.chi(), 1e-3) < 1e-3);
    const double lin = eta_a_oracle(p, t, 0.5 * p.chi(), 1e-3);
    const double big = eta_a_oracle(p, t, 0.5 * p.chi(), 2.0);
    CHECK(std::abs(big - lin) > 0.05 * lin);
    CHECK_THROWS_AS(eta_a_oracle(p, t, 0.0, 0.0), DomainError);
}

TEST_CASE("pump-off dissipation switch") {
    const auto p = fixtures::device();
    const auto t = fixtures::timing();
    OracleConfig isolated;
    isolated.keep_dissipation_when_off = false;
    const double kept = dephasing_ratio(p, 0.05, t, 0.5 * p.chi());
    const double iso = dephasing_ratio(p, 0.05, t, 0.5 * p.chi(), isolated);
    CHECK(std::isfinite(iso));
    // Without the coupled port the cavity photons linger, so dephasing grows.
    CHECK(iso < kept);
}
