#include "fixtures.hpp"
#include "qrad/dephasing.hpp"
#include "qrad/errors.hpp"
#include "qrad/ramsey.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace qrad;

namespace {

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
};

Moments moments(const std::vector<double>& v) {
    double s = 0.0, s2 = 0.0;
    for (double x : v) {
        s += x;
        s2 += x * x;
    }
    const double n = static_cast<double>(v.size());
    const double mean = s / n;
    return {mean, std::sqrt((s2 - n * mean * mean) / (n - 1.0))};
}

double phase_distance(double a, double b) {
    const double d = std::remainder(a - b, 2.0 * std::numbers::pi);
    return std::abs(d);
}

}  // namespace

TEST_CASE("readout model contrast") {
    const ReadoutModel r(fixtures::qubit());
    CHECK(r.a0() == doctest::Approx(0.923).epsilon(1e-12));
    CHECK(r.fringe_contrast() == doctest::Approx(0.94 * 0.95).epsilon(1e-12));
    CHECK(ReadoutModel::ideal().a0() == 1.0);
    CHECK(r.measured_g(0.0) == doctest::Approx(0.04));
    CHECK(r.measured_g(1.0) == doctest::Approx(0.99));
    CHECK_THROWS_AS(ReadoutModel(0.6, 0.0, 0.0), ValidationError);
    CHECK_THROWS_AS(ReadoutModel(-0.1, 0.0, 0.0), ValidationError);
}

TEST_CASE("amp_off and amp_ratio") {
    const auto q = fixtures::qubit();
    CHECK(amp_off(q, PulseTiming(1e-15, 1e-15, 1)) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(amp_off(q, fixtures::timing()) == doctest::Approx(0.4585).epsilon(2e-4));
    CHECK(amp_off(q, PulseTiming(1.0, 0.5, 1)) < 1e-300);

    const auto t = fixtures::timing();
    CHECK(amp_ratio(q.gamma_2r(), q, t) == 1.0);
    CHECK(amp_ratio(0.0, q, t) == doctest::Approx(std::exp(-q.gamma_2r() * t.tau_p())));
    CHECK(amp_ratio(0.0, q, t) < 1.0);
    CHECK(amp_ratio(2.0 * q.gamma_2r(), q, t) == doctest::Approx(1.046).epsilon(5e-4));
    CHECK(amp_off(q, t) / amp_on(3e4, q, t) == doctest::Approx(amp_ratio(3e4, q, t)).epsilon(1e-14));
}

TEST_CASE("noiseless fringe is recovered exactly") {
    const ReadoutModel ideal = ReadoutModel::ideal();
    const ReadoutModel real(fixtures::qubit());
    for (double amp : {0.1, 0.4, 0.5}) {
        for (double phi0 : {0.0, std::numbers::pi / 3.0, 5.9}) {
            const auto f = ideal_fringe(amp, phi0, ideal);
            CHECK(std::abs(f.amplitude - amp) < 1e-10);
            CHECK(phase_distance(f.phase_offset, phi0) < 1e-10);
            CHECK(f.amp_sigma < 1e-10);
            const auto g = ideal_fringe(amp, phi0, real);
            CHECK(std::abs(g.amplitude - real.fringe_contrast() * amp) < 1e-10);
        }
    }
}

TEST_CASE("phase offset equivariance") {
    const ReadoutModel r(fixtures::qubit());
    const auto t = fixtures::timing();
    const auto a = synth_fringe(0.4, 1.0, r, t, 7);
    const auto b = synth_fringe(0.4, 1.0 + std::numbers::pi / 3.0, r, t, 7);
    CHECK(phase_distance(b.phase_offset - a.phase_offset, std::numbers::pi / 3.0) < 0.02);
    const auto e0 = ideal_fringe(0.4, 1.0, r);
    const auto e1 = ideal_fringe(0.4, 1.0 + std::numbers::pi / 3.0, r);
    CHECK(phase_distance(e1.phase_offset - e0.phase_offset, std::numbers::pi / 3.0) < 1e-10);
}

TEST_CASE("synth_fringe is deterministic and well formed") {
    const ReadoutModel r(fixtures::qubit());
    const auto t = fixtures::timing();
    const auto a = synth_fringe(0.3, 0.2, r, t, 99);
    const auto b = synth_fringe(0.3, 0.2, r, t, 99);
    const auto c = synth_fringe(0.3, 0.2, r, t, 100);
    REQUIRE(a.counts);
    CHECK(*a.counts == *b.counts);
    CHECK(*a.counts != *c.counts);
    for (std::size_t j = 0; j < a.phases.size(); ++j) {
        CHECK((*a.counts)[j] >= 0);
        CHECK((*a.counts)[j] <= static_cast<std::int64_t>(t.n_rep()));
        CHECK(a.p_click[j] >= 0.0);
        CHECK(a.p_click[j] <= 1.0);
    }
    CHECK_THROWS_AS(synth_fringe(0.6, 0.0, r, t, 1), DomainError);
}

TEST_CASE("fit limits") {
    const ReadoutModel ideal = ReadoutModel::ideal();
    const auto big = synth_fringe(0.5, 0.3, ideal, fixtures::timing(1.08e-6, 1e-6, 1'000'000), 3);
    CHECK(std::abs(big.amplitude - 0.5) < 3.0 * big.amp_sigma + 1e-12);
    const auto zero = synth_fringe(0.0, 0.0, ideal, fixtures::timing(), 5);
    CHECK(zero.amplitude < 3.0 * zero.amp_sigma);
}

TEST_CASE("amp_sigma agrees with the bootstrap spread") {
    const ReadoutModel r(fixtures::qubit());
    const auto t = fixtures::timing();
    std::vector<double> amps, sig;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        const auto f = synth_fringe(0.4, 0.7, r, t, 1000 + s);
        amps.push_back(f.amplitude);
        sig.push_back(f.amp_sigma);
    }
    const auto m = moments(amps);
    const double reported = moments(sig).mean;
    CHECK(m.sd == doctest::Approx(reported).epsilon(0.1));
    // Unbiased within 3 standard errors of the mean.
    CHECK(std::abs(m.mean - 0.4 * r.fringe_contrast()) < 3.0 * m.sd / std::sqrt(1000.0));
}

TEST_CASE("fit rejects degenerate grids") {
    RamseyFringe f;
    f.phases.assign(10, 0.5);
    f.p_click.assign(10, 0.5);
    CHECK_THROWS_AS(fit_fringe(f), FitError);
    f.phases = {0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    CHECK_THROWS_AS(fit_fringe(f), FitError);
    f.phases = {0, 1, 2, 3, 4, 5, 6};
    f.p_click.assign(7, 0.5);
    CHECK_THROWS_AS(fit_fringe(f), FitError);
    // Full span but only two distinct phases.
    f.phases = {0, 0, 0, 0, 0, 0, 0, 0, 2 * std::numbers::pi};
    f.p_click.assign(9, 0.5);
    CHECK_THROWS_AS(fit_fringe(f), FitError);
}

TEST_CASE("estimator algebraic inverse") {
    const auto q = fixtures::qubit();
    const auto t = fixtures::timing();
    const auto p = fixtures::device();
    const double gamma = 34019.8067;
    RamseyFringe off, on;
    off.amplitude = amp_off(q, t);
    on.amplitude = off.amplitude * std::exp(-(gamma - q.gamma_2r()) * t.tau_p());
    const auto est = estimate_n_r_eff(on, off, q, t, p);
    CHECK(est.gamma_mean == doctest::Approx(gamma).epsilon(1e-12));
    CHECK(est.n_r_eff == doctest::Approx(7e-3).epsilon(1e-6));
    // Only the supplied intrinsic-rate uncertainty contributes here.
    CHECK(est.gamma_sigma == doctest::Approx(q.delta_gamma_2r()).epsilon(1e-12));
    // Detectable above the floor set by the intrinsic-rate fluctuation.
    CHECK(est.n_r_eff > q.delta_gamma_2r() / p.kappa_r());

    on.amplitude = 0.0;
    CHECK_THROWS_AS(estimate_n_r_eff(on, off, q, t, p), EstimationError);
    on.amplitude = -0.1;
    CHECK_THROWS_AS(estimate_n_r_eff(on, off, q, t, p), EstimationError);
}

TEST_CASE("ratio estimator ignores common amplitude scale") {
    const auto q = fixtures::qubit();
    const auto t = fixtures::timing();
    const auto p = fixtures::device();
    const double gamma = 5e4;
    const auto ideal_on = ideal_fringe(amp_on(gamma, q, t), 0.4, ReadoutModel::ideal());
    const auto ideal_off = ideal_fringe(amp_off(q, t), 0.0, ReadoutModel::ideal());
    const ReadoutModel real(fixtures::qubit());
    const auto real_on = ideal_fringe(amp_on(gamma, q, t), 0.4, real);
    const auto real_off = ideal_fringe(amp_off(q, t), 0.0, real);
    const double g_ideal = estimate_n_r_eff(ideal_on, ideal_off, q, t, p).gamma_mean;
    const double g_real = estimate_n_r_eff(real_on, real_off, q, t, p).gamma_mean;
    CHECK(g_ideal == doctest::Approx(gamma).epsilon(1e-9));
    CHECK(g_real == doctest::Approx(gamma).epsilon(1e-9));
    auto scaled_on = real_on, scaled_off = real_off;
    scaled_on.amplitude *= 0.37;
    scaled_off.amplitude *= 0.37;
    CHECK(estimate_n_r_eff(scaled_on, scaled_off, q, t, p).gamma_mean == doctest::Approx(g_real).epsilon(1e-12));
}

TEST_CASE("round trip through the forward model") {
    auto spec = fixtures::qubit().spec();
    spec.delta_gamma_2r = 0.0;
    const QubitParams q(spec);
    const auto t = fixtures::timing();
    const auto p = fixtures::device();
    const ReadoutModel r(q);
    const double n_true = 7e-3;
    const double gamma = gamma_th(p, n_true);
    std::vector<double> est;
    int within = 0;
    double sigma_sum = 0.0;
    const int seeds = 500;
    for (int s = 0; s < seeds; ++s) {
        const auto on = synth_fringe(amp_on(gamma, q, t), 1.1, r, t, 2 * s);
        const auto off = synth_fringe(amp_off(q, t), 0.0, r, t, 2 * s + 1);
        const auto e = estimate_n_r_eff(on, off, q, t, p);
        est.push_back(e.n_r_eff);
        sigma_sum += e.sigma;
        if (std::abs(e.n_r_eff - n_true) < 3.0 * e.sigma) ++within;
    }
    const double sigma = sigma_sum / seeds;
    CHECK(within >= static_cast<int>(0.98 * seeds));
    CHECK(std::abs(moments(est).mean - n_true) < sigma / 3.0);
    CHECK(moments(est).sd == doctest::Approx(sigma).epsilon(0.15));
}

TEST_CASE("standard error scales as one over root n_rep") {
    auto spec = fixtures::qubit().spec();
    spec.delta_gamma_2r = 0.0;
    const QubitParams q(spec);
    const auto p = fixtures::device();
    const ReadoutModel r(q);
    const double gamma = gamma_th(p, 0.02);
    std::vector<double> log_n, log_sd;
    for (std::size_t n_rep : {100u, 1000u, 10000u}) {
        const auto t = fixtures::timing(1.08e-6, 1e-6, n_rep);
        std::vector<double> g;
        for (int s = 0; s < 400; ++s) {
            const auto on = synth_fringe(amp_on(gamma, q, t), 0.0, r, t, 10 * s);
            const auto off = synth_fringe(amp_off(q, t), 0.0, r, t, 10 * s + 1);
            g.push_back(estimate_n_r_eff(on, off, q, t, p).gamma_mean);
        }
        log_n.push_back(std::log(static_cast<double>(n_rep)));
        log_sd.push_back(std::log(moments(g).sd));
    }
    const double slope = (log_sd.back() - log_sd.front()) / (log_n.back() - log_n.front());
    CHECK(slope == doctest::Approx(-0.5).epsilon(0.14));
    const double mid = (log_sd[1] - log_sd[0]) / (log_n[1] - log_n[0]);
    CHECK(mid == doctest::Approx(-0.5).epsilon(0.2));
}
