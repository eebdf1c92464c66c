#include "qrad/ramsey.hpp"

#include "qrad/dephasing.hpp"
#include "qrad/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

namespace qrad {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

bool probability(double p) { return std::isfinite(p) && p >= 0.0 && p < 1.0; }

double wrap_phase(double phi) {
    double w = std::fmod(phi, two_pi);
    if (w < 0.0) w += two_pi;
    return w;
}

// d gamma_th / dn at n.
double gamma_th_derivative(const ModeParams& params, double n) {
    const std::complex<double> i(0.0, 1.0);
    const double kr = params.kappa_r();
    const std::complex<double> w0 = 1.0 + i * params.chi() / kr;
    const std::complex<double> root = std::sqrt(w0 * w0 + 4.0 * i * params.chi() * n / kr);
    return (i * params.chi() / root).real();
}

}  // namespace

ReadoutModel::ReadoutModel(double p_e_ini, double p_read_e_given_g, double p_read_g_given_e)
    : p_e_ini_(p_e_ini), p_eg_(p_read_e_given_g), p_ge_(p_read_g_given_e) {
    if (!probability(p_e_ini) || !probability(p_read_e_given_g) || !probability(p_read_g_given_e))
        throw ValidationError("ReadoutModel: probabilities must lie in [0, 1)");
    if (!(a0() > 0.0)) throw ValidationError("ReadoutModel: initial contrast must be positive");
}

ReadoutModel::ReadoutModel(const QubitParams& q)
    : ReadoutModel(q.p_e_ini(), q.p_read_e_given_g(), q.p_read_g_given_e()) {}

double ReadoutModel::p_g0() const { return (1.0 - p_e_ini_) * (1.0 - p_eg_) + p_e_ini_ * p_ge_; }

double ReadoutModel::fringe_contrast() const { return (1.0 - 2.0 * p_e_ini_) * (1.0 - p_eg_ - p_ge_); }

double ReadoutModel::measured_g(double p_g) const { return p_ge_ + p_g * (1.0 - p_eg_ - p_ge_); }

std::vector<double> default_phase_grid() {
    constexpr int n = 21;
    std::vector<double> phases(n);
    for (int j = 0; j < n; ++j) phases[j] = 2.0 * two_pi * j / n;
    return phases;
}

double amp_off(const QubitParams& qubit, const PulseTiming& timing) {
    return 0.5 * std::exp(-qubit.gamma_2r() * timing.tau());
}

double amp_on(double gamma_a_mean, const QubitParams& qubit, const PulseTiming& timing) {
    return amp_off(qubit, timing) / amp_ratio(gamma_a_mean, qubit, timing);
}

double amp_ratio(double gamma_a_mean, const QubitParams& qubit, const PulseTiming& timing) {
    return std::exp((gamma_a_mean - qubit.gamma_2r()) * timing.tau_p());
}

namespace {

void check_amplitude(double amplitude) {
    if (!(amplitude >= 0.0 && amplitude <= 0.5)) throw DomainError("fringe amplitude must lie in [0, 0.5]");
}

std::vector<double> fringe_probabilities(double amplitude, double phase_offset, const ReadoutModel& readout,
                                         const std::vector<double>& phases) {
    const double polarization = 1.0 - 2.0 * readout.p_e_ini();
    std::vector<double> p(phases.size());
    for (std::size_t j = 0; j < phases.size(); ++j) {
        const double p_g = 0.5 - polarization * amplitude * std::cos(phases[j] - phase_offset);
        p[j] = std::clamp(readout.measured_g(p_g), 0.0, 1.0);
    }
    return p;
}

void store_fit(RamseyFringe& f) {
    const FringeFit fit = fit_fringe(f);
    f.amplitude = fit.amplitude;
    f.phase_offset = fit.phase_offset;
    f.amp_sigma = fit.amp_sigma;
}

}  // namespace

RamseyFringe ideal_fringe(double amplitude, double phase_offset, const ReadoutModel& readout,
                          const std::vector<double>& phases) {
    check_amplitude(amplitude);
    RamseyFringe f;
    f.phases = phases;
    f.p_click = fringe_probabilities(amplitude, phase_offset, readout, phases);
    store_fit(f);
    return f;
}

RamseyFringe synth_fringe(double amplitude, double phase_offset, const ReadoutModel& readout,
                          const PulseTiming& timing, std::uint64_t seed, const std::vector<double>& phases) {
    check_amplitude(amplitude);
    RamseyFringe f;
    f.phases = phases;
    f.n_rep = timing.n_rep();
    const auto p = fringe_probabilities(amplitude, phase_offset, readout, phases);
    std::mt19937_64 rng(seed);
    std::vector<std::int64_t> counts(phases.size());
    f.p_click.resize(phases.size());
    for (std::size_t j = 0; j < phases.size(); ++j) {
        std::binomial_distribution<std::int64_t> draw(static_cast<std::int64_t>(f.n_rep), p[j]);
        counts[j] = draw(rng);
        f.p_click[j] = static_cast<double>(counts[j]) / static_cast<double>(f.n_rep);
    }
    f.counts = std::move(counts);
    store_fit(f);
    return f;
}

FringeFit fit_fringe(const RamseyFringe& fringe) {
    const std::size_t n = fringe.phases.size();
    if (n < 8 || fringe.p_click.size() != n) throw FitError("fit_fringe: need >= 8 phase points with data");
    const auto [lo, hi] = std::minmax_element(fringe.phases.begin(), fringe.phases.end());
    // Equivalent to >= 2 pi coverage for a uniform grid that excludes its endpoint.
    const double coverage = (*hi - *lo) * static_cast<double>(n) / static_cast<double>(n - 1);
    if (!(coverage >= two_pi * (1.0 - 1e-9))) throw FitError("fit_fringe: phases must span a full period");

    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (std::size_t j = 0; j < n; ++j) {
        x(j, 0) = 1.0;
        x(j, 1) = std::cos(fringe.phases[j]);
        x(j, 2) = std::sin(fringe.phases[j]);
        y(j) = fringe.p_click[j];
    }

    auto solve = [&](const Eigen::VectorXd& w, Eigen::Matrix3d& inv_normal) {
        const Eigen::Matrix3d normal = x.transpose() * w.asDiagonal() * x;
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(normal, Eigen::EigenvaluesOnly);
        const Eigen::Vector3d ev = eig.eigenvalues();  // ascending
        if (!(ev(0) > 1e-10 * ev(2))) throw FitError("fit_fringe: degenerate phase grid");
        inv_normal = normal.inverse();
        return Eigen::Vector3d(inv_normal * (x.transpose() * w.asDiagonal() * y));
    };

    Eigen::Matrix3d inv_normal;
    Eigen::Vector3d beta = solve(Eigen::VectorXd::Ones(n), inv_normal);
    Eigen::Matrix3d cov;
    if (fringe.counts && fringe.n_rep > 0) {
        const double nrep = static_cast<double>(fringe.n_rep);
        const double floor = 0.5 / nrep;
        Eigen::VectorXd w(n);
        for (int pass = 0; pass < 2; ++pass) {
            const Eigen::VectorXd model = x * beta;
            for (std::size_t j = 0; j < n; ++j) {
                const double p = std::clamp(model(j), floor, 1.0 - floor);
                w(j) = nrep / (p * (1.0 - p));
            }
            beta = solve(w, inv_normal);
        }
        cov = inv_normal;
    } else {
        const Eigen::VectorXd r = y - x * beta;
        const double s2 = n > 3 ? r.squaredNorm() / static_cast<double>(n - 3) : 0.0;
        cov = s2 * inv_normal;
    }

    FringeFit fit;
    const double a = beta(1);
    const double b = beta(2);
    fit.offset = beta(0);
    fit.amplitude = std::hypot(a, b);
    fit.phase_offset = fit.amplitude > 0.0 ? wrap_phase(std::atan2(-b, -a)) : 0.0;
    if (fit.amplitude > 0.0) {
        const double ja = a / fit.amplitude;
        const double jb = b / fit.amplitude;
        fit.amp_sigma = std::sqrt(std::max(0.0, ja * ja * cov(1, 1) + 2.0 * ja * jb * cov(1, 2) + jb * jb * cov(2, 2)));
    } else {
        fit.amp_sigma = std::sqrt(std::max(0.0, 0.5 * (cov(1, 1) + cov(2, 2))));
    }
    return fit;
}

PopulationEstimate estimate_n_r_eff(const RamseyFringe& on, const RamseyFringe& off, const QubitParams& qubit,
                                    const PulseTiming& timing, const ModeParams& params) {
    if (!(on.amplitude > 0.0)) throw EstimationError("estimate_n_r_eff: A_on must be positive");
    if (!(off.amplitude > 0.0)) throw EstimationError("estimate_n_r_eff: A_off must be positive");
    const double tp = timing.tau_p();
    PopulationEstimate est;
    est.gamma_mean = std::log(off.amplitude / on.amplitude) / tp + qubit.gamma_2r();
    const double rel_on = on.amp_sigma / on.amplitude;
    const double rel_off = off.amp_sigma / off.amplitude;
    const double dg = qubit.delta_gamma_2r();
    est.gamma_sigma = std::sqrt((rel_on * rel_on + rel_off * rel_off) / (tp * tp) + dg * dg);

    // Below zero the inverse is continued linearly so that noise around a
    // vanishing signal averages out.
    if (est.gamma_mean > 0.0) {
        est.n_r_eff = invert_gamma_th(params, est.gamma_mean);
        est.sigma = est.gamma_sigma / gamma_th_derivative(params, est.n_r_eff);
    } else {
        const double slope = gamma_th_slope(params);
        est.n_r_eff = est.gamma_mean / slope;
        est.sigma = est.gamma_sigma / slope;
    }
    return est;
}

}  // namespace qrad
