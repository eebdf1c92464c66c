#include "qrad/calibration.hpp"

#include "qrad/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

namespace qrad {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double sq(double x) { return x * x; }

// Inverse-variance mean; points with zero sigma dominate, so they are
// averaged on their own.
Estimate iv_mean(const std::vector<Estimate>& xs) {
    if (xs.empty()) throw ProtocolError("calibration: nothing to average");
    std::vector<Estimate> exact;
    for (const auto& x : xs)
        if (x.sigma == 0.0) exact.push_back(x);
    if (!exact.empty()) {
        double s = 0.0;
        for (const auto& x : exact) s += x.value;
        return {s / static_cast<double>(exact.size()), 0.0};
    }
    double sw = 0.0;
    double swx = 0.0;
    for (const auto& x : xs) {
        const double w = 1.0 / sq(x.sigma);
        sw += w;
        swx += w * x.value;
    }
    return {swx / sw, std::sqrt(1.0 / sw)};
}

bool is_far(double delta_a, double far_threshold) { return std::abs(delta_a) >= far_threshold; }

std::vector<DetuningLine> far_lines(const std::vector<DetuningLine>& lines, double far_threshold) {
    std::vector<DetuningLine> out;
    for (const auto& l : lines)
        if (is_far(l.delta_a, far_threshold)) out.push_back(l);
    if (out.empty()) throw ProtocolError("calibration: no far-detuned reference lines");
    return out;
}

Estimate far_slope(const std::vector<DetuningLine>& lines, double far_threshold) {
    std::vector<Estimate> xs;
    for (const auto& l : far_lines(lines, far_threshold)) xs.push_back({l.line.slope, l.line.slope_sigma});
    return iv_mean(xs);
}

Estimate far_intercept(const std::vector<DetuningLine>& lines, double far_threshold) {
    std::vector<Estimate> xs;
    for (const auto& l : far_lines(lines, far_threshold)) xs.push_back({l.line.intercept, l.line.intercept_sigma});
    return iv_mean(xs);
}

const EtaEstimate* find_eta(std::span<const EtaEstimate> eta, double delta_a) {
    for (const auto& e : eta)
        if (e.delta_a == delta_a) return &e;
    return nullptr;
}

bool usable(const EtaEstimate* e) { return e && !e->far && e->eta > 0.0 && e->eta > 3.0 * e->sigma; }

// kappa_a kappa_rc / kappa_r^2 and the same times the conversion efficiency.
double k_scale(const ModeParams& p) { return p.response_scale(); }
double k_link(const ModeParams& p) { return p.response_scale() * p.conversion_efficiency(); }

std::vector<EtaEstimate> eta_from_lines(const std::vector<DetuningLine>& lines, double far_threshold) {
    const Estimate ref = far_slope(lines, far_threshold);
    if (!(ref.value > 0.0)) throw ProtocolError("calibration: far-detuned slope must be positive");
    std::vector<EtaEstimate> out;
    for (const auto& l : lines) {
        const double r = l.line.slope / ref.value;
        const double sigma = std::sqrt(sq(l.line.slope_sigma / ref.value) + sq(r * ref.sigma / ref.value));
        out.push_back({l.delta_a, 1.0 - r, sigma, is_far(l.delta_a, far_threshold)});
    }
    return out;
}

LossEstimate losses_from_lines(const std::vector<DetuningLine>& lines, std::span<const EtaEstimate> eta,
                               const ModeParams& params, double far_threshold) {
    const Estimate lf = far_slope(lines, far_threshold);
    const double kc = k_link(params);
    std::vector<Estimate> per;
    for (const auto& l : lines) {
        const EtaEstimate* e = find_eta(eta, l.delta_a);
        if (is_far(l.delta_a, far_threshold) || !usable(e)) continue;
        const double x = (l.line.slope - lf.value) / (kc * e->eta);
        const double s2 = (sq(l.line.slope_sigma) + sq(lf.sigma)) / sq(kc * e->eta) + sq(x * e->sigma / e->eta);
        per.push_back({x, std::sqrt(s2)});
    }
    if (per.empty()) throw ProtocolError("calibration: t_loss unidentifiable (eta_a consistent with zero)");
    LossEstimate out;
    out.t_loss = iv_mean(per);
    const double t = out.t_loss.value;
    out.t_leak.value = lf.value / (kc * t);
    out.t_leak.sigma = std::sqrt(sq(lf.sigma / (kc * t)) + sq(out.t_leak.value * out.t_loss.sigma / t));
    return out;
}

BathEstimate baths_from_lines(const std::vector<DetuningLine>& lines, std::span<const EtaEstimate> eta,
                              const Estimate& t_loss, const ModeParams& params, double far_threshold) {
    const Estimate mf = far_intercept(lines, far_threshold);
    const double kc = k_link(params);
    const double k = k_scale(params);
    const double t = t_loss.value;
    std::vector<Estimate> per;
    for (const auto& l : lines) {
        const EtaEstimate* e = find_eta(eta, l.delta_a);
        if (is_far(l.delta_a, far_threshold) || !usable(e)) continue;
        const double y = -(l.line.intercept - mf.value) / (kc * t * e->eta);
        const double s2 = (sq(l.line.intercept_sigma) + sq(mf.sigma)) / sq(kc * t * e->eta) +
                          sq(y) * (sq(e->sigma / e->eta) + sq(t_loss.sigma / t));
        per.push_back({y, std::sqrt(s2)});
    }
    if (per.empty()) throw ProtocolError("calibration: n_ext unidentifiable (eta_a consistent with zero)");
    BathEstimate out;
    out.n_ext = iv_mean(per);
    if (t >= 1.0) {
        out.n_loss_identifiable = false;
        out.n_loss = {0.0, inf};
        return out;
    }
    const double ne = out.n_ext.value;
    out.n_loss.value = (mf.value - kc * ne * t) / (k * (1.0 - t));
    const double d_mu = 1.0 / (k * (1.0 - t));
    const double d_ne = -kc * t / (k * (1.0 - t));
    const double d_t = (mf.value - kc * ne) / (k * sq(1.0 - t));
    out.n_loss.sigma = std::sqrt(sq(d_mu * mf.sigma) + sq(d_ne * out.n_ext.sigma) + sq(d_t * t_loss.sigma));
    return out;
}

SystemNoise noise_budget(const QubitParams& qubit, const ModeParams& params, const PulseTiming& timing, double a0,
                         double n_vts, double t_loss, double t_leak, double n_loss) {
    if (!(a0 > 0.0 && a0 <= 1.0)) throw DomainError("system noise: a0 must lie in (0, 1]");
    SystemNoise out;
    out.n_para = n_vts * t_leak + n_loss * (1.0 - t_loss) / t_loss;
    const double chi2 = sq(params.chi());
    const double kr = params.kappa_r();
    const double prefactor = (chi2 + kr * kr) * kr /
                             (chi2 * params.kappa_r_c() * params.kappa_a() * t_loss * params.conversion_efficiency());
    out.n_shot = prefactor * (qubit.gamma_2r() * timing.tau_w() - std::log(a0)) / timing.tau_p();
    out.n_sys = out.n_para + out.n_shot;
    return out;
}

Estimate temperature_estimate(double f_hz, const Estimate& n) {
    if (!(n.value > 0.0)) return {0.0, n.sigma > 0.0 ? inf : 0.0};
    const double t0 = constants::planck * f_hz / constants::boltzmann;
    const double l = std::log1p(1.0 / n.value);
    const double dt_dn = t0 / (l * l) / (n.value * (n.value + 1.0));
    return {t0 / l, std::abs(dt_dn) * n.sigma};
}

}  // namespace

FitLine fit_line_weighted(std::span<const LinePoint> pts) {
    if (pts.size() < 3) throw FitError("fit_line_weighted: need >= 3 points");
    bool weighted = true;
    for (const auto& p : pts) {
        if (!p.sigma) {
            weighted = false;
            continue;
        }
        if (!(*p.sigma > 0.0) || !std::isfinite(*p.sigma)) throw FitError("fit_line_weighted: sigma must be > 0");
    }
    double s = 0.0, sx = 0.0, sxx = 0.0, sy = 0.0, sxy = 0.0;
    for (const auto& p : pts) {
        const double w = weighted ? 1.0 / sq(*p.sigma) : 1.0;
        s += w;
        sx += w * p.x;
        sxx += w * p.x * p.x;
        sy += w * p.y;
        sxy += w * p.x * p.y;
    }
    const double det = s * sxx - sx * sx;
    if (!(det > 1e-12 * s * sxx)) throw FitError("fit_line_weighted: x values must not all coincide");
    FitLine f;
    f.weighted = weighted;
    f.slope = (s * sxy - sx * sy) / det;
    f.intercept = (sxx * sy - sx * sxy) / det;
    double scale = 1.0;
    if (!weighted) {
        double rss = 0.0;
        for (const auto& p : pts) rss += sq(p.y - f.intercept - f.slope * p.x);
        scale = rss / static_cast<double>(pts.size() - 2);
    }
    f.slope_sigma = std::sqrt(scale * s / det);
    f.intercept_sigma = std::sqrt(scale * sxx / det);
    f.covariance = -scale * sx / det;
    return f;
}

std::vector<DetuningLine> fit_lines_by_detuning(std::span<const SweepRecord> records) {
    std::map<double, std::vector<LinePoint>> groups;
    for (const auto& r : records) groups[r.delta_a].push_back({r.control_value, r.n_r_eff, r.sigma});
    std::vector<DetuningLine> out;
    for (const auto& [delta, pts] : groups) out.push_back({delta, fit_line_weighted(pts)});
    return out;
}

std::vector<EtaEstimate> step_a_eta(std::span<const SweepRecord> spectra, double far_threshold) {
    return eta_from_lines(fit_lines_by_detuning(spectra), far_threshold);
}

LossEstimate step_b_losses(std::span<const SweepRecord> spectra, std::span<const EtaEstimate> eta,
                           const ModeParams& params, double far_threshold) {
    return losses_from_lines(fit_lines_by_detuning(spectra), eta, params, far_threshold);
}

BathEstimate step_c_baths(std::span<const SweepRecord> spectra, std::span<const EtaEstimate> eta, double t_loss,
                          const ModeParams& params, double far_threshold) {
    return baths_from_lines(fit_lines_by_detuning(spectra), eta, {t_loss, 0.0}, params, far_threshold);
}

SystemNoise assemble_system_noise(const QubitParams& qubit, const ModeParams& params, const BathPopulations& baths,
                                  const PulseTiming& timing, double a0) {
    return noise_budget(qubit, params, timing, a0, baths.n_vts(), baths.t_loss(), baths.t_leak(), baths.n_loss());
}

CalibrationResult calibrate(const CalibrationInputs& in, const ModeParams& params, const QubitParams& qubit,
                            const PulseTiming& timing, double a0) {
    if (!(in.far_threshold > 0.0)) throw ProtocolError("calibrate: far_threshold must be > 0");
    const auto lines_a = fit_lines_by_detuning(in.vs_n_add);
    const auto lines_b = fit_lines_by_detuning(in.vs_n_vts);

    struct Out {
        std::vector<EtaEstimate> eta;
        LossEstimate losses;
        BathEstimate baths;
        SystemNoise noise;
    };
    auto run = [&](const std::vector<DetuningLine>& la, const std::vector<DetuningLine>& lb) {
        Out o;
        o.eta = eta_from_lines(la, in.far_threshold);
        o.losses = losses_from_lines(lb, o.eta, params, in.far_threshold);
        o.baths = baths_from_lines(lb, o.eta, o.losses.t_loss, params, in.far_threshold);
        const double t = o.losses.t_loss.value;
        o.noise = noise_budget(qubit, params, timing, a0, in.n_vts_ref, t, o.losses.t_leak.value,
                               o.baths.n_loss_identifiable ? o.baths.n_loss.value : 0.0);
        return o;
    };
    const Out nominal = run(lines_a, lines_b);
    auto outputs = [](const Out& o) {
        return Eigen::Matrix<double, 7, 1>(o.losses.t_loss.value, o.losses.t_leak.value, o.baths.n_ext.value,
                                           o.baths.n_loss_identifiable ? o.baths.n_loss.value : 0.0, o.noise.n_para,
                                           o.noise.n_shot, o.noise.n_sys);
    };

    // Central differences over (slope, intercept) of every line; lines are
    // independent, each with its own 2x2 covariance.
    Eigen::Matrix<double, 7, 7> cov = Eigen::Matrix<double, 7, 7>::Zero();
    auto propagate = [&](std::vector<DetuningLine>& target, bool is_a) {
        for (auto& l : target) {
            Eigen::Matrix<double, 7, 2> jac;
            for (int k = 0; k < 2; ++k) {
                double& v = k == 0 ? l.line.slope : l.line.intercept;
                const double sig = k == 0 ? l.line.slope_sigma : l.line.intercept_sigma;
                const double h = sig > 0.0 ? 1e-3 * sig : 1e-7 * std::max(1.0, std::abs(v));
                const double v0 = v;
                v = v0 + h;
                const auto up = outputs(is_a ? run(target, lines_b) : run(lines_a, target));
                v = v0 - h;
                const auto dn = outputs(is_a ? run(target, lines_b) : run(lines_a, target));
                v = v0;
                jac.col(k) = (up - dn) / (2.0 * h);
            }
            Eigen::Matrix2d c;
            c << sq(l.line.slope_sigma), l.line.covariance, l.line.covariance, sq(l.line.intercept_sigma);
            cov += jac * c * jac.transpose();
        }
    };
    auto pa = lines_a;
    auto pb = lines_b;
    propagate(pa, true);
    propagate(pb, false);

    const auto val = outputs(nominal);
    auto est = [&](int i) { return Estimate{val(i), std::sqrt(std::max(0.0, cov(i, i)))}; };
    CalibrationResult r;
    r.t_loss = est(0);
    r.t_leak = est(1);
    r.n_ext = est(2);
    r.n_loss = est(3);
    r.n_para = est(4);
    r.n_shot = est(5);
    r.n_sys = est(6);
    r.n_loss_identifiable = nominal.baths.n_loss_identifiable;
    if (!r.n_loss_identifiable) r.n_loss = {0.0, inf};
    r.weighted = std::all_of(lines_a.begin(), lines_a.end(), [](const auto& l) { return l.line.weighted; }) &&
                 std::all_of(lines_b.begin(), lines_b.end(), [](const auto& l) { return l.line.weighted; });
    r.eta_a = nominal.eta;
    const double fa = params.f_a();
    r.t_ext = temperature_estimate(fa, r.n_ext);
    r.t_loss_bath = temperature_estimate(fa, r.n_loss);
    r.t_para = temperature_estimate(fa, r.n_para);
    r.t_sys = temperature_estimate(fa, r.n_sys);
    return r;
}

double default_far_threshold(const ModeParams& params) { return 8.0 * params.chi(); }

SyntheticPlan default_synthetic_plan(const ModeParams& params) {
    SyntheticPlan plan;
    const double chi = params.chi();
    for (int j = 0; j <= 16; ++j) plan.detunings.push_back(chi * (-2.0 + 0.25 * j));
    for (double m : {10.0, 12.0}) {
        plan.detunings.push_back(m * chi);
        plan.detunings.push_back(-m * chi);
    }
    std::sort(plan.detunings.begin(), plan.detunings.end());
    plan.n_add_values = {0.0, 0.5, 1.0, 1.5, 2.0};
    for (double t : {1.03, 1.3, 1.6, 1.9, 2.2}) plan.n_vts_values.push_back(bose_einstein(params.f_a(), t));
    plan.n_vts_during_n_add = plan.n_vts_values.front();
    return plan;
}

CalibrationInputs synthesize_sweeps(const ModeParams& params, const PulseTiming& timing, const SyntheticTruth& truth,
                                    const SyntheticPlan& plan, std::uint64_t seed, const EtaCache* cache) {
    if (!(plan.sigma > 0.0)) throw ValidationError("synthesize_sweeps: sigma must be > 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, plan.sigma);
    CalibrationInputs in;
    in.far_threshold = default_far_threshold(params);
    in.n_vts_ref = plan.n_vts_during_n_add;
    auto bath = [&](double n_vts, double n_add) {
        return BathPopulations({n_vts, truth.n_ext, n_add, truth.n_loss, truth.t_loss, truth.t_leak});
    };
    for (double delta : plan.detunings) {
        const double eta = cache ? (*cache)(timing, delta) : eta_a(params, timing, delta);
        for (double n_add : plan.n_add_values) {
            const double y = radiometer_response_from_eta(params, bath(plan.n_vts_during_n_add, n_add), eta);
            in.vs_n_add.push_back({delta, n_add, y + noise(rng), plan.sigma});
        }
        for (double n_vts : plan.n_vts_values) {
            const double y = radiometer_response_from_eta(params, bath(n_vts, 0.0), eta);
            in.vs_n_vts.push_back({delta, n_vts, y + noise(rng), plan.sigma});
        }
    }
    return in;
}

}  // namespace qrad
