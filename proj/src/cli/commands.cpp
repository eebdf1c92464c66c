#include "qrad/cli/commands.hpp"

#include "qrad/antenna.hpp"
#include "qrad/calibration.hpp"
#include "qrad/cli/csv.hpp"
#include "qrad/dephasing.hpp"
#include "qrad/detector.hpp"
#include "qrad/errors.hpp"
#include "qrad/oracle.hpp"
#include "qrad/ramsey.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <iostream>
#include <thread>

namespace qrad::cli {

using ojson = nlohmann::ordered_json;

namespace {

// Runs f(0..n-1) over `jobs` threads. The lowest-index failure is rethrown so
// errors are reported deterministically.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& f) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(n, 1)));
    std::vector<std::exception_ptr> errors(n);
    auto worker = [&](unsigned w) {
        for (std::size_t i = w; i < n; i += jobs) {
            try {
                f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (jobs == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(worker, w);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::uint64_t base_seed(const ExperimentConfig& c, const Options& o) { return o.seed.value_or(c.seed); }

PulseTiming effective_timing(const ExperimentConfig& c, const Options& o) {
    return o.tau_p ? c.timing.with_tau_p(*o.tau_p) : c.timing;
}

ojson estimate_json(const Estimate& e) {
    ojson j;
    j["value"] = e.value;
    if (std::isfinite(e.sigma))
        j["sigma"] = e.sigma;
    else
        j["sigma"] = nullptr;
    return j;
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

}  // namespace

CommandOutput cmd_spectra(const ExperimentConfig& c, const Options& o) {
    std::vector<double> taus = c.sweep.tau_p;
    if (o.tau_p) taus = {*o.tau_p};
    const auto& deltas = c.sweep.delta_a;
    if (deltas.empty()) throw ConfigError("spectra: empty detuning grid");
    std::vector<PulseTiming> timings;
    for (double tp : taus) timings.push_back(c.timing.with_tau_p(tp));

    const std::size_t n = taus.size() * deltas.size();
    std::vector<double> value(n), sigma(n, 0.0);
    const std::uint64_t seed = base_seed(c, o);
    const ReadoutModel readout(c.qubit);
    parallel_for(n, o.jobs, [&](std::size_t i) {
        const PulseTiming& t = timings[i / deltas.size()];
        const double delta = deltas[i % deltas.size()];
        const double n_true = radiometer_response(c.mode, c.baths, t, delta);
        if (!o.synthetic) {
            value[i] = n_true;
            return;
        }
        // Simulated on/off fringes at the dephasing rate the population causes.
        const double g = gamma_th(c.mode, n_true);
        const auto on = synth_fringe(amp_on(g, c.qubit, t), 0.0, readout, t, seed + 2 * i);
        const auto off = synth_fringe(amp_off(c.qubit, t), 0.0, readout, t, seed + 2 * i + 1);
        const auto est = estimate_n_r_eff(on, off, c.qubit, t, c.mode);
        value[i] = est.n_r_eff;
        sigma[i] = est.sigma;
    });

    CsvWriter w({"tau_p_s", "delta_a_rad_s", "n_r_eff", "sigma"});
    for (std::size_t i = 0; i < n; ++i)
        w.row({fmt(taus[i / deltas.size()]), fmt(deltas[i % deltas.size()]), fmt(value[i]), fmt(sigma[i])});
    return {w.str(), {}};
}

CommandOutput cmd_oracle_compare(const ExperimentConfig& c, const Options& o) {
    const auto& deltas = c.sweep.delta_a;
    const auto& probes = c.sweep.n_probe;
    if (deltas.empty() || probes.empty()) throw ConfigError("oracle-compare: empty grid");
    const PulseTiming t = effective_timing(c, o);
    const std::size_t n = deltas.size() * probes.size();
    std::vector<double> analytic(deltas.size()), oracle(n);
    parallel_for(deltas.size(), o.jobs, [&](std::size_t i) { analytic[i] = eta_a(c.mode, t, deltas[i]); });
    parallel_for(n, o.jobs, [&](std::size_t i) {
        const double delta = deltas[i / probes.size()];
        const double probe = probes[i % probes.size()];
        try {
            oracle[i] = eta_a_oracle(c.mode, t, delta, probe, c.oracle);
        } catch (const std::exception& e) {
            throw IntegrationError("oracle failed at delta_a = " + fmt(delta) + " rad/s, n_probe = " + fmt(probe) +
                                   ": " + e.what());
        }
    });

    CsvWriter w({"delta_a_rad_s", "n_probe", "gamma_n", "eta_analytic", "eta_oracle", "abs_diff"});
    const double gamma = c.mode.gamma();
    double max_small = 0.0;
    bool any_small = false;
    std::vector<double> max_per_probe(probes.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t id = i / probes.size();
        const std::size_t ip = i % probes.size();
        const double diff = std::abs(analytic[id] - oracle[i]);
        w.row({fmt(deltas[id]), fmt(probes[ip]), fmt(gamma * probes[ip]), fmt(analytic[id]), fmt(oracle[i]),
               fmt(diff)});
        max_per_probe[ip] = std::max(max_per_probe[ip], diff);
        if (gamma * probes[ip] <= 0.05) {
            any_small = true;
            max_small = std::max(max_small, diff);
        }
    }
    if (any_small) w.comment("max_abs_diff_gamma_n_le_0.05 " + fmt(max_small));
    for (std::size_t ip = 0; ip < probes.size(); ++ip)
        w.comment("max_abs_diff n_probe=" + fmt(probes[ip]) + " " + fmt(max_per_probe[ip]));
    return {w.str(), {}};
}

namespace {

ojson calibration_json(const CalibrationResult& r) {
    ojson j;
    j["t_loss"] = estimate_json(r.t_loss);
    j["t_leak"] = estimate_json(r.t_leak);
    j["n_ext"] = estimate_json(r.n_ext);
    j["n_loss"] = estimate_json(r.n_loss);
    j["n_loss_identifiable"] = r.n_loss_identifiable;
    j["n_para"] = estimate_json(r.n_para);
    j["n_shot"] = estimate_json(r.n_shot);
    j["n_sys"] = estimate_json(r.n_sys);
    ojson temps;
    temps["t_ext"] = estimate_json(r.t_ext);
    temps["t_loss_bath"] = estimate_json(r.t_loss_bath);
    temps["t_para"] = estimate_json(r.t_para);
    temps["t_sys"] = estimate_json(r.t_sys);
    j["temperatures_k"] = temps;
    j["weighted_fits"] = r.weighted;
    ojson eta = ojson::array();
    for (const auto& e : r.eta_a)
        eta.push_back({{"delta_a_rad_s", e.delta_a}, {"eta", e.eta}, {"sigma", e.sigma}, {"far", e.far}});
    j["eta_a"] = eta;
    return j;
}

}  // namespace

CommandOutput cmd_calibrate(const ExperimentConfig& c, const Options& o) {
    const auto& cal = c.calibration;
    const PulseTiming t = effective_timing(c, o);
    const double a0 = c.metrics.a0;
    CommandOutput result;
    ojson report;
    report["schema_version"] = schema_version;
    report["command"] = "calibrate";

    if (o.synthetic == !o.data_files.empty())
        throw ConfigError("calibrate: give either --synthetic or data files");
    if (o.synthetic) {
        const EtaCache cache(c.mode);
        const std::uint64_t seed = base_seed(c, o);
        std::vector<CalibrationResult> runs(cal.seeds);
        std::vector<CalibrationInputs> first(1);
        // Warm the cache serially so worker threads only read it.
        for (double d : cal.plan.detunings) cache(t, d);
        parallel_for(cal.seeds, o.jobs, [&](std::size_t s) {
            CalibrationInputs in = synthesize_sweeps(c.mode, t, cal.truth, cal.plan, seed + s, &cache);
            in.far_threshold = cal.far_threshold;
            in.n_vts_ref = cal.n_vts_ref;
            runs[s] = calibrate(in, c.mode, c.qubit, t, a0);
            if (s == 0) first[0] = std::move(in);
        });
        if (!o.data_out.empty()) write_output(o.data_out, sweep_csv(first[0]));
        report["source"] = "synthetic";
        report["seed"] = seed;
        report["truth"] = {{"t_loss", cal.truth.t_loss},
                           {"t_leak", cal.truth.t_leak},
                           {"n_ext", cal.truth.n_ext},
                           {"n_loss", cal.truth.n_loss}};
        report["result"] = calibration_json(runs.front());
        if (cal.seeds > 1) {
            ojson rt;
            rt["seeds"] = cal.seeds;
            auto coverage = [&](auto get, double truth) {
                std::size_t hit = 0;
                double sum = 0.0;
                for (const auto& r : runs) {
                    const Estimate e = get(r);
                    sum += e.value;
                    if (std::abs(e.value - truth) <= 2.0 * e.sigma) ++hit;
                }
                return ojson{{"mean", sum / static_cast<double>(runs.size())},
                             {"within_2sigma", static_cast<double>(hit) / static_cast<double>(runs.size())}};
            };
            rt["t_loss"] = coverage([](const CalibrationResult& r) { return r.t_loss; }, cal.truth.t_loss);
            rt["t_leak"] = coverage([](const CalibrationResult& r) { return r.t_leak; }, cal.truth.t_leak);
            rt["n_ext"] = coverage([](const CalibrationResult& r) { return r.n_ext; }, cal.truth.n_ext);
            rt["n_loss"] = coverage([](const CalibrationResult& r) { return r.n_loss; }, cal.truth.n_loss);
            report["round_trip"] = rt;
        }
    } else {
        CalibrationInputs in;
        for (const auto& path : o.data_files) {
            SweepTable table = read_sweep_csv_file(path);
            for (auto& w : table.warnings) result.warnings.push_back(std::move(w));
            in.vs_n_add.insert(in.vs_n_add.end(), table.inputs.vs_n_add.begin(), table.inputs.vs_n_add.end());
            in.vs_n_vts.insert(in.vs_n_vts.end(), table.inputs.vs_n_vts.begin(), table.inputs.vs_n_vts.end());
        }
        if (in.vs_n_add.empty() || in.vs_n_vts.empty())
            throw SchemaError("calibrate: need both n_add and n_vts sweeps");
        in.far_threshold = cal.far_threshold;
        in.n_vts_ref = cal.n_vts_ref;
        report["source"] = o.data_files;
        report["result"] = calibration_json(calibrate(in, c.mode, c.qubit, t, a0));
    }
    report["warnings"] = result.warnings;
    result.content = dump(report);
    return result;
}

CommandOutput cmd_metrics(const ExperimentConfig& c, const Options& o) {
    const PulseTiming t = effective_timing(c, o);
    const auto& m = c.metrics;
    const DetectorFigures f = detector_figures(c.qubit, c.mode, t, m.a0, m.n_r_para);
    ojson r;
    r["schema_version"] = schema_version;
    r["command"] = "metrics";
    r["a0"] = m.a0;
    r["n_r_para"] = m.n_r_para;
    r["eta"] = f.eta;
    r["p_dc"] = f.p_dc;
    r["eta_prime"] = f.eta_prime;
    r["p_dc_prime"] = f.p_dc_prime;
    ojson ratios = ojson::array();
    for (double n_lin : m.n_sys_lin) {
        ratios.push_back({{"n_sys_lin", n_lin},
                          {"ratio", outperform_ratio(f, c.mode, t, n_lin, DetectorVariant::bare)},
                          {"ratio_prime", outperform_ratio(f, c.mode, t, n_lin, DetectorVariant::parasitic)}});
    }
    r["outperform"] = ratios;
    const double shots = shots_in(1.0, t, m.dead_time);
    r["precision_per_root_second"] = {
        {"shots", shots},
        {"linear_relative", precision_linear({1.0, c.mode.kappa_r(), 1.0, 0.0})},
        {"dephasing", precision_dephasing(f, c.mode, t, shots, DetectorVariant::bare)},
        {"dephasing_prime", precision_dephasing(f, c.mode, t, shots, DetectorVariant::parasitic)}};
    if (c.qubit.delta_gamma_2r() > 0.0) {
        r["dynamic_range_db"] = dynamic_range(c.qubit, c.mode);
        r["detection_floor"] = c.qubit.delta_gamma_2r() / c.mode.kappa_r();
    } else {
        r["dynamic_range_db"] = nullptr;
        r["detection_floor"] = 0.0;
    }
    const SystemNoise noise = assemble_system_noise(c.qubit, c.mode, c.baths, t, m.a0);
    r["n_para"] = noise.n_para;
    r["n_shot"] = noise.n_shot;
    r["n_sys"] = noise.n_sys;
    r["t_sys_k"] = noise.n_sys > 0.0 ? ojson(temperature_of(c.mode.f_a(), noise.n_sys)) : ojson(nullptr);
    return {dump(r), {}};
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"qrad: qubit-dephasing radiometer models"};
    app.require_subcommand(1);
    Options opts;
    std::uint64_t seed = 0;
    double tau_p = 0.0;

    auto common = [&](CLI::App* sub) {
        sub->add_option("config", opts.config_path, "JSON config file")->required();
        sub->add_option("--out", opts.out, "output path ('-' for stdout)");
        sub->add_option("--seed", seed, "RNG seed (overrides config)");
        sub->add_option("--tau-p", tau_p, "pump duration override, s")->check(CLI::PositiveNumber);
        sub->add_option("--jobs", opts.jobs, "worker threads (0: all cores)");
    };
    auto* spectra = app.add_subcommand("spectra", "dephasing spectra n_r_eff(delta_a) per tau_p");
    common(spectra);
    spectra->add_flag("--synthetic", opts.synthetic, "simulate Ramsey fringes with shot noise");
    auto* oracle = app.add_subcommand("oracle-compare", "eta_a from the analytic model and the master equation");
    common(oracle);
    auto* calib = app.add_subcommand("calibrate", "three-step loss and bath calibration");
    common(calib);
    calib->add_flag("--synthetic", opts.synthetic, "generate sweeps from calibration.truth");
    calib->add_option("data", opts.data_files, "sweep CSV files");
    calib->add_option("--data-out", opts.data_out, "with --synthetic: write the first generated sweep CSV");
    auto* metrics = app.add_subcommand("metrics", "detector figures of merit and system noise");
    common(metrics);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_config;
    }
    for (auto* sub : {spectra, oracle, calib, metrics}) {
        if (!sub->parsed()) continue;
        if (sub->count("--seed")) opts.seed = seed;
        if (sub->count("--tau-p")) opts.tau_p = tau_p;
    }

    try {
        const ExperimentConfig config = load_config(opts.config_path);
        if (opts.tau_p) (void)config.timing.with_tau_p(*opts.tau_p);
        CommandOutput result;
        if (spectra->parsed()) result = cmd_spectra(config, opts);
        if (oracle->parsed()) result = cmd_oracle_compare(config, opts);
        if (calib->parsed()) result = cmd_calibrate(config, opts);
        if (metrics->parsed()) result = cmd_metrics(config, opts);
        for (const auto& w : result.warnings) err << "warning: " << w << "\n";
        if (opts.out == "-")
            out << result.content << std::flush;
        else
            write_output(opts.out, result.content);
        return exit_ok;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const SchemaError& e) {
        err << "input error: " << e.what() << "\n";
        return exit_config;
    } catch (const ValidationError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        err << "numeric failure: " << e.what() << "\n";
        return exit_numeric;
    }
}

}  // namespace qrad::cli
