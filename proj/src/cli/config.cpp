#include "qrad/cli/config.hpp"

#include "qrad/errors.hpp"
#include "qrad/ramsey.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace qrad::cli {

using nlohmann::json;

namespace {

// Reads one JSON object, rejecting keys that are never looked up.
class Section {
public:
    Section(const json& j, std::string name, std::set<std::string> allowed) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) throw ConfigError(name_ + ": expected an object");
        for (const auto& [k, v] : j_.items())
            if (!allowed.count(k)) throw ConfigError(name_ + ": unknown key '" + k + "'");
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    double num(const std::string& key) const {
        if (!has(key)) throw ConfigError(name_ + ": missing '" + key + "'");
        return as_num(j_.at(key), key);
    }
    double num(const std::string& key, double fallback) const { return has(key) ? num(key) : fallback; }
    std::optional<double> opt(const std::string& key) const {
        return has(key) ? std::optional<double>(num(key)) : std::nullopt;
    }
    bool flag(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        if (!j_.at(key).is_boolean()) throw ConfigError(name_ + "." + key + ": expected true/false");
        return j_.at(key).get<bool>();
    }
    std::uint64_t uint(const std::string& key, std::uint64_t fallback) const {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0)
            throw ConfigError(name_ + "." + key + ": expected a non-negative integer");
        return v.get<std::uint64_t>();
    }
    const json& sub(const std::string& key) const { return j_.at(key); }

    // Either an explicit sorted array or {start, stop, count}; empty if absent.
    std::vector<double> grid(const std::string& key) const {
        if (!has(key)) return {};
        const auto& v = j_.at(key);
        const std::string where = name_ + "." + key;
        std::vector<double> out;
        if (v.is_array()) {
            for (const auto& x : v) out.push_back(as_num(x, key));
        } else if (v.is_object()) {
            Section g(v, where, {"start", "stop", "count"});
            const double a = g.num("start");
            const double b = g.num("stop");
            const auto n = g.uint("count", 0);
            if (n < 1) throw ConfigError(where + ": count must be >= 1");
            for (std::uint64_t i = 0; i < n; ++i)
                out.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
        } else {
            throw ConfigError(where + ": expected an array or {start, stop, count}");
        }
        if (out.empty()) throw ConfigError(where + ": grid must not be empty");
        if (!std::is_sorted(out.begin(), out.end()) || std::adjacent_find(out.begin(), out.end()) != out.end())
            throw ConfigError(where + ": grid must be strictly increasing");
        return out;
    }

private:
    double as_num(const json& v, const std::string& key) const {
        if (!v.is_number()) throw ConfigError(name_ + "." + key + ": expected a number");
        return v.get<double>();
    }

    const json& j_;
    std::string name_;
};

const json& section_or_empty(const json& root, const std::string& key) {
    static const json empty = json::object();
    return root.contains(key) ? root.at(key) : empty;
}

ModeParams read_mode(const json& j) {
    Section s(j, "mode",
              {"f_a_hz", "f_r_hz", "f_p_hz", "chi_hz", "kappa_r_c_hz", "kappa_r_i_hz", "kappa_a_c_hz", "kappa_a_i_hz",
               "conversion_efficiency"});
    ModeParams::Spec spec;
    spec.f_a = s.num("f_a_hz");
    spec.f_r = s.num("f_r_hz");
    spec.f_p = s.num("f_p_hz");
    spec.chi = s.num("chi_hz");
    spec.kappa_r_c = s.num("kappa_r_c_hz");
    spec.kappa_r_i = s.num("kappa_r_i_hz");
    spec.kappa_a_c = s.num("kappa_a_c_hz");
    spec.kappa_a_i = s.num("kappa_a_i_hz");
    spec.conversion_efficiency = s.num("conversion_efficiency", 1.0);
    return ModeParams::from_hz(spec);
}

QubitParams read_qubit(const json& j, const ModeParams& mode) {
    Section s(j, "qubit",
              {"t2r_s", "gamma_2r_per_s", "t1_s", "p_e_ini", "p_read_e_given_g", "p_read_g_given_e", "f_ge_hz",
               "f_ef_hz", "delta_gamma_2r_per_s", "delta_gamma_2r_over_kappa_r"});
    QubitParams::Spec spec;
    if (s.has("t2r_s") && s.has("gamma_2r_per_s")) throw ConfigError("qubit: give t2r_s or gamma_2r_per_s, not both");
    if (s.has("t2r_s")) {
        const double t2 = s.num("t2r_s");
        if (!(t2 > 0.0)) throw ConfigError("qubit.t2r_s: must be > 0");
        spec.gamma_2r = 1.0 / t2;
    } else {
        spec.gamma_2r = s.num("gamma_2r_per_s", 0.0);
    }
    spec.t1 = s.num("t1_s", 0.0);
    spec.p_e_ini = s.num("p_e_ini", 0.0);
    spec.p_read_e_given_g = s.num("p_read_e_given_g", 0.0);
    spec.p_read_g_given_e = s.num("p_read_g_given_e", 0.0);
    spec.f_ge = s.num("f_ge_hz");
    spec.f_ef = s.num("f_ef_hz");
    if (s.has("delta_gamma_2r_per_s") && s.has("delta_gamma_2r_over_kappa_r"))
        throw ConfigError("qubit: give one form of delta_gamma_2r");
    spec.delta_gamma_2r = s.has("delta_gamma_2r_over_kappa_r")
                              ? s.num("delta_gamma_2r_over_kappa_r") * mode.kappa_r()
                              : s.num("delta_gamma_2r_per_s", 0.0);
    return QubitParams(spec);
}

// n_* keys are occupations; t_*_k keys are temperatures at f_a.
double population(const Section& s, const std::string& n_key, const std::string& t_key, const ModeParams& mode,
                  double fallback) {
    if (s.has(n_key) && s.has(t_key)) throw ConfigError("give " + n_key + " or " + t_key + ", not both");
    if (s.has(t_key)) return bose_einstein(mode.f_a(), s.num(t_key));
    return s.num(n_key, fallback);
}

BathPopulations read_baths(const json& j, const ModeParams& mode) {
    Section s(j, "baths", {"n_vts", "t_vts_k", "n_ext", "n_add", "n_loss", "t_loss", "t_leak"});
    BathPopulations::Spec spec;
    spec.n_vts = population(s, "n_vts", "t_vts_k", mode, 0.0);
    spec.n_ext = s.num("n_ext", 0.0);
    spec.n_add = s.num("n_add", 0.0);
    spec.n_loss = s.num("n_loss", 0.0);
    spec.t_loss = s.num("t_loss", 1.0);
    spec.t_leak = s.num("t_leak", 0.0);
    return BathPopulations(spec);
}

PulseTiming read_timing(const json& j) {
    Section s(j, "timing", {"tau_p_s", "tau_w_s", "tau_s", "n_rep"});
    const double tp = s.num("tau_p_s");
    if (s.has("tau_w_s") == s.has("tau_s")) throw ConfigError("timing: give exactly one of tau_w_s, tau_s");
    const double tau = s.has("tau_s") ? s.num("tau_s") : tp + s.num("tau_w_s");
    return PulseTiming(tau, tp, s.uint("n_rep", 10000));
}

OracleConfig read_oracle(const json& j) {
    Section s(j, "oracle",
              {"epsilon", "rtol", "atol", "max_step_s", "keep_dissipation_when_off", "check_convergence",
               "convergence_tol"});
    OracleConfig c;
    c.epsilon = s.num("epsilon", c.epsilon);
    c.rtol = s.num("rtol", c.rtol);
    c.atol = s.num("atol", c.atol);
    c.max_step = s.num("max_step_s", c.max_step);
    c.keep_dissipation_when_off = s.flag("keep_dissipation_when_off", c.keep_dissipation_when_off);
    c.check_convergence = s.flag("check_convergence", c.check_convergence);
    c.convergence_tol = s.num("convergence_tol", c.convergence_tol);
    c.validate();
    return c;
}

std::vector<double> scaled(std::vector<double> v, double factor) {
    for (double& x : v) x *= factor;
    return v;
}

SweepSpec read_sweep(const json& j, const ModeParams& mode, const PulseTiming& timing) {
    Section s(j, "sweep", {"delta_a_over_chi", "delta_a_hz", "tau_p_s", "n_probe"});
    SweepSpec out;
    if (s.has("delta_a_over_chi") && s.has("delta_a_hz"))
        throw ConfigError("sweep: give delta_a_over_chi or delta_a_hz, not both");
    if (s.has("delta_a_hz")) {
        out.delta_a = scaled(s.grid("delta_a_hz"), constants::two_pi);
    } else if (s.has("delta_a_over_chi")) {
        out.delta_a = scaled(s.grid("delta_a_over_chi"), mode.chi());
    } else {
        for (int i = 0; i < 41; ++i) out.delta_a.push_back(mode.chi() * (-3.0 + 0.15 * i));
    }
    out.tau_p = s.has("tau_p_s") ? s.grid("tau_p_s") : std::vector<double>{timing.tau_p()};
    for (double tp : out.tau_p)
        if (!(tp > 0.0)) throw ConfigError("sweep.tau_p_s: values must be > 0");
    out.n_probe = s.has("n_probe") ? s.grid("n_probe") : std::vector<double>{1e-3, 0.05 / mode.gamma(), 2.0};
    for (double n : out.n_probe)
        if (!(n > 0.0)) throw ConfigError("sweep.n_probe: values must be > 0");
    return out;
}

CalibrationSpec read_calibration(const json& j, const ModeParams& mode, const BathPopulations& baths) {
    Section s(j, "calibration",
              {"truth", "sigma", "detunings_over_chi", "n_add_values", "n_vts_values", "t_vts_k_values",
               "n_vts_during_n_add", "far_threshold_over_chi", "n_vts_ref", "t_vts_ref_k", "seeds"});
    CalibrationSpec c;
    if (s.has("truth")) {
        Section t(s.sub("truth"), "calibration.truth", {"t_loss", "t_leak", "n_ext", "n_loss"});
        c.truth.t_loss = t.num("t_loss", c.truth.t_loss);
        c.truth.t_leak = t.num("t_leak", c.truth.t_leak);
        c.truth.n_ext = t.num("n_ext", c.truth.n_ext);
        c.truth.n_loss = t.num("n_loss", c.truth.n_loss);
    }
    c.plan = default_synthetic_plan(mode);
    c.plan.sigma = s.num("sigma", c.plan.sigma);
    if (!(c.plan.sigma > 0.0)) throw ConfigError("calibration.sigma: must be > 0");
    if (s.has("detunings_over_chi")) c.plan.detunings = scaled(s.grid("detunings_over_chi"), mode.chi());
    if (s.has("n_add_values")) c.plan.n_add_values = s.grid("n_add_values");
    if (s.has("n_vts_values") && s.has("t_vts_k_values"))
        throw ConfigError("calibration: give n_vts_values or t_vts_k_values, not both");
    if (s.has("n_vts_values")) c.plan.n_vts_values = s.grid("n_vts_values");
    if (s.has("t_vts_k_values")) {
        c.plan.n_vts_values.clear();
        for (double t : s.grid("t_vts_k_values")) c.plan.n_vts_values.push_back(bose_einstein(mode.f_a(), t));
    }
    c.plan.n_vts_during_n_add = s.num("n_vts_during_n_add", c.plan.n_vts_values.front());
    c.far_threshold = s.num("far_threshold_over_chi", default_far_threshold(mode) / mode.chi()) * mode.chi();
    if (!(c.far_threshold > 0.0)) throw ConfigError("calibration.far_threshold_over_chi: must be > 0");
    const double n_ref_default = baths.n_vts() > 0.0 ? baths.n_vts() : c.plan.n_vts_during_n_add;
    c.n_vts_ref = population(s, "n_vts_ref", "t_vts_ref_k", mode, n_ref_default);
    c.seeds = s.uint("seeds", 1);
    if (c.seeds < 1) throw ConfigError("calibration.seeds: must be >= 1");
    return c;
}

MetricsSpec read_metrics(const json& j, const QubitParams& qubit) {
    Section s(j, "metrics", {"a0", "n_r_para", "n_sys_lin", "dead_time_s"});
    MetricsSpec m;
    m.a0 = s.has("a0") ? s.num("a0") : ReadoutModel(qubit).a0();
    if (!(m.a0 > 0.0 && m.a0 <= 1.0)) throw ConfigError("metrics.a0: must lie in (0, 1]");
    m.n_r_para = s.num("n_r_para", 0.0);
    if (!(m.n_r_para >= 0.0)) throw ConfigError("metrics.n_r_para: must be >= 0");
    if (s.has("n_sys_lin")) m.n_sys_lin = s.grid("n_sys_lin");
    m.dead_time = s.num("dead_time_s", 0.0);
    if (!(m.dead_time >= 0.0)) throw ConfigError("metrics.dead_time_s: must be >= 0");
    return m;
}

}  // namespace

ExperimentConfig parse_config(const json& root) {
    if (!root.is_object()) throw ConfigError("config: top level must be an object");
    Section top(root, "config",
                {"mode", "qubit", "baths", "timing", "sweep", "oracle", "calibration", "metrics", "seed"});
    for (const char* required : {"mode", "qubit", "timing"})
        if (!top.has(required)) throw ConfigError(std::string("config: missing section '") + required + "'");
    try {
        const ModeParams mode = read_mode(root.at("mode"));
        const QubitParams qubit = read_qubit(root.at("qubit"), mode);
        const BathPopulations baths = read_baths(section_or_empty(root, "baths"), mode);
        const PulseTiming timing = read_timing(root.at("timing"));
        return ExperimentConfig{mode,
                                qubit,
                                baths,
                                timing,
                                read_sweep(section_or_empty(root, "sweep"), mode, timing),
                                read_oracle(section_or_empty(root, "oracle")),
                                read_calibration(section_or_empty(root, "calibration"), mode, baths),
                                read_metrics(section_or_empty(root, "metrics"), qubit),
                                top.uint("seed", 0)};
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    json j;
    try {
        j = json::parse(buf.str(), nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(j);
}

}  // namespace qrad::cli
