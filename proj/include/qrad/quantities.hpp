#pragma once

// Shared parameter records and thermal-occupation conversions.
//
// Conventions: every linewidth and the dispersive shift are stored as angular
// rates (rad/s). User-facing frequencies are in Hz. Helpers taking "_hz"
// arguments for linewidths expect kappa/2pi and convert once at the boundary.

#include <cstddef>
#include <numbers>

namespace qrad {

namespace constants {
// CODATA 2018 (exact SI definitions).
inline constexpr double planck = 6.62607015e-34;      // J s
inline constexpr double boltzmann = 1.380649e-23;     // J / K
inline constexpr double two_pi = 2.0 * std::numbers::pi;
}  // namespace constants

inline constexpr double angular(double hz) { return constants::two_pi * hz; }
inline constexpr double to_hz(double rad_s) { return rad_s / constants::two_pi; }

/// Mean Bose-Einstein occupation 1/(exp(hf/kT) - 1). Throws DomainError for
/// f <= 0 or T <= 0.
double bose_einstein(double f_hz, double temperature_k);

/// Inverse of bose_einstein: the temperature whose occupation at f is n.
double temperature_of(double f_hz, double occupation);

/// Oscillator and coupling parameters of the antenna / converter / readout chain.
class ModeParams {
public:
    struct Spec {
        double f_a = 0.0;   // antenna frequency, Hz
        double f_r = 0.0;   // readout-cavity center frequency, Hz
        double f_p = 0.0;   // converter pump frequency, Hz
        double chi = 0.0;   // dispersive shift, rad/s
        double kappa_r_c = 0.0;
        double kappa_r_i = 0.0;
        double kappa_a_c = 0.0;
        double kappa_a_i = 0.0;
        double conversion_efficiency = 1.0;
    };

    explicit ModeParams(const Spec& spec);

    // Same fields but with chi and every kappa given as x/2pi in Hz.
    static ModeParams from_hz(Spec spec_hz);

    double f_a() const { return s_.f_a; }
    double f_r() const { return s_.f_r; }
    double f_p() const { return s_.f_p; }
    double chi() const { return s_.chi; }
    double kappa_r_c() const { return s_.kappa_r_c; }
    double kappa_r_i() const { return s_.kappa_r_i; }
    double kappa_a_c() const { return s_.kappa_a_c; }
    double kappa_a_i() const { return s_.kappa_a_i; }
    double conversion_efficiency() const { return s_.conversion_efficiency; }

    double kappa_r() const { return s_.kappa_r_c + s_.kappa_r_i; }
    double kappa_a() const { return s_.kappa_a_c + s_.kappa_a_i; }
    // Fractional absorption kappa_a_i / kappa_a.
    double gamma() const { return s_.kappa_a_i / kappa_a(); }
    // 2pi (f_a - f_r - f_p), rad/s.
    double delta_a() const;

    // Readout-referred gain kappa_a kappa_r_c / kappa_r^2 shared by the
    // radiometer response and the calibration lines.
    double response_scale() const { return kappa_a() * s_.kappa_r_c / (kappa_r() * kappa_r()); }

    // Copy with a different antenna frequency. Used by sweeps.
    ModeParams with_f_a(double f_a_hz) const;
    ModeParams with_spec(const Spec& spec) const { return ModeParams(spec); }
    const Spec& spec() const { return s_; }

private:
    Spec s_;
};

/// Thermal occupations of the four baths plus the two link transmissions.
class BathPopulations {
public:
    struct Spec {
        double n_vts = 0.0;   // internal bath (variable-temperature stage)
        double n_ext = 0.0;   // external transmission-line bath
        double n_add = 0.0;   // added white noise
        double n_loss = 0.0;  // dissipation between antenna and readout
        double t_loss = 1.0;
        double t_leak = 0.0;
    };

    explicit BathPopulations(const Spec& spec);

    double n_vts() const { return s_.n_vts; }
    double n_ext() const { return s_.n_ext; }
    double n_add() const { return s_.n_add; }
    double n_loss() const { return s_.n_loss; }
    double t_loss() const { return s_.t_loss; }
    double t_leak() const { return s_.t_leak; }

    // Parasitic white noise referred to the antenna input.
    double n_para() const { return s_.n_vts * s_.t_leak + s_.n_loss * (1.0 - s_.t_loss) / s_.t_loss; }

    const Spec& spec() const { return s_; }

private:
    Spec s_;
};

/// Ramsey delay and converter-pump window.
class PulseTiming {
public:
    PulseTiming(double tau, double tau_p, std::size_t n_rep = 1);

    double tau() const { return tau_; }
    double tau_p() const { return tau_p_; }
    double tau_w() const { return tau_ - tau_p_; }
    std::size_t n_rep() const { return n_rep_; }

    PulseTiming with_tau_p(double tau_p) const { return PulseTiming(tau_p + tau_w(), tau_p, n_rep_); }

private:
    double tau_;
    double tau_p_;
    std::size_t n_rep_;
};

class QubitParams {
public:
    struct Spec {
        double gamma_2r = 0.0;          // 1/T2R, 1/s; zero models an ideal qubit
        double t1 = 0.0;                // s
        double p_e_ini = 0.0;
        double p_read_e_given_g = 0.0;
        double p_read_g_given_e = 0.0;
        double f_ge = 0.0;              // Hz
        double f_ef = 0.0;              // Hz
        double delta_gamma_2r = 0.0;    // long-term fluctuation of gamma_2r, 1/s
    };

    explicit QubitParams(const Spec& spec);

    double gamma_2r() const { return s_.gamma_2r; }
    double t1() const { return s_.t1; }
    double p_e_ini() const { return s_.p_e_ini; }
    double p_read_e_given_g() const { return s_.p_read_e_given_g; }
    double p_read_g_given_e() const { return s_.p_read_g_given_e; }
    double f_ge() const { return s_.f_ge; }
    double f_ef() const { return s_.f_ef; }
    double delta_gamma_2r() const { return s_.delta_gamma_2r; }
    const Spec& spec() const { return s_; }

private:
    Spec s_;
};

}  // namespace qrad
