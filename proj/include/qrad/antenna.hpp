#pragma once

// Beam-splitter model of the antenna resonator and the lossy link to the
// readout cavity. Offsets df are f - f_a in Hz.

#include "qrad/quantities.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace qrad {

enum class SpectrumKind { antenna_output, readout_input, background_subtracted };

std::string_view to_string(SpectrumKind kind);

struct SpectralDensity {
    std::vector<double> grid;    // f - f_a, Hz, strictly increasing
    std::vector<double> values;  // photon flux per unit bandwidth
    SpectrumKind kind = SpectrumKind::antenna_output;
};

/// Lorentzian power transmission through the antenna, 4g(1-g)/(1 + 16 pi^2 df^2 / kappa_a^2).
double lorentzian_transmission(const ModeParams& params, double df_hz);

/// Mode occupation of the antenna resonator.
double antenna_population(const ModeParams& params, const BathPopulations& baths);

SpectralDensity antenna_output_spectrum(const ModeParams& params, const BathPopulations& baths,
                                        std::span<const double> grid_hz);

SpectralDensity readout_input_spectrum(const ModeParams& params, const BathPopulations& baths,
                                       std::span<const double> grid_hz);

// Background-subtracted output measured by a classical receiver: the VTS bath
// transmitted through the antenna competing with the added noise it reflects.
SpectralDensity classical_cooling_spectrum(const ModeParams& params, double n_vts, double n_add,
                                           std::span<const double> grid_hz);

// +-span_linewidths * kappa_a/2pi, n points. Defaults match the plotting grid
// of the classical cooling comparison.
std::vector<double> default_offset_grid(const ModeParams& params, double span_linewidths = 10.0,
                                        std::size_t n = 401);

}  // namespace qrad
