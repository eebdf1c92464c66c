#include "qrad/antenna.hpp"

#include "qrad/errors.hpp"

#include <cmath>

namespace qrad {

namespace {

void check_grid(std::span<const double> grid) {
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw DomainError("spectrum grid must be strictly increasing");
    }
}

template <class F>
SpectralDensity tabulate(std::span<const double> grid, SpectrumKind kind, F&& f) {
    check_grid(grid);
    SpectralDensity out;
    out.kind = kind;
    out.grid.assign(grid.begin(), grid.end());
    out.values.reserve(grid.size());
    for (double df : grid) out.values.push_back(f(df));
    return out;
}

double output_at(const ModeParams& params, const BathPopulations& baths, double df) {
    const double ta = lorentzian_transmission(params, df);
    return baths.n_vts() * (ta + baths.t_leak()) + (baths.n_ext() + baths.n_add()) * (1.0 - ta);
}

}  // namespace

std::string_view to_string(SpectrumKind kind) {
    switch (kind) {
        case SpectrumKind::antenna_output: return "n_a_out";
        case SpectrumKind::readout_input: return "n_r_in";
        case SpectrumKind::background_subtracted: return "delta_n_a_out";
    }
    return "unknown";
}

double lorentzian_transmission(const ModeParams& params, double df_hz) {
    const double g = params.gamma();
    const double x = constants::two_pi * df_hz / params.kappa_a();
    return 4.0 * g * (1.0 - g) / (1.0 + 4.0 * x * x);
}

double antenna_population(const ModeParams& params, const BathPopulations& baths) {
    const double g = params.gamma();
    return g * baths.n_vts() + (1.0 - g) * (baths.n_ext() + baths.n_add());
}

SpectralDensity antenna_output_spectrum(const ModeParams& params, const BathPopulations& baths,
                                        std::span<const double> grid_hz) {
    return tabulate(grid_hz, SpectrumKind::antenna_output,
                    [&](double df) { return output_at(params, baths, df); });
}

SpectralDensity readout_input_spectrum(const ModeParams& params, const BathPopulations& baths,
                                       std::span<const double> grid_hz) {
    const double link = baths.t_loss() * params.conversion_efficiency();
    const double floor = baths.n_loss() * (1.0 - baths.t_loss());
    return tabulate(grid_hz, SpectrumKind::readout_input,
                    [&](double df) { return output_at(params, baths, df) * link + floor; });
}

SpectralDensity classical_cooling_spectrum(const ModeParams& params, double n_vts, double n_add,
                                           std::span<const double> grid_hz) {
    if (!(n_vts >= 0.0) || !(n_add >= 0.0)) throw DomainError("populations must be >= 0");
    return tabulate(grid_hz, SpectrumKind::background_subtracted, [&](double df) {
        const double ta = lorentzian_transmission(params, df);
        return n_vts * ta + n_add * (1.0 - ta);
    });
}

std::vector<double> default_offset_grid(const ModeParams& params, double span_linewidths, std::size_t n) {
    if (n < 2) throw DomainError("grid needs at least two points");
    const double half = span_linewidths * to_hz(params.kappa_a());
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i)
        grid[i] = -half + 2.0 * half * static_cast<double>(i) / static_cast<double>(n - 1);
    return grid;
}

}  // namespace qrad
