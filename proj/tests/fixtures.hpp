#pragma once

#include "qrad/quantities.hpp"

#include <cmath>

namespace fixtures {

inline qrad::ModeParams device(double conversion_efficiency = 1.0) {
    return qrad::ModeParams::from_hz(
        {10.4946e9, 7.6011e9, 2.8935e9, 3.1e6, 0.77e6, 0.06e6, 0.27e6, 0.12e6, conversion_efficiency});
}

inline qrad::QubitParams qubit() {
    const double kr = device().kappa_r();
    return qrad::QubitParams({1.0 / 24e-6, 71e-6, 0.03, 0.01, 0.04, 4.6820e9, 4.4487e9, 1e-3 * kr});
}

inline qrad::QubitParams ideal_qubit() { return qrad::QubitParams({0.0, 0.0, 0.0, 0.0, 0.0, 4.6820e9, 4.4487e9, 0.0}); }

inline qrad::PulseTiming timing(double tau_p = 1.08e-6, double tau_w = 1.0e-6, std::size_t n_rep = 10000) {
    return qrad::PulseTiming(tau_p + tau_w, tau_p, n_rep);
}

inline constexpr double a0 = 0.923;

inline bool close_rel(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)); }

}  // namespace fixtures
