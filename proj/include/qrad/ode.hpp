#pragma once

// Dormand-Prince 5(4) integrator for small complex-valued systems.

#include "qrad/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <utility>

namespace qrad::ode {

template <std::size_t N>
using State = std::array<std::complex<double>, N>;

struct Tolerances {
    double rtol = 1e-10;
    double atol = 1e-12;
    double max_step = 0.0;  // 0: unbounded
    std::size_t max_steps = 2'000'000;
};

struct Stats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t evaluations = 0;
};

namespace detail {

// Dormand-Prince 5(4) coefficients.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b_hat
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;

template <std::size_t N>
State<N> axpy(const State<N>& y, double h, std::initializer_list<std::pair<double, const State<N>*>> terms) {
    State<N> out = y;
    for (const auto& [w, k] : terms) {
        for (std::size_t i = 0; i < N; ++i) out[i] += h * w * (*k)[i];
    }
    return out;
}

template <std::size_t N>
bool all_finite(const State<N>& y) {
    return std::all_of(y.begin(), y.end(),
                       [](const std::complex<double>& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

// One Dormand-Prince step. k1 = f(t, y) on entry; on return k7 = f(t+h, y_new).
template <std::size_t N, class Rhs>
State<N> step(Rhs& f, double t, const State<N>& y, double h, const State<N>& k1, State<N>& k7, State<N>& err) {
    const State<N> k2 = f(t + c2 * h, axpy<N>(y, h, {{a21, &k1}}));
    const State<N> k3 = f(t + c3 * h, axpy<N>(y, h, {{a31, &k1}, {a32, &k2}}));
    const State<N> k4 = f(t + c4 * h, axpy<N>(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State<N> k5 = f(t + c5 * h, axpy<N>(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State<N> k6 = f(t + h, axpy<N>(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State<N> y_new = axpy<N>(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    k7 = f(t + h, y_new);
    for (std::size_t i = 0; i < N; ++i)
        err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    return y_new;
}

}  // namespace detail

/// Adaptive integration of y' = f(t, y) from t0 to t1 (t1 > t0). The observer
/// is called as obs(t, y) after every accepted step and may throw to abort.
template <std::size_t N, class Rhs, class Observer>
State<N> integrate(Rhs&& f, double t0, double t1, State<N> y, const Tolerances& tol, Observer&& obs,
                   Stats* stats = nullptr) {
    if (!(t1 > t0)) return y;
    Stats local;
    Stats& st = stats ? *stats : local;
    const double span = t1 - t0;
    const double hmax = tol.max_step > 0.0 ? std::min(tol.max_step, span) : span;

    auto scaled_norm = [&](const State<N>& e, const State<N>& a, const State<N>& b) {
        double sum = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = tol.atol + tol.rtol * std::max(std::abs(a[i]), std::abs(b[i]));
            const double r = std::abs(e[i]) / sc;
            sum += r * r;
        }
        return std::sqrt(sum / static_cast<double>(N));
    };

    State<N> k1 = f(t0, y);
    ++st.evaluations;
    if (!detail::all_finite(k1)) throw IntegrationError("ode: non-finite derivative at start");

    // Initial step from the derivative scale (Hairer's heuristic, first stage).
    double h;
    {
        const State<N> zero{};
        const double d0 = scaled_norm(y, y, zero);
        const double d1 = scaled_norm(k1, y, zero);
        h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
        h = std::min(h, hmax);
    }

    double t = t0;
    State<N> k7{};
    State<N> err{};
    const double min_step = 64.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t0), std::abs(t1));
    while (t < t1) {
        if (st.accepted + st.rejected >= tol.max_steps) throw IntegrationError("ode: step budget exhausted");
        bool last = false;
        if (t + h >= t1) {
            h = t1 - t;
            last = true;
        }
        const State<N> y_new = detail::step<N>(f, t, y, h, k1, k7, err);
        st.evaluations += 6;
        const double e = detail::all_finite(y_new) && detail::all_finite(k7) ? scaled_norm(err, y, y_new)
                                                                               : std::numeric_limits<double>::infinity();
        if (e <= 1.0) {
            t = last ? t1 : t + h;
            y = y_new;
            k1 = k7;
            ++st.accepted;
            obs(t, y);
            const double fac = e == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 5.0);
            h = std::min(h * fac, hmax);
        } else {
            ++st.rejected;
            const double fac = std::isfinite(e) ? std::clamp(0.9 * std::pow(e, -0.2), 0.1, 0.9) : 0.1;
            h *= fac;
            if (h < min_step) throw IntegrationError("ode: step size underflow");
        }
    }
    return y;
}

template <std::size_t N, class Rhs>
State<N> integrate(Rhs&& f, double t0, double t1, State<N> y, const Tolerances& tol, Stats* stats = nullptr) {
    return integrate<N>(std::forward<Rhs>(f), t0, t1, y, tol, [](double, const State<N>&) {}, stats);
}

/// Fixed-step fifth-order propagation with n equal steps.
template <std::size_t N, class Rhs>
State<N> integrate_fixed(Rhs&& f, double t0, double t1, State<N> y, std::size_t n) {
    const double h = (t1 - t0) / static_cast<double>(n);
    State<N> k1 = f(t0, y);
    State<N> k7{};
    State<N> err{};
    for (std::size_t i = 0; i < n; ++i) {
        const double t = t0 + h * static_cast<double>(i);
        y = detail::step<N>(f, t, y, h, k1, k7, err);
        k1 = k7;
    }
    return y;
}

}  // namespace qrad::ode
