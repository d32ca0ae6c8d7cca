// SPDX-License-Identifier: Apache-2.0
//
// Reference values computed independently of the solver.
#pragma once

#include <cmath>
#include <complex>

namespace oracle {

inline constexpr double kEuler = 0.57721566490153286061;
inline constexpr double kEta0 = 376.730313668;

/// Composite Simpson over [0, x] with n (even) panels.
template <class F>
double simpson(F f, double x, int n = 20000) {
    const double h = x / n;
    double s = f(0.0) + f(x);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
    return s * h / 3.0;
}

/// Sine integral.
inline double si(double x) {
    return simpson([](double t) { return t == 0.0 ? 1.0 : std::sin(t) / t; }, x);
}

/// Cosine integral via gamma + ln x + int_0^x (cos t - 1)/t dt.
inline double ci(double x) {
    return kEuler + std::log(x) + simpson([](double t) { return t == 0.0 ? 0.0 : (std::cos(t) - 1.0) / t; }, x);
}

/// Induced-EMF input impedance of a thin centre-fed dipole of length L at
/// wavenumber k (sinusoidal current), referred to the current maximum.
inline std::complex<double> induced_emf_dipole(double k, double length, double radius) {
    const double kl = k * length;
    const double c = kEta0 / (2.0 * M_PI);
    const double r = c * (kEuler + std::log(kl) - ci(kl) + 0.5 * std::sin(kl) * (si(2 * kl) - 2 * si(kl)) +
                          0.5 * std::cos(kl) * (kEuler + std::log(kl / 2) + ci(2 * kl) - 2 * ci(kl)));
    const double x = 0.5 * c *
                     (2 * si(kl) + std::cos(kl) * (2 * si(kl) - si(2 * kl)) -
                      std::sin(kl) * (2 * ci(kl) - ci(2 * kl) - ci(2 * k * radius * radius / length)));
    return {r, x};
}

}  // namespace oracle
