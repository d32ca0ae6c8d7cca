// SPDX-License-Identifier: Apache-2.0
//
// Series-capacitor matching arithmetic, reflection coefficient and Q figures.

#pragma once

#include "isocma/common.hpp"

namespace isocma {

struct PortState {
    double frequency = 0.0;
    cplx zin;
    double z0 = 50.0;
    cplx s11;
    double s11_db = 0.0;  // 20 log10 |S11|, floored
};

inline constexpr double kS11FloorDb = -80.0;

/// Zin + 1 / (j omega C).
cplx series_capacitor(cplx zin, double capacitance, double frequency);

/// eps0 * eps_r * area / separation.
double parallel_plate_capacitance(double eps_r, double area, double separation);

/// f0 / (f_high - f_low).
double quality_factor(double f0, double f_low, double f_high);
/// 1/ka + 1/(ka)^3.
double q_lower_bound(double ka);
double q_lower_bound(double k, double a);

PortState reflection(cplx zin, double z0 = 50.0, double frequency = 0.0, double floor_db = kS11FloorDb);

/// Coupling patch and feedline of the capacitive feed. Only the patch
/// overlap enters the parallel-plate estimate.
struct CcfsSpec {
    double patch_length = 0.0;     // CL
    double patch_width = 0.0;      // CW
    double feedline_length = 0.0;  // ML
    double feedline_width = 0.0;   // MW
    double eps_r = 1.0;
    double thickness = 0.0;        // d
    double capacitance = 0.0;      // Ce; zero means "estimate from the patch"

    void validate() const;
    double effective_capacitance() const;
};

}  // namespace isocma
