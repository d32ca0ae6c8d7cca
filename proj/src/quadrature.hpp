// SPDX-License-Identifier: Apache-2.0
//
// Gauss-Legendre rules mapped to [0, 1].

#pragma once

#include <cmath>
#include <numbers>
#include <vector>

namespace isocma::detail {

struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

inline GaussRule make_gauss_legendre(int n) {
    GaussRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // Recompute the derivative at the converged root.
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= n; ++k) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        rule.x[n - 1 - i] = 0.5 * (1.0 + z) ;
        rule.w[n - 1 - i] = 1.0 / ((1.0 - z * z) * dp * dp);  // (2/((1-z^2)p'^2)) / 2
    }
    return rule;
}

inline const GaussRule& gauss_legendre(int n) {
    static const GaussRule g4 = make_gauss_legendre(4);
    static const GaussRule g8 = make_gauss_legendre(8);
    static const GaussRule g16 = make_gauss_legendre(16);
    switch (n) {
        case 4: return g4;
        case 8: return g8;
        default: return g16;
    }
}

}  // namespace isocma::detail
