// SPDX-License-Identifier: Apache-2.0

#include "isocma/feednet.hpp"

#include <algorithm>
#include <cmath>

namespace isocma {

cplx series_capacitor(cplx zin, double capacitance, double frequency) {
    if (!(capacitance > 0.0)) fail(ErrorCode::InvalidArgument, "capacitance must be positive");
    if (!(frequency > 0.0)) fail(ErrorCode::InvalidArgument, "frequency must be positive");
    if (std::isinf(capacitance)) return zin;
    const double omega = 2.0 * phys::pi * frequency;
    return {zin.real(), zin.imag() - 1.0 / (omega * capacitance)};
}

double parallel_plate_capacitance(double eps_r, double area, double separation) {
    if (!(eps_r > 0.0)) fail(ErrorCode::InvalidArgument, "eps_r must be positive");
    if (area < 0.0) fail(ErrorCode::InvalidArgument, "area must be non-negative");
    if (!(separation > 0.0)) fail(ErrorCode::InvalidArgument, "separation must be positive");
    return phys::eps0 * eps_r * area / separation;
}

double quality_factor(double f0, double f_low, double f_high) {
    if (!(f_low > 0.0) || !(f_high > f_low)) fail(ErrorCode::InvalidArgument, "band edges must satisfy 0 < f_low < f_high");
    if (!(f0 > 0.0)) fail(ErrorCode::InvalidArgument, "centre frequency must be positive");
    return f0 / (f_high - f_low);
}

double q_lower_bound(double ka) {
    if (!(ka > 0.0)) fail(ErrorCode::InvalidArgument, "ka must be positive");
    return 1.0 / ka + 1.0 / (ka * ka * ka);
}

double q_lower_bound(double k, double a) { return q_lower_bound(k * a); }

PortState reflection(cplx zin, double z0, double frequency, double floor_db) {
    if (!(z0 > 0.0)) fail(ErrorCode::InvalidArgument, "Z0 must be positive");
    PortState p;
    p.frequency = frequency;
    p.zin = zin;
    p.z0 = z0;
    if (std::isinf(zin.real()) || std::isinf(zin.imag())) {
        p.s11 = 1.0;
    } else {
        const cplx den = zin + z0;
        if (std::abs(den) <= 1e-12 * z0) fail(ErrorCode::InvalidArgument, "Zin = -Z0 is not a physical load");
        p.s11 = (zin - z0) / den;
    }
    const double mag = std::abs(p.s11);
    p.s11_db = mag > 0.0 ? std::max(floor_db, 20.0 * std::log10(mag)) : floor_db;
    return p;
}

void CcfsSpec::validate() const {
    const auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) fail(ErrorCode::Validation, std::string("invalid CCFS field ") + name + ": must be > 0");
    };
    positive(patch_length, "patch_length");
    positive(patch_width, "patch_width");
    positive(feedline_length, "feedline_length");
    positive(feedline_width, "feedline_width");
    positive(eps_r, "eps_r");
    positive(thickness, "thickness");
    if (capacitance < 0.0) fail(ErrorCode::Validation, "invalid CCFS field capacitance: must be >= 0");
}

double CcfsSpec::effective_capacitance() const {
    validate();
    if (capacitance > 0.0) return capacitance;
    return parallel_plate_capacitance(eps_r, patch_length * patch_width, thickness);
}

}  // namespace isocma
