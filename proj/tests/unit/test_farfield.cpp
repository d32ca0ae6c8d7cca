// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "isocma/farfield.hpp"
#include "isocma/modal.hpp"
#include "isocma/reproduce.hpp"

#include <cmath>

using namespace isocma;
using doctest::Approx;

namespace {

// Short wire along z with a uniform current.
FarFieldGrid hertzian(double frequency, const GridSpec& spec = {}) {
    const double lam = wavelength(frequency);
    const SegmentMesh m = build_dipole(0.01 * lam, 1e-5 * lam, 2, false);
    std::vector<std::array<cplx, 2>> ends(m.segments.size(), {cplx(1.0), cplx(1.0)});
    return radiate_segments(m, ends, frequency, spec);
}

}  // namespace

TEST_CASE("short current element") {
    const FarFieldGrid g = hertzian(1e9);
    const auto [it, ip] = g.nearest(90.0, 0.0);
    CHECK(g.directivity_dbi(it, ip) == Approx(10.0 * std::log10(1.5)).epsilon(1e-3));
    CHECK(g.mean_directivity() == Approx(1.0).epsilon(0.01));
    // P = eta0 pi / 3 (I dl / lambda)^2
    const double dl = 0.01;
    CHECK(g.radiated_power == Approx(phys::eta0 * phys::pi / 3.0 * dl * dl).epsilon(0.01));
    const auto [i0, j0] = g.nearest(0.0, 0.0);
    CHECK(g.directivity(i0, j0) < 1e-12);
}

TEST_CASE("grid bookkeeping") {
    const FarFieldGrid g = hertzian(1e9, {10.0, 15.0});
    CHECK(g.theta_deg.size() == 19);
    CHECK(g.phi_deg.size() == 24);
    CHECK(g.solid_angle_weights().sum() == Approx(4.0 * phys::pi).epsilon(1e-12));
    CHECK(g.nearest(44.0, 359.0) == std::pair<int, int>(4, 0));
    CHECK_THROWS_AS(hertzian(1e9, {7.0, 5.0}), Error);
    CHECK_THROWS_AS(hertzian(1e9, {5.0, 0.0}), Error);
}

TEST_CASE("property: mean directivity is unity and max >= 1 >= min") {
    for (double h : {0.02, 0.1, 0.3}) {
        const FarFieldGrid a = analytic_u_pattern(h, 1e9);
        CHECK(a.mean_directivity() == Approx(1.0).epsilon(1e-2));
        const DeviationReport r = directivity_deviation(a);
        CHECK(r.max_db >= 0.0);
        CHECK(r.min_db <= 0.0);
        CHECK(r.deviation_db == Approx(r.max_db - r.min_db));
    }
}

TEST_CASE("driven half-wave dipole: power balance and gain") {
    const double f = 300e6, lam = wavelength(f);
    const SegmentMesh m = build_dipole(0.5 * lam, 1e-4 * lam, 40, true);
    const ImpedanceOperator z = assemble(m, f);
    const DrivenSolution s = solve_driven(z, m);
    const FarFieldGrid g = radiate(m, *z.basis, s.current, f);
    CHECK(g.radiated_power == Approx(s.accepted_power).epsilon(0.02));
    const DeviationReport gd = gain_deviation(g, s.accepted_power);
    CHECK(gd.kind == DeviationKind::Gain);
    CHECK(gd.max_db == Approx(2.15).epsilon(0.03));
    CHECK_THROWS_AS(gain_deviation(g, 0.0), Error);
}

TEST_CASE("closed-form U pattern") {
    // Broadside to the arms the two arm terms add coherently: no dip along +-y.
    const double h = 0.1 * wavelength(1e9);
    const FarFieldGrid a = analytic_u_pattern(h, 1e9);
    const double k = wavenumber(1e9);
    const double t = phys::pi / 3, p = 0.0;
    const double u = std::pow(std::sin(0.5 * k * h * std::sin(t)) / (0.5 * k * std::sin(t)), 2);
    CHECK(analytic_u_intensity(h, 1e9, t, p) == Approx(u).epsilon(1e-12));
    CHECK(analytic_deviation(0.25) == Approx(1.0 - 8.0 / (phys::pi * phys::pi)).epsilon(1e-12));
    CHECK_THROWS_AS(analytic_deviation(0.5), Error);
    CHECK(directivity_deviation(a).deviation_db ==
          Approx(-10.0 * std::log10(1.0 - analytic_deviation(0.1))).epsilon(1e-3));
}

TEST_CASE("radiated standing-wave current agrees with the closed form") {
    for (double x : {0.02, 0.1}) {
        const double h = x * wavelength(1e9);
        const FarFieldGrid g = reference_u_pattern(h, 1e9, 64, {10.0, 10.0});
        const FarFieldGrid a = analytic_u_pattern(h, 1e9, {10.0, 10.0});
        double worst = 0.0;
        for (int i = 0; i < g.directivity.rows(); ++i)
            for (int j = 0; j < g.directivity.cols(); ++j)
                worst = std::max(worst, std::abs(g.directivity_dbi(i, j) - a.directivity_dbi(i, j)));
        CHECK(worst < 0.2);
    }
}

TEST_CASE("property: closed-form deviation grows with spacing") {
    double prev = 0.0;
    for (double x = 0.01; x < 0.5; x += 0.01) {
        const double d = analytic_deviation(x);
        REQUIRE(d > prev);
        REQUIRE(d < 1.0);
        prev = d;
    }
}

// Below about 0.05 wavelengths the modal deviation is a few hundredths of a
// dB and no longer ordered by spacing.
TEST_CASE("property: modal deviation of a thin U grows with spacing") {
    const std::vector<double> xs{0.05, 0.1, 0.15, 0.2};
    std::vector<double> dev;
    for (double x : xs) dev.push_back(thin_u_mode_deviation(x));
    for (std::size_t i = 1; i < xs.size(); ++i) CHECK(dev[i] > dev[i - 1]);
}

TEST_CASE("zero current is rejected") {
    const SegmentMesh m = build_dipole(0.1, 1e-4, 4, false);
    std::vector<std::array<cplx, 2>> ends(m.segments.size(), {cplx(0.0), cplx(0.0)});
    CHECK_THROWS_AS(radiate_segments(m, ends, 1e9), Error);
}
