// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"
#include "oracle.hpp"

#include "isocma/designer.hpp"
#include "isocma/feednet.hpp"
#include "isocma/mom.hpp"

using namespace isocma;
using doctest::Approx;

namespace {

constexpr double kF = 300e6;

// The induced-EMF value is the zero-radius limit, so the reference wire is very thin.
cplx dipole_zin(double length_wl, int segments, double radius_wl = 1e-5) {
    const double lam = wavelength(kF);
    const SegmentMesh m = build_dipole(length_wl * lam, radius_wl * lam, segments, true);
    return solve_driven(assemble(m, kF), m).zin;
}

}  // namespace

TEST_CASE("oracle sanity") {
    CHECK(oracle::si(M_PI) == Approx(1.851937).epsilon(1e-6));
    CHECK(oracle::ci(2 * M_PI) == Approx(-0.0225607).epsilon(1e-4));
    const cplx z = oracle::induced_emf_dipole(2 * M_PI, 0.5, 1e-5);
    CHECK(z.real() == Approx(73.08).epsilon(1e-3));
    CHECK(z.imag() == Approx(42.51).epsilon(1e-3));
}

TEST_CASE("half-wave dipole against induced EMF") {
    const cplx ref = oracle::induced_emf_dipole(2 * M_PI, 0.5, 1e-5);
    const cplx z = dipole_zin(0.5, 40);
    CHECK(z.real() == Approx(ref.real()).epsilon(0.10));
    CHECK(z.imag() == Approx(ref.imag()).epsilon(0.10));
}

TEST_CASE("short dipole radiation resistance") {
    const double r_ref = 20.0 * M_PI * M_PI * 0.1 * 0.1;
    const cplx z = dipole_zin(0.1, 20);
    CHECK(z.real() == Approx(r_ref).epsilon(0.15));
    CHECK(z.imag() < -100.0);  // strongly capacitive
}

TEST_CASE("refinement converges") {
    const cplx a = dipole_zin(0.5, 40), b = dipole_zin(0.5, 80);
    CHECK(std::abs(a - b) / std::abs(b) < 0.03);
}

TEST_CASE("impedance matrix is symmetric and thread-count independent") {
    const SegmentMesh m = discretize(quad_band_design().build(), 1.5e9, 20);
    const ImpedanceOperator z1 = assemble(m, 1.2e9, {1});
    const ImpedanceOperator z3 = assemble(m, 1.2e9, {3});
    CHECK(asymmetry(z1.matrix) < 1e-10);
    CHECK((z1.matrix - z3.matrix).norm() == 0.0);
}

TEST_CASE("loads land on the diagonal") {
    const SegmentMesh m = discretize(quad_band_design().build(), 1.5e9, 20);
    const ImpedanceOperator z = assemble(m, 1e9);
    const ImpedanceOperator zl = apply_loads(z, m);
    const Eigen::MatrixXcd d = zl.matrix - z.matrix;
    double expect = 0.0;
    for (const auto& l : m.loads) {
        const int b = z.basis->at_segment_end(m, l.segment);
        REQUIRE(b >= 0);
        CHECK(std::abs(d(b, b) - l.impedance(1e9)) < 1e-9);
        expect += std::norm(l.impedance(1e9));
    }
    CHECK(d.squaredNorm() == Approx(expect).epsilon(1e-12));
}

TEST_CASE("accepted power matches the port") {
    const SegmentMesh m = build_dipole(0.5, 1e-4, 30, true);
    const DrivenSolution s = solve_driven(assemble(m, kF), m);
    // 1 V gap: P = 0.5 Re(V I*) = 0.5 Re(1 / Zin*)
    CHECK(s.accepted_power == Approx(0.5 * (1.0 / std::conj(s.zin)).real()).epsilon(1e-9));
    CHECK(std::abs(s.s11 - reflection(s.zin).s11) < 1e-12);
}

TEST_CASE("basis bookkeeping") {
    const SegmentMesh m = build_dipole(1.0, 1e-3, 10, true);
    const BasisSet b(m);
    CHECK(b.size() == 9);  // interior nodes only
    CHECK(b.at_node(0) == -1);
    CHECK(b.at_node(5) >= 0);
    const SegmentMesh h = quad_band_design().build();
    const BasisSet bh(h);
    int expect = 0;
    for (int d : h.node_degrees()) expect += std::max(0, d - 1);
    CHECK(bh.size() == expect);
}

TEST_CASE("driven solve refuses a missing port") {
    const SegmentMesh m = build_dipole(0.5, 1e-4, 10, false);
    CHECK_THROWS_AS(solve_driven(assemble(m, kF), m), Error);
}
