// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "isocma/designer.hpp"
#include "isocma/geometry.hpp"

#include <algorithm>

using namespace isocma;
using doctest::Approx;

namespace {

double total_length(const SegmentMesh& m) {
    double s = 0.0;
    for (int i = 0; i < static_cast<int>(m.segments.size()); ++i) s += m.length(i);
    return s;
}

bool mirror_closed(const SegmentMesh& m) {
    const Vec3 n = *m.mirror_normal;
    for (const auto& p : m.nodes) {
        const Vec3 q = p - 2.0 * p.dot(n) * n;
        const bool found = std::any_of(m.nodes.begin(), m.nodes.end(), [&](const Vec3& r) { return (r - q).norm() < 1e-12; });
        if (!found) return false;
    }
    return true;
}

RadiatorParams u_params() {
    RadiatorParams p;
    p.arm_length = 60e-3;
    p.arm_spacing = 22e-3;
    p.strip_width = 4.8e-3;
    p.rhombus_diagonal = 10e-3;
    p.feed_gap = 1e-3;
    return p;
}

}  // namespace

TEST_CASE("strip to wire radius") {
    CHECK(equivalent_radius(4.8e-3) == Approx(1.2e-3));
    CHECK_THROWS_AS(equivalent_radius(0.0), Error);
}

TEST_CASE("U radiator layout") {
    const SegmentMesh m = build_u_radiator(u_params(), {BottomStyle::Strip, true});
    CHECK(m.connected_components() == 1);
    REQUIRE(m.port);
    const Vec3 feed = m.end_node(m.port->segment);
    CHECK(feed.x() == Approx(0.0));
    CHECK(feed.z() == Approx(-30e-3));
    const auto deg = m.node_degrees();
    CHECK(std::count(deg.begin(), deg.end(), 1) == 2);  // two arm tips
    CHECK(total_length(m) == Approx(2 * 60e-3 + 22e-3));
    CHECK(mirror_closed(m));
}

TEST_CASE("loaded U carries two inductors at the requested offset") {
    RadiatorParams p = u_params();
    p.inductor_value = 40e-9;
    p.inductor_offset = 13e-3;
    const SegmentMesh m = build_u_radiator(p);
    REQUIRE(m.loads.size() == 2);
    for (const auto& l : m.loads) {
        CHECK(l.inductance == 40e-9);
        CHECK(m.end_node(l.segment).z() == Approx(30e-3 - 13e-3));
    }
    CHECK(m.loads[0].impedance(1e9).imag() == Approx(2 * M_PI * 1e9 * 40e-9));
}

TEST_CASE("rhombus-bottom U stays symmetric") {
    const SegmentMesh m = build_u_radiator(u_params(), {BottomStyle::RhombusSkeleton, true});
    CHECK(m.connected_components() == 1);
    CHECK(mirror_closed(m));
}

TEST_CASE("parameter validation names the field") {
    RadiatorParams p = u_params();
    p.arm_length = -1.0;
    try {
        build_u_radiator(p);
        FAIL("expected a validation error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Validation);
        CHECK(std::string(e.what()).find("arm_length") != std::string::npos);
    }
    p = u_params();
    p.inductor_value = 10e-9;
    p.inductor_offset = 70e-3;
    CHECK_THROWS_AS(build_u_radiator(p), Error);
}

TEST_CASE("H radiator nesting and symmetry") {
    const HDesign d = quad_band_design();
    const SegmentMesh m = d.build();
    CHECK(m.connected_components() == 1);
    CHECK(m.loads.size() == 4);
    CHECK(mirror_closed(m));
    REQUIRE(m.port);
    CHECK(m.end_node(m.port->segment).norm() == Approx(0.0));

    auto pairs = d.pairs;
    std::swap(pairs[0], pairs[1]);
    CHECK_THROWS_AS(build_h_radiator(pairs, d.center), Error);
    CHECK_THROWS_AS(build_h_radiator(std::span(pairs.data(), 1), d.center), Error);
}

TEST_CASE("HDesign symbols") {
    HDesign d = quad_band_design();
    CHECK(d.get("AL1") == Approx(66.7e-3));
    CHECK(d.get("L2") == Approx(20e-9));
    d.set("AL2", 40e-3);
    CHECK(d.pairs[1].arm_length == 40e-3);
    d.set("G", 30e-3);
    CHECK(d.get("G") == 30e-3);
    CHECK_THROWS_AS(d.set("Q1", 1.0), Error);
    CHECK_THROWS_AS(d.get("AL9"), Error);
}

TEST_CASE("mesh validation") {
    SegmentMesh m = build_dipole(0.5, 1e-3, 10, true);
    m.validate();
    SegmentMesh bad = m;
    bad.segments[0].nodes[1] = 99;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = m;
    bad.segments[0].radius = 0.04;  // longer than half the segment
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = m;
    bad.loads.push_back({bad.port->segment, 0.0, 1e-9, 0.0});
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = m;
    bad.loads.push_back({static_cast<int>(bad.segments.size()) - 1, 0.0, 1e-9, 0.0});  // free end
    CHECK_THROWS_AS(bad.validate(), Error);
    CHECK_THROWS_AS(build_dipole(0.5, 1e-3, 9, true), Error);
}

TEST_CASE("discretize preserves geometry and element nodes") {
    const HDesign d = quad_band_design();
    const SegmentMesh coarse = d.build();
    const SegmentMesh fine = discretize(coarse, 3e9, 20);
    CHECK(total_length(fine) == Approx(total_length(coarse)).epsilon(1e-12));
    CHECK(fine.segments.size() > coarse.segments.size());
    const double lmax = wavelength(3e9) / 20.0;
    for (int s = 0; s < static_cast<int>(fine.segments.size()); ++s) {
        const double len = fine.length(s);
        // Either fine enough, or held back by the thin-wire limit.
        CHECK((len <= lmax * (1 + 1e-9) || len < 4.0 * fine.segments[s].radius + 1e-12));
        CHECK(len >= 2.0 * fine.segments[s].radius);
    }
    REQUIRE(fine.loads.size() == coarse.loads.size());
    for (std::size_t i = 0; i < fine.loads.size(); ++i)
        CHECK((fine.end_node(fine.loads[i].segment) - coarse.end_node(coarse.loads[i].segment)).norm() < 1e-15);
    CHECK((fine.end_node(fine.port->segment) - coarse.end_node(coarse.port->segment)).norm() < 1e-15);
    fine.validate();
}

TEST_CASE("json round trip") {
    const SegmentMesh m = discretize(quad_band_design().build(), 2e9, 20);
    const SegmentMesh r = mesh_from_json(mesh_to_json(m));
    CHECK(mesh_to_json(r) == mesh_to_json(m));
    CHECK(r.loads.size() == m.loads.size());
    CHECK(r.mirror_normal.has_value());
    CHECK_THROWS_AS(mesh_from_json(nlohmann::json::parse(R"({"nodes": []})")), Error);
}
