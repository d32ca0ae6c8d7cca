// SPDX-License-Identifier: Apache-2.0
//
// Thin-wire meshes and the parametric U/H radiator builders.

#pragma once

#include "isocma/common.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace isocma {

/// Series R-L-C element. A zero capacitance means "no capacitor" (short).
struct LumpedLoad {
    int segment = -1;  // the element sits at this segment's end node
    double resistance = 0.0;
    double inductance = 0.0;
    double capacitance = 0.0;

    cplx impedance(double frequency) const;
};

/// Delta-gap port at the end node of `segment`.
struct Port {
    int segment = -1;
    double gap = 0.0;
};

struct Segment {
    std::array<int, 2> nodes{};
    double radius = 0.0;
    std::string tag;
};

/// Wire-grid description of a radiator. Lumped loads and the port are
/// node-centred: each references the segment that ends on the node carrying
/// it, and that node must join exactly two segments.
struct SegmentMesh {
    std::vector<Vec3> nodes;
    std::vector<Segment> segments;
    std::vector<LumpedLoad> loads;
    std::optional<Port> port;
    std::optional<Vec3> mirror_normal;  // normal of the symmetry plane through the origin
    nlohmann::json params = nlohmann::json::object();

    double length(int segment) const;
    Vec3 center(int segment) const;
    Vec3 direction(int segment) const;
    const Vec3& end_node(int segment) const { return nodes[segments[segment].nodes[1]]; }

    /// Throws Validation on dangling indices, zero-length segments, thin-wire
    /// violations or a load/port on a node that is not a simple two-segment joint.
    void validate() const;

    int connected_components() const;
    std::vector<int> node_degrees() const;
};

enum class BottomStyle { Strip, RhombusSkeleton };

struct RadiatorParams {
    double arm_length = 0.0;        // AL
    double arm_spacing = 0.0;       // h
    double strip_width = 0.0;       // w
    double rhombus_diagonal = 0.0;  // horizontal diagonal of the central element
    double inductor_value = 0.0;    // L; zero disables the pair of inductors
    double inductor_offset = 0.0;   // lL, measured from the arm tip
    double feed_gap = 0.0;          // g
    int n_pairs = 1;

    /// Throws Validation naming the first offending field.
    void validate(bool need_rhombus) const;
};

struct UOptions {
    BottomStyle bottom = BottomStyle::Strip;
    bool feed = false;
};

/// Shared central element of an H radiator.
struct HCenter {
    double rhombus_diagonal = 0.0;
    double feed_gap = 0.0;
    bool feed = true;
    BottomStyle bottom = BottomStyle::Strip;
};

/// U in the x-z plane: arms along z at x = +-h/2 spanning z in [-AL/2, AL/2],
/// bottom element along x at z = -AL/2, feed node at (0, 0, -AL/2).
SegmentMesh build_u_radiator(const RadiatorParams& params, const UOptions& options = {});

/// H in the x-z plane: the central element carries current along z through
/// the feed at the origin; pair 0 extends to -x, pair 1 to +x, further pairs
/// alternate sides nested inside the earlier ones.
SegmentMesh build_h_radiator(std::span<const RadiatorParams> pairs, const HCenter& center);

/// Straight wire along z centred at the origin, optionally fed at the centre node.
SegmentMesh build_dipole(double length, double radius, int segments, bool feed);

/// Flat strip of width w to equivalent round wire radius.
double equivalent_radius(double strip_width);

/// Split every segment so none is longer than lambda(f_max)/segments_per_wavelength,
/// except where that would leave pieces shorter than twice the wire radius;
/// those segments get as many pieces as the thin-wire limit allows.
/// Loads and the port move to the last piece of their segment, so their node
/// position is preserved exactly.
SegmentMesh discretize(const SegmentMesh& mesh, double f_max, int segments_per_wavelength = 20);

nlohmann::json mesh_to_json(const SegmentMesh& mesh);
SegmentMesh mesh_from_json(const nlohmann::json& doc);

}  // namespace isocma
