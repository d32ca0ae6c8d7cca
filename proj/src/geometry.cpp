// SPDX-License-Identifier: Apache-2.0

#include "isocma/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace isocma {

double FrequencyScale::to_solver(double reported) const { return reported * std::sqrt(eps_eff); }
double FrequencyScale::to_reported(double solver) const { return solver / std::sqrt(eps_eff); }

cplx LumpedLoad::impedance(double frequency) const {
    const double omega = 2.0 * phys::pi * frequency;
    cplx z{resistance, omega * inductance};
    if (capacitance > 0.0) z += cplx{0.0, -1.0 / (omega * capacitance)};
    return z;
}

double SegmentMesh::length(int s) const {
    const auto& seg = segments[s];
    return (nodes[seg.nodes[1]] - nodes[seg.nodes[0]]).norm();
}

Vec3 SegmentMesh::center(int s) const {
    const auto& seg = segments[s];
    return 0.5 * (nodes[seg.nodes[0]] + nodes[seg.nodes[1]]);
}

Vec3 SegmentMesh::direction(int s) const {
    const auto& seg = segments[s];
    return (nodes[seg.nodes[1]] - nodes[seg.nodes[0]]).normalized();
}

std::vector<int> SegmentMesh::node_degrees() const {
    std::vector<int> deg(nodes.size(), 0);
    for (const auto& seg : segments) {
        ++deg[seg.nodes[0]];
        ++deg[seg.nodes[1]];
    }
    return deg;
}

int SegmentMesh::connected_components() const {
    std::vector<int> parent(nodes.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (const auto& seg : segments) parent[find(seg.nodes[0])] = find(seg.nodes[1]);
    const auto deg = node_degrees();
    int count = 0;
    for (std::size_t v = 0; v < nodes.size(); ++v)
        if (deg[v] > 0 && find(static_cast<int>(v)) == static_cast<int>(v)) ++count;
    return count;
}

void SegmentMesh::validate() const {
    const int n_nodes = static_cast<int>(nodes.size());
    const int n_segs = static_cast<int>(segments.size());
    if (n_segs == 0) fail(ErrorCode::Validation, "mesh has no segments");
    for (int s = 0; s < n_segs; ++s) {
        const auto& seg = segments[s];
        for (int v : seg.nodes)
            if (v < 0 || v >= n_nodes)
                fail(ErrorCode::Validation, "segment " + std::to_string(s) + " references missing node");
        const double len = length(s);
        if (!(len > 0.0)) fail(ErrorCode::Validation, "segment " + std::to_string(s) + " has zero length");
        if (!(seg.radius > 0.0)) fail(ErrorCode::Validation, "segment " + std::to_string(s) + " has no radius");
        if (seg.radius >= 0.5 * len) {
            std::ostringstream msg;
            msg << "thin-wire validity violated on segment " << s << ": radius " << seg.radius
                << " m is not below half the segment length " << len << " m";
            fail(ErrorCode::Validation, msg.str());
        }
    }
    const auto deg = node_degrees();
    auto check_node = [&](int s, const char* what) {
        if (s < 0 || s >= n_segs) fail(ErrorCode::Validation, std::string(what) + " segment index out of range");
        if (deg[segments[s].nodes[1]] != 2)
            fail(ErrorCode::Validation,
                 std::string(what) + " on segment " + std::to_string(s) + " must sit on a two-segment joint");
    };
    for (const auto& load : loads) check_node(load.segment, "load");
    if (port) {
        check_node(port->segment, "port");
        if (!(port->gap > 0.0)) fail(ErrorCode::Validation, "port gap must be positive");
        for (const auto& load : loads)
            if (segments[load.segment].nodes[1] == segments[port->segment].nodes[1])
                fail(ErrorCode::Validation, "load placed on the port node");
    }
}

double equivalent_radius(double strip_width) {
    if (!(strip_width > 0.0)) fail(ErrorCode::InvalidArgument, "strip_width must be positive");
    return strip_width / 4.0;
}

void RadiatorParams::validate(bool need_rhombus) const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) fail(ErrorCode::Validation, std::string("invalid parameter ") + name + ": must be > 0");
    };
    positive(arm_length, "arm_length");
    positive(arm_spacing, "arm_spacing");
    positive(strip_width, "strip_width");
    if (need_rhombus) positive(rhombus_diagonal, "rhombus_diagonal");
    if (inductor_value < 0.0) fail(ErrorCode::Validation, "invalid parameter inductor_value: must be >= 0");
    if (inductor_value > 0.0) {
        positive(inductor_offset, "inductor_offset");
        if (inductor_offset >= arm_length)
            fail(ErrorCode::Validation, "invalid parameter inductor_offset: must be < arm_length");
    }
    if (feed_gap < 0.0) fail(ErrorCode::Validation, "invalid parameter feed_gap: must be >= 0");
    if (n_pairs < 1) fail(ErrorCode::Validation, "invalid parameter n_pairs: must be >= 1");
}

namespace {

struct Builder {
    SegmentMesh mesh;

    int node(const Vec3& p) {
        mesh.nodes.push_back(p);
        return static_cast<int>(mesh.nodes.size()) - 1;
    }
    int seg(int a, int b, double radius, const std::string& tag) {
        mesh.segments.push_back({{a, b}, radius, tag});
        return static_cast<int>(mesh.segments.size()) - 1;
    }
};

Vec3 xz(double x, double z) { return {x, 0.0, z}; }

nlohmann::json params_json(const RadiatorParams& p) {
    return {{"arm_length", p.arm_length},       {"arm_spacing", p.arm_spacing},
            {"strip_width", p.strip_width},     {"rhombus_diagonal", p.rhombus_diagonal},
            {"inductor_value", p.inductor_value}, {"inductor_offset", p.inductor_offset},
            {"feed_gap", p.feed_gap},           {"n_pairs", p.n_pairs}};
}

// Arm from `attach` out to `tip`, with an optional inductor node at distance
// `offset` from the tip. Returns the loaded segment index or -1.
int add_arm(Builder& b, int attach, const Vec3& tip, double radius, double inductance, double offset,
            const std::string& tag) {
    const Vec3 base = b.mesh.nodes[attach];
    const int tip_node = b.node(tip);
    if (inductance > 0.0) {
        const Vec3 dir = (base - tip).normalized();
        const int mid = b.node(tip + offset * dir);
        const int loaded = b.seg(attach, mid, radius, tag);
        b.seg(mid, tip_node, radius, tag);
        b.mesh.loads.push_back({loaded, 0.0, inductance, 0.0});
        return loaded;
    }
    b.seg(attach, tip_node, radius, tag);
    return -1;
}

// Rhombus skeleton split across its transverse diagonal. `frame_a` is the
// current axis, `frame_b` the transverse axis; the apexes sit at +-half_a
// along frame_a and the transverse corners at +-half_b. Each half is a fan
// (apex to both base corners, apex to base centre, base corners to base
// centre) and the two base centres are joined through the feed node.
struct RhombusNodes {
    int apex_pos, apex_neg, feed_seg;
    Vec3 corner_pos_b, corner_neg_b;  // transverse corners of the +a half
    double split;
};

RhombusNodes add_rhombus(Builder& b, const Vec3& origin, const Vec3& frame_a, const Vec3& frame_b,
                         double half_a, double half_b, double split, double radius) {
    RhombusNodes r{};
    r.split = split;
    const int feed = b.node(origin);
    int upper_seg = -1;
    for (int side : {+1, -1}) {
        const Vec3 apex = origin + side * half_a * frame_a;
        const Vec3 base_c = origin + side * split * frame_a;
        const Vec3 base_p = base_c + half_b * frame_b;
        const Vec3 base_n = base_c - half_b * frame_b;
        const int na = b.node(apex), nc = b.node(base_c), np = b.node(base_p), nn = b.node(base_n);
        b.seg(na, np, radius, "rhombus");
        b.seg(na, nn, radius, "rhombus");
        b.seg(na, nc, radius, "rhombus");
        b.seg(np, nc, radius, "rhombus");
        b.seg(nn, nc, radius, "rhombus");
        if (side > 0) {
            r.apex_pos = na;
            r.corner_pos_b = base_p;
            r.corner_neg_b = base_n;
            upper_seg = b.seg(nc, feed, radius, "feed");
        } else {
            r.apex_neg = na;
            b.seg(feed, nc, radius, "feed");
        }
    }
    r.feed_seg = upper_seg;
    return r;
}

double rhombus_split(double feed_gap, double radius) { return std::max(0.5 * feed_gap, 2.5 * radius); }

}  // namespace

SegmentMesh build_u_radiator(const RadiatorParams& p, const UOptions& options) {
    const bool rhombus = options.bottom == BottomStyle::RhombusSkeleton;
    p.validate(rhombus);
    if (p.n_pairs != 1) fail(ErrorCode::Validation, "invalid parameter n_pairs: a U radiator has exactly one pair");
    if (options.feed && !(p.feed_gap > 0.0)) fail(ErrorCode::Validation, "invalid parameter feed_gap: feed requested");

    const double radius = equivalent_radius(p.strip_width);
    const double z0 = -0.5 * p.arm_length;
    const double hx = 0.5 * p.arm_spacing;
    Builder b;
    int left_corner, right_corner, feed_seg;
    if (rhombus) {
        const double split = rhombus_split(p.feed_gap, radius);
        if (split >= hx) fail(ErrorCode::Validation, "invalid parameter arm_spacing: too small for the rhombus feed split");
        auto r = add_rhombus(b, xz(0.0, z0), Vec3::UnitX(), Vec3::UnitZ(), hx, 0.5 * p.rhombus_diagonal, split, radius);
        right_corner = r.apex_pos;
        left_corner = r.apex_neg;
        feed_seg = r.feed_seg;
    } else {
        left_corner = b.node(xz(-hx, z0));
        const int feed = b.node(xz(0.0, z0));
        right_corner = b.node(xz(hx, z0));
        // Both halves of the bottom end on the feed node's neighbours in a
        // fixed order; the first one ends on the feed node.
        feed_seg = b.seg(left_corner, feed, radius, "bottom");
        b.seg(feed, right_corner, radius, "bottom");
    }
    const double zt = 0.5 * p.arm_length;
    add_arm(b, left_corner, xz(-hx, zt), radius, p.inductor_value, p.inductor_offset, "arm");
    add_arm(b, right_corner, xz(hx, zt), radius, p.inductor_value, p.inductor_offset, "arm");
    if (options.feed) b.mesh.port = Port{feed_seg, p.feed_gap};
    b.mesh.mirror_normal = Vec3::UnitX();
    b.mesh.params = {{"kind", "u"}, {"bottom", rhombus ? "rhombus-skeleton" : "strip"}, {"pair", params_json(p)}};
    b.mesh.validate();
    return std::move(b.mesh);
}

SegmentMesh build_h_radiator(std::span<const RadiatorParams> pairs, const HCenter& center) {
    if (pairs.size() < 2) fail(ErrorCode::Validation, "an H radiator needs at least two arm pairs (use build_u_radiator)");
    for (const auto& p : pairs) p.validate(false);
    if (!(center.rhombus_diagonal > 0.0)) fail(ErrorCode::Validation, "invalid parameter rhombus_diagonal: must be > 0");
    if (center.feed && !(center.feed_gap > 0.0))
        fail(ErrorCode::Validation, "invalid parameter feed_gap: must be > 0 when a feed is requested");
    // Pairs on the same side must nest: later pairs are shorter and narrower.
    for (std::size_t i = 1; i < pairs.size(); ++i) {
        if (!(pairs[i].arm_length < pairs[i - 1].arm_length))
            fail(ErrorCode::Validation, "nesting violated: arm_length of pair " + std::to_string(i) +
                                            " must be below pair " + std::to_string(i - 1));
        if (!(pairs[i].arm_spacing < pairs[i - 1].arm_spacing))
            fail(ErrorCode::Validation, "nesting violated: arm_spacing of pair " + std::to_string(i) +
                                            " must be below pair " + std::to_string(i - 1));
    }
    const double radius = equivalent_radius(pairs[0].strip_width);
    const double half_d = 0.5 * center.rhombus_diagonal;
    const double top = 0.5 * pairs[0].arm_spacing;
    const bool rhombus = center.bottom == BottomStyle::RhombusSkeleton;

    Builder b;
    // attach(z) returns the node on the central element at height z (z > 0
    // on the upper half), creating it if needed.
    std::vector<std::pair<double, int>> attach_upper, attach_lower;
    int feed_seg = -1;
    RhombusNodes rh{};
    if (rhombus) {
        const double split = rhombus_split(center.feed_gap, radius);
        rh = add_rhombus(b, Vec3::Zero(), Vec3::UnitZ(), Vec3::UnitX(), top, half_d, split, radius);
        feed_seg = rh.feed_seg;
    }

    std::vector<std::array<int, 2>> attach_nodes(pairs.size());
    if (rhombus) {
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const double zi = 0.5 * pairs[i].arm_spacing;
            if (i == 0) {
                attach_nodes[i] = {rh.apex_pos, rh.apex_neg};
                continue;
            }
            if (zi <= rh.split + 2.0 * radius)
                fail(ErrorCode::Validation, "invalid parameter arm_spacing: pair " + std::to_string(i) +
                                                " too narrow for the rhombus feed split");
            // Insert the attach point on the apex-to-corner edge on this pair's side.
            const double side = (i % 2 == 0) ? -1.0 : 1.0;
            for (int half = 0; half < 2; ++half) {
                const double sgn = half == 0 ? 1.0 : -1.0;
                const int apex = half == 0 ? rh.apex_pos : rh.apex_neg;
                const Vec3 apex_p = b.mesh.nodes[apex];
                const Vec3 corner{side * half_d, 0.0, sgn * rh.split};
                const double t = (top - zi) / (top - rh.split);
                const Vec3 at = apex_p + t * (corner - apex_p);
                // Find and split the edge apex-corner.
                for (int s = 0; s < static_cast<int>(b.mesh.segments.size()); ++s) {
                    auto& seg = b.mesh.segments[s];
                    if (seg.nodes[0] != apex) continue;
                    const Vec3 far = b.mesh.nodes[seg.nodes[1]];
                    if ((far - corner).norm() > 1e-12) continue;
                    const int mid = b.node(at);
                    const int far_node = seg.nodes[1];
                    seg.nodes[1] = mid;
                    b.seg(mid, far_node, radius, "rhombus");
                    attach_nodes[i][half] = mid;
                    break;
                }
            }
        }
    } else {
        // Vertical bar along z through the feed at the origin, with nodes at
        // every pair's attach height.
        std::vector<double> zs;
        for (const auto& p : pairs) zs.push_back(0.5 * p.arm_spacing);
        std::vector<double> levels = zs;
        std::sort(levels.begin(), levels.end());
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
        const int feed = b.node(Vec3::Zero());
        std::vector<int> up_nodes, down_nodes;
        int prev_up = feed, prev_down = feed;
        for (double z : levels) {
            const int nu = b.node(xz(0.0, z));
            const int nd = b.node(xz(0.0, -z));
            if (prev_up == feed) {
                feed_seg = b.seg(nu, feed, radius, "bar");
            } else {
                b.seg(nu, prev_up, radius, "bar");
            }
            b.seg(prev_down, nd, radius, "bar");
            prev_up = nu;
            prev_down = nd;
            up_nodes.push_back(nu);
            down_nodes.push_back(nd);
        }
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const auto it = std::find(levels.begin(), levels.end(), zs[i]);
            const auto k = static_cast<std::size_t>(it - levels.begin());
            attach_nodes[i] = {up_nodes[k], down_nodes[k]};
        }
    }

    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        const double side = (i % 2 == 0) ? -1.0 : 1.0;
        const double zi = 0.5 * p.arm_spacing;
        const std::string tag = std::string("arm:") + std::to_string(i);
        for (int half = 0; half < 2; ++half) {
            const int at = attach_nodes[i][half];
            const double tip_x = b.mesh.nodes[at].x() + side * p.arm_length;
            add_arm(b, at, xz(tip_x, half == 0 ? zi : -zi), radius, p.inductor_value, p.inductor_offset, tag);
        }
    }

    if (center.feed) b.mesh.port = Port{feed_seg, center.feed_gap};
    b.mesh.mirror_normal = Vec3::UnitZ();
    nlohmann::json jp = nlohmann::json::array();
    for (const auto& p : pairs) jp.push_back(params_json(p));
    b.mesh.params = {{"kind", "h"},
                     {"bottom", rhombus ? "rhombus-skeleton" : "strip"},
                     {"rhombus_diagonal", center.rhombus_diagonal},
                     {"feed_gap", center.feed_gap},
                     {"pairs", jp}};
    b.mesh.validate();
    return std::move(b.mesh);
}

SegmentMesh build_dipole(double length, double radius, int segments, bool feed) {
    if (!(length > 0.0)) fail(ErrorCode::InvalidArgument, "dipole length must be positive");
    if (segments < 1) fail(ErrorCode::InvalidArgument, "dipole needs at least one segment");
    if (feed && segments % 2 != 0) fail(ErrorCode::InvalidArgument, "centre-fed dipole needs an even segment count");
    Builder b;
    for (int i = 0; i <= segments; ++i) b.node({0.0, 0.0, -0.5 * length + length * i / segments});
    for (int i = 0; i < segments; ++i) b.seg(i, i + 1, radius, "arm");
    if (feed) b.mesh.port = Port{segments / 2 - 1, std::min(length / segments, 1e-3)};
    b.mesh.mirror_normal = Vec3::UnitZ();
    b.mesh.params = {{"kind", "dipole"}, {"length", length}, {"radius", radius}};
    b.mesh.validate();
    return std::move(b.mesh);
}

SegmentMesh discretize(const SegmentMesh& mesh, double f_max, int segments_per_wavelength) {
    if (!(f_max > 0.0)) fail(ErrorCode::InvalidArgument, "f_max must be positive");
    if (segments_per_wavelength < 10) fail(ErrorCode::InvalidArgument, "segments_per_wavelength must be >= 10");
    const double max_len = wavelength(f_max) / segments_per_wavelength;

    SegmentMesh out;
    out.nodes = mesh.nodes;
    out.mirror_normal = mesh.mirror_normal;
    out.params = mesh.params;
    std::vector<int> last_piece(mesh.segments.size());
    for (std::size_t s = 0; s < mesh.segments.size(); ++s) {
        const auto& seg = mesh.segments[s];
        const Vec3 a = mesh.nodes[seg.nodes[0]];
        const Vec3 bpt = mesh.nodes[seg.nodes[1]];
        const double len = (bpt - a).norm();
        int pieces = std::max(1, static_cast<int>(std::ceil(len / max_len - 1e-9)));
        // Never split below the thin-wire limit; a fat wire keeps longer pieces.
        const int thin_cap = static_cast<int>(std::floor(len / (2.0 * seg.radius) * (1.0 - 1e-9)));
        pieces = std::max(1, std::min(pieces, thin_cap));
        int prev = seg.nodes[0];
        for (int k = 1; k <= pieces; ++k) {
            int next;
            if (k == pieces) {
                next = seg.nodes[1];
            } else {
                out.nodes.push_back(a + (bpt - a) * (static_cast<double>(k) / pieces));
                next = static_cast<int>(out.nodes.size()) - 1;
            }
            out.segments.push_back({{prev, next}, seg.radius, seg.tag});
            prev = next;
        }
        last_piece[s] = static_cast<int>(out.segments.size()) - 1;
    }
    for (auto load : mesh.loads) {
        load.segment = last_piece.at(load.segment);
        out.loads.push_back(load);
    }
    if (mesh.port) out.port = Port{last_piece.at(mesh.port->segment), mesh.port->gap};
    out.validate();
    return out;
}

nlohmann::json mesh_to_json(const SegmentMesh& mesh) {
    nlohmann::json doc;
    auto& nodes = doc["nodes"] = nlohmann::json::array();
    for (const auto& n : mesh.nodes) nodes.push_back({n.x(), n.y(), n.z()});
    auto& segs = doc["segments"] = nlohmann::json::array();
    for (const auto& s : mesh.segments)
        segs.push_back({{"nodes", {s.nodes[0], s.nodes[1]}}, {"radius", s.radius}, {"tag", s.tag}});
    auto& loads = doc["loads"] = nlohmann::json::array();
    for (const auto& l : mesh.loads)
        loads.push_back({{"segment", l.segment}, {"R", l.resistance}, {"L", l.inductance}, {"C", l.capacitance}});
    if (mesh.port)
        doc["port"] = {{"segment", mesh.port->segment}, {"gap", mesh.port->gap}};
    else
        doc["port"] = nullptr;
    if (mesh.mirror_normal) {
        const auto& m = *mesh.mirror_normal;
        doc["mirror_normal"] = {m.x(), m.y(), m.z()};
    }
    doc["params"] = mesh.params;
    return doc;
}

SegmentMesh mesh_from_json(const nlohmann::json& doc) {
    SegmentMesh mesh;
    try {
        for (const auto& n : doc.at("nodes")) mesh.nodes.emplace_back(n.at(0).get<double>(), n.at(1).get<double>(), n.at(2).get<double>());
        for (const auto& s : doc.at("segments"))
            mesh.segments.push_back({{s.at("nodes").at(0).get<int>(), s.at("nodes").at(1).get<int>()},
                                     s.at("radius").get<double>(),
                                     s.value("tag", std::string{})});
        if (doc.contains("loads"))
            for (const auto& l : doc.at("loads"))
                mesh.loads.push_back({l.at("segment").get<int>(), l.value("R", 0.0), l.value("L", 0.0), l.value("C", 0.0)});
        if (doc.contains("port") && !doc.at("port").is_null())
            mesh.port = Port{doc.at("port").at("segment").get<int>(), doc.at("port").at("gap").get<double>()};
        if (doc.contains("mirror_normal")) {
            const auto& m = doc.at("mirror_normal");
            mesh.mirror_normal = Vec3{m.at(0).get<double>(), m.at(1).get<double>(), m.at(2).get<double>()};
        }
        if (doc.contains("params")) mesh.params = doc.at("params");
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Io, std::string("malformed geometry document: ") + e.what());
    }
    mesh.validate();
    return mesh;
}

}  // namespace isocma
