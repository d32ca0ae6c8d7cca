// SPDX-License-Identifier: Apache-2.0

#include "isocma/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace isocma {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    fs::path partial = path;
    partial += ".partial";
    {
        std::ofstream out(partial, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::Io, "cannot write " + partial.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.close();
        if (!out) {
            fs::remove(partial, ec);
            fail(ErrorCode::Io, "write failed for " + partial.string());
        }
    }
    fs::rename(partial, path, ec);
    if (ec) {
        fs::remove(partial, ec);
        fail(ErrorCode::Io, "cannot rename " + partial.string() + " to " + path.string());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

std::string sweep_table(const ModeSweep& sweep, const char* unit, bool angle) {
    std::string s = "f_Hz";
    for (int t = 0; t < sweep.track_count(); ++t) s += ",track" + std::to_string(t) + unit;
    s += '\n';
    for (std::size_t k = 0; k < sweep.frequencies.size(); ++k) {
        s += num(sweep.frequencies[k]);
        for (int t = 0; t < sweep.track_count(); ++t) {
            s += ',';
            if (const auto* m = sweep.mode(t, k)) s += num(angle ? m->angle : m->eigenvalue);
        }
        s += '\n';
    }
    return s;
}

}  // namespace

std::string ca_sweep_csv(const ModeSweep& sweep) { return sweep_table(sweep, "_deg", true); }
std::string eigenvalue_sweep_csv(const ModeSweep& sweep) { return sweep_table(sweep, "_lambda", false); }

std::string driven_csv(const std::vector<PortSample>& samples) {
    std::string s = "f_Hz,ReZin_ohm,ImZin_ohm,S11_dB\n";
    for (const auto& p : samples)
        s += num(p.frequency) + ',' + num(p.zin_matched.real()) + ',' + num(p.zin_matched.imag()) + ',' +
             num(p.s11_db) + '\n';
    return s;
}

std::string matching_csv(const std::vector<PortSample>& samples) {
    std::string s = "f_Hz,ReZin_pre_ohm,ImZin_pre_ohm,ReZin_post_ohm,ImZin_post_ohm,S11_dB\n";
    for (const auto& p : samples)
        s += num(p.frequency) + ',' + num(p.zin.real()) + ',' + num(p.zin.imag()) + ',' + num(p.zin_matched.real()) +
             ',' + num(p.zin_matched.imag()) + ',' + num(p.s11_db) + '\n';
    return s;
}

std::string touchstone_s1p(const std::vector<PortSample>& samples, double z0) {
    std::string s = "! one-port reflection, frequency in Hz\n# HZ S RI R " + num(z0) + '\n';
    for (const auto& p : samples) s += num(p.frequency) + ' ' + num(p.s11.real()) + ' ' + num(p.s11.imag()) + '\n';
    return s;
}

std::string pattern_csv(const FarFieldGrid& g) {
    std::string s = "theta_deg,phi_deg,D_dBi,ReEtheta_V,ImEtheta_V,ReEphi_V,ImEphi_V\n";
    const int np = static_cast<int>(g.phi_deg.size());
    for (int it = 0; it < static_cast<int>(g.theta_deg.size()); ++it)
        for (int ip = 0; ip < np; ++ip) {
            const cplx et = g.e_theta(it, ip), ep = g.e_phi(it, ip);
            s += num(g.theta_deg[it]) + ',' + num(g.phi_deg[ip]) + ',' + num(g.directivity_dbi(it, ip)) + ',' +
                 num(et.real()) + ',' + num(et.imag()) + ',' + num(ep.real()) + ',' + num(ep.imag()) + '\n';
        }
    return s;
}

std::string deviation_csv(const std::vector<DeviationReport>& reports) {
    std::string s = "f_Hz,max_dBi,min_dBi,deviation_dB,kind\n";
    for (const auto& r : reports)
        s += num(r.frequency) + ',' + num(r.max_db) + ',' + num(r.min_db) + ',' + num(r.deviation_db) + ',' +
             (r.kind == DeviationKind::Gain ? "gain" : "directivity") + '\n';
    return s;
}

std::string eigencurrent_csv(const SegmentMesh& mesh, const CharacteristicMode& mode) {
    const BasisSet basis(mesh);
    if (mode.current.size() != basis.size()) fail(ErrorCode::InvalidArgument, "mode does not match the mesh basis");
    const auto ends = basis.segment_end_currents(mesh, mode.current.cast<cplx>());
    std::string s = "x_m,y_m,z_m,J_A,tag\n";
    for (int i = 0; i < static_cast<int>(mesh.segments.size()); ++i) {
        const Vec3 c = mesh.center(i);
        s += num(c.x()) + ',' + num(c.y()) + ',' + num(c.z()) + ',' + num(0.5 * (ends[i][0] + ends[i][1]).real()) + ',' +
             mesh.segments[i].tag + '\n';
    }
    return s;
}

std::string constellation_csv(const LinkResult& result) {
    std::string s = "ReSym,ImSym\n";
    for (const auto& r : result.received) s += num(r.real()) + ',' + num(r.imag()) + '\n';
    return s;
}

}  // namespace isocma
