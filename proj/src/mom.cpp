// SPDX-License-Identifier: Apache-2.0

#include "isocma/mom.hpp"

#include "parallel.hpp"
#include "quadrature.hpp"

#include <Eigen/LU>

#include <cmath>
#include <sstream>

namespace isocma {

namespace {

constexpr cplx j{0.0, 1.0};

BasisPiece piece_into(const SegmentMesh& mesh, int s, int node) {
    const auto& seg = mesh.segments[s];
    const double len = mesh.length(s);
    if (seg.nodes[1] == node) return {s, 1.0, true, 1.0 / len};
    return {s, -1.0, false, 1.0 / len};
}

BasisPiece piece_out_of(const SegmentMesh& mesh, int s, int node) {
    const auto& seg = mesh.segments[s];
    const double len = mesh.length(s);
    if (seg.nodes[0] == node) return {s, 1.0, false, -1.0 / len};
    return {s, -1.0, true, -1.0 / len};
}

}  // namespace

BasisSet::BasisSet(const SegmentMesh& mesh) : node_to_basis_(mesh.nodes.size(), -1) {
    std::vector<std::vector<int>> incident(mesh.nodes.size());
    for (int s = 0; s < static_cast<int>(mesh.segments.size()); ++s) {
        incident[mesh.segments[s].nodes[0]].push_back(s);
        incident[mesh.segments[s].nodes[1]].push_back(s);
    }
    for (int v = 0; v < static_cast<int>(mesh.nodes.size()); ++v) {
        const auto& inc = incident[v];
        if (inc.size() < 2) continue;
        for (std::size_t k = 1; k < inc.size(); ++k) {
            BasisFunction f;
            f.node = v;
            f.pieces = {piece_into(mesh, inc[0], v), piece_out_of(mesh, inc[k], v)};
            functions_.push_back(f);
        }
        if (inc.size() == 2) node_to_basis_[v] = static_cast<int>(functions_.size()) - 1;
    }
}

int BasisSet::at_node(int node) const {
    if (node < 0 || node >= static_cast<int>(node_to_basis_.size())) return -1;
    return node_to_basis_[node];
}

int BasisSet::at_segment_end(const SegmentMesh& mesh, int segment) const {
    const int b = at_node(mesh.segments.at(segment).nodes[1]);
    if (b < 0) fail(ErrorCode::Validation, "segment " + std::to_string(segment) + " does not end on a simple joint");
    return b;
}

std::vector<std::array<cplx, 2>> BasisSet::segment_end_currents(const SegmentMesh& mesh,
                                                                const Eigen::VectorXcd& coeffs) const {
    if (coeffs.size() != size()) fail(ErrorCode::InvalidArgument, "current vector does not match the basis");
    std::vector<std::array<cplx, 2>> ends(mesh.segments.size(), {cplx{}, cplx{}});
    for (int i = 0; i < size(); ++i) {
        for (const auto& p : functions_[i].pieces) {
            const cplx c = p.sign * coeffs[i];
            if (p.rising)
                ends[p.segment][1] += c;
            else
                ends[p.segment][0] += c;
        }
    }
    return ends;
}

Eigen::VectorXcd BasisSet::coefficients_from(const SegmentMesh& mesh,
                                             const std::function<cplx(const Vec3&, const Vec3&)>& current) const {
    Eigen::VectorXcd out(size());
    for (int i = 0; i < size(); ++i) {
        const auto& f = functions_[i];
        const auto& p = f.pieces[1];
        const Vec3 flow = p.sign * mesh.direction(p.segment);
        out[i] = current(mesh.nodes[f.node], flow);
    }
    return out;
}

namespace {

struct PairMoments {
    cplx m00, m10, m01, m11;  // integrals of G, u G, u' G, u u' G over both segments (metres^2 scale)
};

struct SegGeom {
    Vec3 a, t, c;
    double len, radius;
};

// Inner integrals over source segment `src` at observation point r:
// J0 = int G ds', J1 = int (s'/L) G ds'.
void inner_extracted(const SegGeom& src, const Vec3& r, double a2, double k, cplx& j0, cplx& j1) {
    const auto& g = detail::gauss_legendre(4);
    const Vec3 d = r - src.a;
    const double s0 = d.dot(src.t);
    const double rho2 = std::max(0.0, (d - s0 * src.t).squaredNorm()) + a2;
    const double rho = std::sqrt(rho2);
    const double L = src.len;
    // Static 1/R part in closed form.
    const double st0 = std::asinh((L - s0) / rho) + std::asinh(s0 / rho);
    const double r_end = std::sqrt((L - s0) * (L - s0) + rho2);
    const double r_beg = std::sqrt(s0 * s0 + rho2);
    const double st1 = (r_end - r_beg + s0 * st0) / L;
    // Smooth remainder (exp(-jkR) - 1)/R by Gauss.
    cplx q0{}, q1{};
    for (std::size_t n = 0; n < g.x.size(); ++n) {
        const double u = g.x[n];
        const double ds = u * L - s0;
        const double R = std::sqrt(ds * ds + rho2);
        const double kr = k * R;
        const double sh = std::sin(0.5 * kr);
        const cplx val{-2.0 * sh * sh / R, -std::sin(kr) / R};
        q0 += g.w[n] * val;
        q1 += g.w[n] * u * val;
    }
    constexpr double inv4pi = 1.0 / (4.0 * phys::pi);
    j0 = (st0 + L * q0) * inv4pi;
    j1 = (st1 + L * q1) * inv4pi;
}

void inner_direct(const SegGeom& src, const Vec3& r, double a2, double k, cplx& j0, cplx& j1) {
    const auto& g = detail::gauss_legendre(4);
    cplx q0{}, q1{};
    for (std::size_t n = 0; n < g.x.size(); ++n) {
        const double u = g.x[n];
        const Vec3 rp = src.a + (u * src.len) * src.t;
        const double R = std::sqrt((r - rp).squaredNorm() + a2);
        const double kr = k * R;
        const cplx val = cplx{std::cos(kr), -std::sin(kr)} / R;
        q0 += g.w[n] * val;
        q1 += g.w[n] * u * val;
    }
    constexpr double inv4pi = 1.0 / (4.0 * phys::pi);
    j0 = src.len * q0 * inv4pi;
    j1 = src.len * q1 * inv4pi;
}

PairMoments pair_moments(const SegGeom& obs, const SegGeom& src, bool self, double k) {
    const double dist = (obs.c - src.c).norm();
    const double scale = std::max(obs.len, src.len);
    const bool near = self || dist < 4.0 * scale;
    const auto& g = detail::gauss_legendre(self ? 16 : (near ? 8 : 4));
    const double a2 = 0.5 * (obs.radius * obs.radius + src.radius * src.radius);
    PairMoments m{};
    for (std::size_t n = 0; n < g.x.size(); ++n) {
        const double u = g.x[n];
        const Vec3 r = obs.a + (u * obs.len) * obs.t;
        cplx j0, j1;
        if (near)
            inner_extracted(src, r, a2, k, j0, j1);
        else
            inner_direct(src, r, a2, k, j0, j1);
        const double w = g.w[n] * obs.len;
        m.m00 += w * j0;
        m.m10 += w * u * j0;
        m.m01 += w * j1;
        m.m11 += w * u * j1;
    }
    return m;
}

cplx overlap(const PairMoments& m, bool rise_obs, bool rise_src) {
    if (rise_obs && rise_src) return m.m11;
    if (rise_obs) return m.m10 - m.m11;
    if (rise_src) return m.m01 - m.m11;
    return m.m00 - m.m10 - m.m01 + m.m11;
}

}  // namespace

ImpedanceOperator assemble(const SegmentMesh& mesh, double frequency, const ExecPolicy& exec) {
    if (!(frequency > 0.0)) fail(ErrorCode::InvalidArgument, "frequency must be positive");
    mesh.validate();
    auto basis = std::make_shared<const BasisSet>(mesh);
    const int ns = static_cast<int>(mesh.segments.size());
    const int nb = basis->size();
    if (nb == 0) fail(ErrorCode::Validation, "mesh has no interior basis functions");

    std::vector<SegGeom> geo(ns);
    for (int s = 0; s < ns; ++s)
        geo[s] = {mesh.nodes[mesh.segments[s].nodes[0]], mesh.direction(s), mesh.center(s), mesh.length(s),
                  mesh.segments[s].radius};

    const double k = wavenumber(frequency);
    // Upper triangle of the segment-pair table; the lower one is its
    // transpose with u and u' swapped, which keeps Z exactly symmetric.
    std::vector<PairMoments> table(static_cast<std::size_t>(ns) * ns);
    detail::parallel_for(static_cast<std::size_t>(ns), exec.jobs, [&](std::size_t i) {
        for (int jdx = static_cast<int>(i); jdx < ns; ++jdx)
            table[i * ns + jdx] = pair_moments(geo[i], geo[jdx], static_cast<int>(i) == jdx, k);
    });
    for (int i = 0; i < ns; ++i)
        for (int jdx = 0; jdx < i; ++jdx) {
            const auto& up = table[static_cast<std::size_t>(jdx) * ns + i];
            table[static_cast<std::size_t>(i) * ns + jdx] = {up.m00, up.m01, up.m10, up.m11};
        }

    const double omega = 2.0 * phys::pi * frequency;
    const cplx vec_coef = j * omega * phys::mu0;
    const cplx sca_coef = 1.0 / (j * omega * phys::eps0);

    ImpedanceOperator op;
    op.frequency = frequency;
    op.basis = basis;
    op.matrix.resize(nb, nb);
    const auto& fns = basis->functions();
    detail::parallel_for(static_cast<std::size_t>(nb), exec.jobs, [&](std::size_t m) {
        for (int n = static_cast<int>(m); n < nb; ++n) {
            cplx z{};
            for (const auto& p : fns[m].pieces) {
                for (const auto& q : fns[n].pieces) {
                    const auto& mom = table[static_cast<std::size_t>(p.segment) * ns + q.segment];
                    const double tdot = geo[p.segment].t.dot(geo[q.segment].t);
                    z += vec_coef * (p.sign * q.sign * tdot) * overlap(mom, p.rising, q.rising);
                    z += sca_coef * (p.divergence * q.divergence) * mom.m00;
                }
            }
            op.matrix(static_cast<Eigen::Index>(m), n) = z;
        }
    });
    for (int m = 0; m < nb; ++m)
        for (int n = 0; n < m; ++n) op.matrix(m, n) = op.matrix(n, m);
    return op;
}

ImpedanceOperator apply_loads(const ImpedanceOperator& z, const SegmentMesh& mesh) {
    ImpedanceOperator out = z;
    const int port_basis = mesh.port ? z.basis->at_segment_end(mesh, mesh.port->segment) : -1;
    for (const auto& load : mesh.loads) {
        const int b = z.basis->at_segment_end(mesh, load.segment);
        if (b == port_basis) fail(ErrorCode::Validation, "load placed on the port segment");
        out.matrix(b, b) += load.impedance(z.frequency);
    }
    return out;
}

ImpedanceOperator assemble_loaded(const SegmentMesh& mesh, double frequency, const ExecPolicy& exec) {
    return apply_loads(assemble(mesh, frequency, exec), mesh);
}

Eigen::VectorXcd port_excitation(const SegmentMesh& mesh, const BasisSet& basis, cplx gap_voltage) {
    if (!mesh.port) fail(ErrorCode::Validation, "mesh has no port");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(basis.size());
    // E = V/gap over the gap; integrating the basis (peak value 1) across it gives V.
    v[basis.at_segment_end(mesh, mesh.port->segment)] = gap_voltage;
    return v;
}

DrivenSolution solve_driven(const ImpedanceOperator& z, const SegmentMesh& mesh, cplx gap_voltage, double z0,
                            double min_rcond) {
    if (!(z0 > 0.0)) fail(ErrorCode::InvalidArgument, "reference impedance must be positive");
    DrivenSolution sol;
    sol.frequency = z.frequency;
    sol.excitation = port_excitation(mesh, *z.basis, gap_voltage);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(z.matrix);
    sol.rcond = lu.rcond();
    if (!(sol.rcond > min_rcond)) {
        std::ostringstream msg;
        msg << "impedance matrix is singular or ill-conditioned (rcond estimate " << sol.rcond << ")";
        fail(ErrorCode::Numerical, msg.str());
    }
    sol.current = lu.solve(sol.excitation);
    const int p = z.basis->at_segment_end(mesh, mesh.port->segment);
    const cplx ip = sol.current[p];
    sol.zin = gap_voltage / ip;
    sol.s11 = (sol.zin - z0) / (sol.zin + z0);
    sol.accepted_power = 0.5 * std::real(gap_voltage * std::conj(ip));
    return sol;
}

double asymmetry(const Eigen::MatrixXcd& z) {
    const double n = z.norm();
    if (n == 0.0) return 0.0;
    return (z - z.transpose()).norm() / n;
}

}  // namespace isocma
