// SPDX-License-Identifier: Apache-2.0

#include "isocma/farfield.hpp"

#include "parallel.hpp"
#include "quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace isocma {

namespace {

constexpr double deg = phys::pi / 180.0;

struct Sphere {
    std::vector<double> theta, phi;  // degrees
};

Sphere make_sphere(const GridSpec& spec) {
    const auto count = [](double span, double step, const char* what) {
        if (!(step > 0.0)) fail(ErrorCode::InvalidArgument, std::string(what) + " step must be positive");
        const double n = span / step;
        if (std::abs(n - std::round(n)) > 1e-9 || n < 2)
            fail(ErrorCode::InvalidArgument, std::string(what) + " step must divide the angular range");
        return static_cast<int>(std::round(n));
    };
    const int nt = count(180.0, spec.theta_step_deg, "theta");
    const int np = count(360.0, spec.phi_step_deg, "phi");
    Sphere s;
    for (int i = 0; i <= nt; ++i) s.theta.push_back(i * spec.theta_step_deg);
    for (int j = 0; j < np; ++j) s.phi.push_back(j * spec.phi_step_deg);
    return s;
}

// Radiation-vector contribution of all segments in direction khat.
struct SegmentSource {
    Vec3 a;
    Vec3 d;  // b - a
    Vec3 t;
    cplx i0, i1;
};

// Integral over u in [0, 1] of [(1-u) i0 + u i1] exp(j psi u).
cplx linear_phase_integral(double psi, cplx i0, cplx i1) {
    cplx e0, e1;
    if (std::abs(psi) < 1e-3) {
        const double p2 = psi * psi;
        e0 = {1.0 - p2 / 6.0, psi / 2.0 - p2 * psi / 24.0};
        e1 = {0.5 - p2 / 8.0, psi / 3.0 - p2 * psi / 30.0};
    } else {
        const cplx j{0.0, 1.0};
        const cplx ex = std::exp(j * psi);
        e0 = (ex - 1.0) / (j * psi);
        e1 = ex / (j * psi) - (ex - 1.0) / (j * psi * j * psi);
    }
    return i0 * (e0 - e1) + i1 * e1;
}

Eigen::Vector3cd radiation_vector(const std::vector<SegmentSource>& src, double k, const Vec3& khat) {
    Eigen::Vector3cd n = Eigen::Vector3cd::Zero();
    for (const auto& s : src) {
        const double ph = k * khat.dot(s.a);
        const double psi = k * khat.dot(s.d);
        const cplx integral = linear_phase_integral(psi, s.i0, s.i1) * s.d.norm();
        n += (std::exp(cplx{0.0, ph}) * integral) * s.t.cast<cplx>();
    }
    return n;
}

Vec3 khat_of(double th, double ph) {
    return {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
}
Vec3 theta_hat(double th, double ph) {
    return {std::cos(th) * std::cos(ph), std::cos(th) * std::sin(ph), -std::sin(th)};
}
Vec3 phi_hat(double ph) { return {-std::sin(ph), std::cos(ph), 0.0}; }

// Power integral of an intensity function with Gauss-Legendre in cos(theta)
// and the periodic trapezoid rule in phi.
template <class F>
double integrate_sphere(int n_theta, int n_phi, F&& intensity, unsigned jobs) {
    const auto rule = detail::make_gauss_legendre(n_theta);
    std::vector<double> rows(n_theta, 0.0);
    detail::parallel_for(n_theta, jobs, [&](std::size_t i) {
        const double mu = 2.0 * rule.x[i] - 1.0;
        const double th = std::acos(mu);
        double acc = 0.0;
        for (int j = 0; j < n_phi; ++j) acc += intensity(th, 2.0 * phys::pi * j / n_phi);
        rows[i] = acc * 2.0 * rule.w[i] * (2.0 * phys::pi / n_phi);
    });
    double total = 0.0;
    for (double r : rows) total += r;
    return total;
}

void fill_directivity(FarFieldGrid& g) {
    if (!(g.radiated_power > 0.0) || !std::isfinite(g.radiated_power))
        fail(ErrorCode::Numerical, "nothing radiates: radiated power is zero");
    g.directivity = g.intensity * (4.0 * phys::pi / g.radiated_power);
}

DeviationReport extrema(const Eigen::MatrixXd& lin, double frequency, DeviationKind kind) {
    const double floor = 1e-30;
    DeviationReport r;
    r.frequency = frequency;
    r.kind = kind;
    r.max_db = 10.0 * std::log10(std::max(lin.maxCoeff(), floor));
    r.min_db = 10.0 * std::log10(std::max(lin.minCoeff(), floor));
    r.deviation_db = r.max_db - r.min_db;
    return r;
}

}  // namespace

double FarFieldGrid::directivity_dbi(int it, int ip) const {
    return 10.0 * std::log10(std::max(directivity(it, ip), 1e-30));
}

Eigen::MatrixXd FarFieldGrid::solid_angle_weights() const {
    const int nt = static_cast<int>(theta_deg.size());
    const int np = static_cast<int>(phi_deg.size());
    Eigen::MatrixXd w(nt, np);
    const double dth = (theta_deg[1] - theta_deg[0]) * deg;
    const double dph = 2.0 * phys::pi / np;
    for (int i = 0; i < nt; ++i) {
        const double th = theta_deg[i] * deg;
        const double lo = std::max(0.0, th - dth / 2.0);
        const double hi = std::min(phys::pi, th + dth / 2.0);
        w.row(i).setConstant((std::cos(lo) - std::cos(hi)) * dph);
    }
    return w;
}

double FarFieldGrid::mean_directivity() const {
    return (solid_angle_weights().array() * directivity.array()).sum() / (4.0 * phys::pi);
}

std::pair<int, int> FarFieldGrid::nearest(double theta, double phi) const {
    const double dth = theta_deg[1] - theta_deg[0];
    const double dph = phi_deg[1] - phi_deg[0];
    const int nt = static_cast<int>(theta_deg.size());
    const int np = static_cast<int>(phi_deg.size());
    int it = static_cast<int>(std::lround(std::clamp(theta, 0.0, 180.0) / dth));
    it = std::clamp(it, 0, nt - 1);
    double p = std::fmod(phi, 360.0);
    if (p < 0) p += 360.0;
    int ip = static_cast<int>(std::lround(p / dph)) % np;
    return {it, ip};
}

FarFieldGrid radiate_segments(const SegmentMesh& mesh, const std::vector<std::array<cplx, 2>>& ends,
                              double frequency, const GridSpec& spec, const ExecPolicy& exec) {
    if (!(frequency > 0.0)) fail(ErrorCode::InvalidArgument, "frequency must be positive");
    if (ends.size() != mesh.segments.size()) fail(ErrorCode::InvalidArgument, "current does not match the mesh");
    std::vector<SegmentSource> src;
    double rmax = 0.0, peak = 0.0;
    for (std::size_t s = 0; s < ends.size(); ++s) {
        const auto& seg = mesh.segments[s];
        const Vec3& a = mesh.nodes[seg.nodes[0]];
        const Vec3& b = mesh.nodes[seg.nodes[1]];
        rmax = std::max({rmax, a.norm(), b.norm()});
        peak = std::max({peak, std::abs(ends[s][0]), std::abs(ends[s][1])});
        if (ends[s][0] == cplx{} && ends[s][1] == cplx{}) continue;
        src.push_back({a, b - a, (b - a).normalized(), ends[s][0], ends[s][1]});
    }
    if (src.empty() || !(peak > 0.0)) fail(ErrorCode::Numerical, "nothing radiates: current is zero on every segment");

    const double k = wavenumber(frequency);
    const double omega = 2.0 * phys::pi * frequency;
    const cplx pref = cplx{0.0, -omega * phys::mu0 / (4.0 * phys::pi)};
    const auto field = [&](double th, double ph) {
        const Eigen::Vector3cd n = radiation_vector(src, k, khat_of(th, ph));
        return std::pair<cplx, cplx>{pref * n.dot(theta_hat(th, ph).cast<cplx>()),
                                     pref * n.dot(phi_hat(ph).cast<cplx>())};
    };
    const auto power_density = [&](double th, double ph) {
        const auto [et, ep] = field(th, ph);
        return (std::norm(et) + std::norm(ep)) / (2.0 * phys::eta0);
    };

    const Sphere sphere = make_sphere(spec);
    FarFieldGrid g;
    g.frequency = frequency;
    g.theta_deg = sphere.theta;
    g.phi_deg = sphere.phi;
    const int nt = static_cast<int>(sphere.theta.size());
    const int np = static_cast<int>(sphere.phi.size());
    g.e_theta.resize(nt, np);
    g.e_phi.resize(nt, np);
    g.intensity.resize(nt, np);
    detail::parallel_for(nt, exec.jobs, [&](std::size_t i) {
        for (int j = 0; j < np; ++j) {
            const auto [et, ep] = field(sphere.theta[i] * deg, sphere.phi[j] * deg);
            g.e_theta(i, j) = et;
            g.e_phi(i, j) = ep;
            g.intensity(i, j) = (std::norm(et) + std::norm(ep)) / (2.0 * phys::eta0);
        }
    });

    const int order = 16 + 2 * static_cast<int>(std::ceil(k * rmax));
    g.radiated_power = integrate_sphere(order, 2 * order, power_density, exec.jobs);
    fill_directivity(g);
    return g;
}

FarFieldGrid radiate(const SegmentMesh& mesh, const BasisSet& basis, const Eigen::VectorXcd& current,
                     double frequency, const GridSpec& spec, const ExecPolicy& exec) {
    return radiate_segments(mesh, basis.segment_end_currents(mesh, current), frequency, spec, exec);
}

DeviationReport directivity_deviation(const FarFieldGrid& grid) {
    return extrema(grid.directivity, grid.frequency, DeviationKind::Directivity);
}

DeviationReport gain_deviation(const FarFieldGrid& grid, double accepted_power) {
    if (!(accepted_power > 0.0)) fail(ErrorCode::InvalidArgument, "accepted power must be positive");
    return extrema(grid.intensity * (4.0 * phys::pi / accepted_power), grid.frequency, DeviationKind::Gain);
}

double analytic_u_intensity(double h, double frequency, double th, double ph) {
    const double q = 0.5 * wavenumber(frequency) * std::sin(th) * std::cos(ph);
    const double x = q * h;
    if (std::abs(x) < 1e-6) return h * h * (1.0 - x * x / 3.0);
    const double s = std::sin(x);
    return s * s / (q * q);
}

FarFieldGrid analytic_u_pattern(double h, double frequency, const GridSpec& spec) {
    if (!(h > 0.0)) fail(ErrorCode::InvalidArgument, "h must be positive");
    if (!(frequency > 0.0)) fail(ErrorCode::InvalidArgument, "frequency must be positive");
    const Sphere sphere = make_sphere(spec);
    FarFieldGrid g;
    g.frequency = frequency;
    g.theta_deg = sphere.theta;
    g.phi_deg = sphere.phi;
    const int nt = static_cast<int>(sphere.theta.size());
    const int np = static_cast<int>(sphere.phi.size());
    g.intensity.resize(nt, np);
    g.e_phi = Eigen::MatrixXcd::Zero(nt, np);
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < np; ++j)
            g.intensity(i, j) = analytic_u_intensity(h, frequency, sphere.theta[i] * deg, sphere.phi[j] * deg);
    g.e_theta = g.intensity.array().sqrt().cast<cplx>();
    const int order = 16 + 2 * static_cast<int>(std::ceil(wavenumber(frequency) * h));
    g.radiated_power = integrate_sphere(
        order, 2 * order, [&](double th, double ph) { return analytic_u_intensity(h, frequency, th, ph); }, 1);
    fill_directivity(g);
    return g;
}

double analytic_deviation(double x) {
    if (!(x > 0.0) || !(x < 0.5)) fail(ErrorCode::InvalidArgument, "h/lambda must lie in (0, 0.5)");
    const double a = phys::pi * x;
    const double s = std::sin(a) / a;
    return 1.0 - s * s;
}

}  // namespace isocma
