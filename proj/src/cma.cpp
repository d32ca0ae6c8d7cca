// SPDX-License-Identifier: Apache-2.0

#include "isocma/cma.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace isocma {

double characteristic_angle(double lambda) { return 180.0 - std::atan(lambda) * 180.0 / phys::pi; }

double modal_significance(double lambda) { return 1.0 / std::sqrt(1.0 + lambda * lambda); }

namespace {

void finish_mode(CharacteristicMode& m) {
    Eigen::Index imax = 0;
    m.current.cwiseAbs().maxCoeff(&imax);
    if (m.current[imax] < 0.0) m.current = -m.current;
    m.angle = characteristic_angle(m.eigenvalue);
    m.significance = modal_significance(m.eigenvalue);
}

}  // namespace

std::vector<CharacteristicMode> decompose(const Eigen::MatrixXd& r_in, const Eigen::MatrixXd& x_in, int n_modes,
                                          double frequency, const DecomposeOptions& options) {
    const Eigen::Index n = r_in.rows();
    if (r_in.cols() != n || x_in.rows() != n || x_in.cols() != n)
        fail(ErrorCode::InvalidArgument, "R and X must be square and of equal size");
    if (n_modes < 1 || n_modes > n) fail(ErrorCode::InvalidArgument, "n_modes must lie in [1, N]");

    const Eigen::MatrixXd r = 0.5 * (r_in + r_in.transpose());
    const Eigen::MatrixXd x = 0.5 * (x_in + x_in.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> er(r);
    if (er.info() != Eigen::Success) fail(ErrorCode::Numerical, "eigen-decomposition of R failed");
    const Eigen::VectorXd& s = er.eigenvalues();
    const double smax = s.maxCoeff();
    if (!(smax > 0.0)) fail(ErrorCode::Numerical, "R has no positive eigenvalue: nothing radiates");
    if (s.minCoeff() < -options.r_indefinite * smax) {
        std::ostringstream msg;
        msg << "R is indefinite beyond tolerance (min/max eigenvalue " << s.minCoeff() / smax
            << "); mesh too coarse or kernel error";
        fail(ErrorCode::Numerical, msg.str());
    }

    // Strong (radiating) and weak directions of R. Weak directions are
    // clipped to zero resistance and condensed out exactly:
    //   X_ww b = -X_ws a,  (X_ss - X_sw X_ww^-1 X_ws) a = lambda S_s a.
    std::vector<Eigen::Index> strong, weak;
    for (Eigen::Index i = 0; i < n; ++i) (s[i] > options.r_floor * smax ? strong : weak).push_back(i);
    const auto ks = static_cast<Eigen::Index>(strong.size());
    const auto kw = static_cast<Eigen::Index>(weak.size());
    if (ks < n_modes) n_modes = static_cast<int>(ks);

    Eigen::MatrixXd us(n, ks), uw(n, kw);
    for (Eigen::Index c = 0; c < ks; ++c) us.col(c) = er.eigenvectors().col(strong[c]);
    for (Eigen::Index c = 0; c < kw; ++c) uw.col(c) = er.eigenvectors().col(weak[c]);

    const Eigen::MatrixXd xu_s = x * us;
    Eigen::MatrixXd xc = us.transpose() * xu_s;
    Eigen::MatrixXd back;  // b = back * a
    if (kw > 0) {
        const Eigen::MatrixXd xws = uw.transpose() * xu_s;
        const Eigen::MatrixXd xww = uw.transpose() * x * uw;
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(xww);
        back = -lu.solve(xws);
        xc += xws.transpose() * back;
    }
    Eigen::VectorXd inv_sqrt(ks);
    for (Eigen::Index c = 0; c < ks; ++c) inv_sqrt[c] = 1.0 / std::sqrt(s[strong[c]]);
    Eigen::MatrixXd a = inv_sqrt.asDiagonal() * xc * inv_sqrt.asDiagonal();
    a = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(a);
    if (ea.info() != Eigen::Success) fail(ErrorCode::Numerical, "reduced characteristic-mode eigenproblem failed");

    std::vector<Eigen::Index> order(ks);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index p, Eigen::Index q) {
        return std::abs(ea.eigenvalues()[p]) < std::abs(ea.eigenvalues()[q]);
    });

    Eigen::MatrixXd v(n, n_modes);
    for (int m = 0; m < n_modes; ++m) {
        const Eigen::VectorXd coef = inv_sqrt.asDiagonal() * ea.eigenvectors().col(order[m]);
        Eigen::VectorXd cur = us * coef;
        if (kw > 0) cur += uw * (back * coef);
        v.col(m) = cur;
    }

    // Rayleigh-Ritz on the selected currents with the full R restores exact
    // R-orthonormality after the weak-direction clipping.
    const Eigen::MatrixXd g = v.transpose() * r * v;
    const Eigen::MatrixXd h = v.transpose() * x * v;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> rr(0.5 * (h + h.transpose()), 0.5 * (g + g.transpose()));
    if (rr.info() != Eigen::Success) fail(ErrorCode::Numerical, "Rayleigh-Ritz refinement failed");

    std::vector<int> ritz_order(n_modes);
    std::iota(ritz_order.begin(), ritz_order.end(), 0);
    std::stable_sort(ritz_order.begin(), ritz_order.end(), [&](int p, int q) {
        return std::abs(rr.eigenvalues()[p]) < std::abs(rr.eigenvalues()[q]);
    });
    std::vector<CharacteristicMode> modes(n_modes);
    for (int m = 0; m < n_modes; ++m) {
        auto& mode = modes[m];
        mode.frequency = frequency;
        mode.eigenvalue = rr.eigenvalues()[ritz_order[m]];
        mode.current = v * rr.eigenvectors().col(ritz_order[m]);
        const double norm = mode.current.dot(r * mode.current);
        mode.current /= std::sqrt(norm);
        finish_mode(mode);
    }
    return modes;
}

std::vector<CharacteristicMode> decompose(const ImpedanceOperator& z, int n_modes, const DecomposeOptions& options) {
    return decompose(z.matrix.real(), z.matrix.imag(), n_modes, z.frequency, options);
}

cplx mwc(const CharacteristicMode& mode, const Eigen::VectorXcd& excitation) {
    if (excitation.size() != mode.current.size()) fail(ErrorCode::InvalidArgument, "excitation does not match the basis");
    const cplx coupling = (mode.current.cast<cplx>().transpose() * excitation)(0);
    return coupling / cplx{1.0, mode.eigenvalue};
}

double mode_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& r) {
    const Eigen::VectorXd rb = r * b;
    const double ab = a.dot(rb);
    const double aa = a.dot(r * a);
    const double bb = b.dot(rb);
    if (!(aa > 0.0) || !(bb > 0.0)) return 0.0;
    return std::abs(ab) / std::sqrt(aa * bb);
}

const CharacteristicMode* ModeSweep::mode(int track, std::size_t k) const {
    const int idx = tracks.at(track).at(k);
    return idx < 0 ? nullptr : &sets[k].modes[idx];
}

std::vector<std::pair<double, double>> ModeSweep::angle_samples(int track) const {
    std::vector<std::pair<double, double>> out;
    for (std::size_t k = 0; k < frequencies.size(); ++k)
        if (const auto* m = mode(track, k)) out.emplace_back(frequencies[k], m->angle);
    return out;
}

std::vector<std::pair<double, double>> ModeSweep::eigenvalue_samples(int track) const {
    std::vector<std::pair<double, double>> out;
    for (std::size_t k = 0; k < frequencies.size(); ++k)
        if (const auto* m = mode(track, k)) out.emplace_back(frequencies[k], m->eigenvalue);
    return out;
}

void ModeTracker::push(ModeSet set) {
    if (!sweep_.frequencies.empty() && !(set.frequency > sweep_.frequencies.back()))
        fail(ErrorCode::InvalidArgument, "mode sets must be sorted by strictly increasing frequency");
    const std::size_t k = sweep_.frequencies.size();
    sweep_.frequencies.push_back(set.frequency);
    for (auto& t : sweep_.tracks) t.push_back(-1);

    std::vector<int> cur_track(set.modes.size(), -1);
    if (k > 0) {
        const auto& prev = sweep_.sets.back().modes;
        const bool have_r = set.resistance.size() > 0;
        struct Cand {
            double corr, dlam;
            int p, c;
        };
        std::vector<Cand> cands;
        for (std::size_t c = 0; c < set.modes.size(); ++c) {
            const Eigen::VectorXd& jc = set.modes[c].current;
            const Eigen::VectorXd rc = have_r ? Eigen::VectorXd(set.resistance * jc) : jc;
            const double cc = jc.dot(rc);
            for (std::size_t p = 0; p < prev.size(); ++p) {
                const Eigen::VectorXd& jp = prev[p].current;
                const double pp = have_r ? jp.dot(set.resistance * jp) : jp.squaredNorm();
                const double corr = (pp > 0.0 && cc > 0.0) ? std::abs(jp.dot(rc)) / std::sqrt(pp * cc) : 0.0;
                if (corr >= options_.correlation_floor)
                    cands.push_back({corr, std::abs(prev[p].eigenvalue - set.modes[c].eigenvalue),
                                     static_cast<int>(p), static_cast<int>(c)});
            }
        }
        std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            if (a.corr != b.corr) return a.corr > b.corr;
            return a.dlam < b.dlam;
        });
        std::vector<bool> used_p(prev.size(), false);
        for (const auto& cnd : cands) {
            if (used_p[cnd.p] || cur_track[cnd.c] >= 0) continue;
            used_p[cnd.p] = true;
            cur_track[cnd.c] = prev[cnd.p].track_id;
        }
    }
    for (auto& t : cur_track) {
        if (t >= 0) continue;
        t = static_cast<int>(sweep_.tracks.size());
        sweep_.tracks.emplace_back(k + 1, -1);
    }
    for (std::size_t c = 0; c < cur_track.size(); ++c) {
        sweep_.tracks[cur_track[c]][k] = static_cast<int>(c);
        set.modes[c].track_id = cur_track[c];
    }
    if (k > 0) sweep_.sets.back().resistance.resize(0, 0);
    sweep_.sets.push_back(std::move(set));
}

ModeSweep ModeTracker::finish() {
    if (!sweep_.sets.empty()) sweep_.sets.back().resistance.resize(0, 0);
    return std::move(sweep_);
}

ModeSweep track_modes(std::vector<ModeSet> sets, const TrackOptions& options) {
    ModeTracker tracker(options);
    for (auto& s : sets) tracker.push(std::move(s));
    return tracker.finish();
}

std::vector<double> find_resonances(const std::vector<std::pair<double, double>>& samples) {
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
        const auto [f0, a0] = samples[k];
        const auto [f1, a1] = samples[k + 1];
        const double d0 = a0 - 180.0, d1 = a1 - 180.0;
        // Rising through 180 with a large jump is the eigenvalue passing
        // through infinity, not a resonance.
        if (a1 > a0 && a1 - a0 > 90.0) continue;
        if (d0 == 0.0) {
            if (out.empty() || out.back() != f0) out.push_back(f0);
            continue;
        }
        if (d0 * d1 < 0.0) out.push_back(f0 + (f1 - f0) * d0 / (d0 - d1));
        if (d1 == 0.0 && k + 2 == samples.size()) out.push_back(f1);
    }
    return out;
}

std::optional<double> mirror_parity(const SegmentMesh& mesh, const BasisSet& basis, const Eigen::VectorXcd& current) {
    if (!mesh.mirror_normal) return std::nullopt;
    const Vec3 nrm = mesh.mirror_normal->normalized();
    const Eigen::Matrix3d mirror = Eigen::Matrix3d::Identity() - 2.0 * nrm * nrm.transpose();
    const auto ends = basis.segment_end_currents(mesh, current);
    const int ns = static_cast<int>(mesh.segments.size());
    std::vector<Eigen::Vector3cd> jc(ns);
    std::vector<Vec3> centers(ns);
    double scale = 0.0;
    for (int s = 0; s < ns; ++s) {
        jc[s] = (0.5 * (ends[s][0] + ends[s][1])) * mesh.direction(s).cast<cplx>();
        centers[s] = mesh.center(s);
        scale = std::max(scale, centers[s].norm());
    }
    const double tol = 1e-9 * std::max(scale, 1e-3);
    double num = 0.0, den = 0.0;
    for (int s = 0; s < ns; ++s) {
        const Vec3 target = mirror * centers[s];
        int match = -1;
        for (int t = 0; t < ns; ++t)
            if ((centers[t] - target).norm() < tol) {
                match = t;
                break;
            }
        if (match < 0) return std::nullopt;
        const double len = mesh.length(s);
        const Eigen::Vector3cd mapped = mirror.cast<cplx>() * jc[match];
        num += len * std::real(mapped.dot(jc[s]));
        den += len * jc[s].squaredNorm();
    }
    if (!(den > 0.0)) return std::nullopt;
    return num / den;
}

}  // namespace isocma
