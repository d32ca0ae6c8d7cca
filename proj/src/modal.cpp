// SPDX-License-Identifier: Apache-2.0

#include "isocma/modal.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>

namespace isocma {

std::vector<double> linear_grid(double start, double stop, int points) {
    if (!(start > 0.0) || !(stop > start)) fail(ErrorCode::InvalidArgument, "frequency range must satisfy 0 < start < stop");
    if (points < 2) fail(ErrorCode::InvalidArgument, "a frequency range needs at least 2 points");
    std::vector<double> out(points);
    for (int i = 0; i < points; ++i) out[i] = start + (stop - start) * i / (points - 1);
    out.back() = stop;
    return out;
}

ModeSet modes_at(const SegmentMesh& mesh, double frequency, const SweepOptions& options) {
    const double fs = options.scale.to_solver(frequency);
    const ImpedanceOperator z = assemble_loaded(mesh, fs, ExecPolicy{1});
    ModeSet set;
    set.frequency = frequency;
    set.resistance = 0.5 * (z.matrix.real() + z.matrix.real().transpose());
    set.modes = decompose(z, std::min(options.n_modes, z.size()), options.decompose);
    for (auto& m : set.modes) m.frequency = frequency;
    return set;
}

ModeSweep modal_sweep(const SegmentMesh& mesh, const std::vector<double>& frequencies, const SweepOptions& options) {
    ModeTracker tracker(options.track);
    const std::size_t batch = std::max(1u, options.exec.jobs);
    for (std::size_t lo = 0; lo < frequencies.size(); lo += batch) {
        const std::size_t n = std::min(batch, frequencies.size() - lo);
        std::vector<ModeSet> sets(n);
        detail::parallel_for(n, options.exec.jobs,
                             [&](std::size_t i) { sets[i] = modes_at(mesh, frequencies[lo + i], options); });
        for (auto& s : sets) tracker.push(std::move(s));
    }
    return tracker.finish();
}

int match_mode(const ModeSet& set, const Eigen::VectorXd& reference) {
    int best = -1;
    double best_corr = -1.0;
    for (std::size_t i = 0; i < set.modes.size(); ++i) {
        const double c = mode_correlation(reference, set.modes[i].current, set.resistance);
        if (c > best_corr) {
            best_corr = c;
            best = static_cast<int>(i);
        }
    }
    if (best < 0) fail(ErrorCode::NotFound, "no mode to match against");
    return best;
}

std::vector<TrackResonance> sweep_resonances(const SegmentMesh& mesh, const ModeSweep& sweep,
                                             const SweepOptions& options, double rel_tol) {
    struct Bracket {
        int track;
        std::size_t k;
    };
    std::vector<Bracket> brackets;
    for (int t = 0; t < sweep.track_count(); ++t) {
        for (std::size_t k = 0; k + 1 < sweep.frequencies.size(); ++k) {
            const auto* a = sweep.mode(t, k);
            const auto* b = sweep.mode(t, k + 1);
            if (!a || !b) continue;
            const auto crossing = find_resonances({{sweep.frequencies[k], a->angle}, {sweep.frequencies[k + 1], b->angle}});
            if (!crossing.empty()) brackets.push_back({t, k});
        }
    }

    const BasisSet basis(mesh);
    std::vector<TrackResonance> out(brackets.size());
    detail::parallel_for(brackets.size(), options.exec.jobs, [&](std::size_t bi) {
        const auto [t, k] = brackets[bi];
        double lo = sweep.frequencies[k], hi = sweep.frequencies[k + 1];
        double a_lo = sweep.mode(t, k)->angle, a_hi = sweep.mode(t, k + 1)->angle;
        Eigen::VectorXd ref = sweep.mode(t, k)->current;
        while ((hi - lo) > rel_tol * 0.5 * (hi + lo)) {
            const double mid = 0.5 * (lo + hi);
            const ModeSet set = modes_at(mesh, mid, options);
            const auto& m = set.modes[match_mode(set, ref)];
            if ((m.angle - 180.0) * (a_lo - 180.0) > 0.0) {
                lo = mid;
                a_lo = m.angle;
                ref = m.current;
            } else {
                hi = mid;
                a_hi = m.angle;
            }
        }
        const double d0 = a_lo - 180.0, d1 = a_hi - 180.0;
        const double f = (d0 == d1) ? 0.5 * (lo + hi) : lo + (hi - lo) * d0 / (d0 - d1);
        const ModeSet set = modes_at(mesh, f, options);
        TrackResonance r;
        r.track = t;
        r.frequency = f;
        r.mode = set.modes[match_mode(set, ref)];
        r.mode.track_id = t;
        r.parity = mirror_parity(mesh, basis, r.mode.current.cast<cplx>()).value_or(0.0);
        out[bi] = std::move(r);
    });
    std::stable_sort(out.begin(), out.end(), [](const TrackResonance& a, const TrackResonance& b) {
        if (a.frequency != b.frequency) return a.frequency < b.frequency;
        return a.track < b.track;
    });
    return out;
}

FarFieldGrid modal_pattern(const SegmentMesh& mesh, const CharacteristicMode& mode, const SweepOptions& options,
                           const GridSpec& grid) {
    const BasisSet basis(mesh);
    if (mode.current.size() != basis.size()) fail(ErrorCode::InvalidArgument, "mode does not match the mesh basis");
    FarFieldGrid g = radiate(mesh, basis, mode.current.cast<cplx>(), options.scale.to_solver(mode.frequency), grid,
                             ExecPolicy{1});
    g.frequency = mode.frequency;
    return g;
}

}  // namespace isocma
