// SPDX-License-Identifier: Apache-2.0

#include "isocma/designer.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>

namespace isocma {

void DesignProblem::validate() const {
    if (targets.empty()) fail(ErrorCode::Validation, "design problem has no targets");
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (!(targets[i] > 0.0)) fail(ErrorCode::Validation, "targets must be positive frequencies");
        if (i > 0 && !(targets[i] > targets[i - 1])) fail(ErrorCode::Validation, "targets must be sorted ascending");
    }
    if (parameters.empty()) fail(ErrorCode::Validation, "design problem has no free parameters");
    for (const auto& p : parameters) {
        if (!(p.max > p.min)) fail(ErrorCode::Validation, "degenerate bounds for parameter " + p.name);
        if (p.seed < p.min || p.seed > p.max) fail(ErrorCode::Validation, "seed outside bounds for parameter " + p.name);
    }
    if (weights.resonance < 0.0 || weights.deviation < 0.0 || weights.coincidence < 0.0)
        fail(ErrorCode::Validation, "weights must be non-negative");
    if (!(weights.coincidence_threshold > 0.0)) fail(ErrorCode::Validation, "coincidence threshold must be positive");
    if (budget < 1) fail(ErrorCode::Validation, "budget must be at least 1");
}

double coincidence_penalty(double min_separation, double threshold) {
    if (min_separation > threshold) return 0.0;
    return 1.0 + (threshold - std::max(min_separation, 0.0)) / threshold;
}

double objective(const DesignProblem& problem, const Evaluation& eval) {
    if (eval.failed) return kFailurePenalty;
    const auto& w = problem.weights;
    double value = 0.0;
    for (std::size_t i = 0; i < problem.targets.size(); ++i) {
        const double f = problem.targets[i];
        const double got = i < eval.resonances.size() ? eval.resonances[i] : 0.0;
        const double rel = got > 0.0 ? (got - f) / f : 1.0;
        value += w.resonance * rel * rel;
        if (i < eval.deviations_db.size()) value += w.deviation * eval.deviations_db[i];
    }
    value += w.coincidence * coincidence_penalty(eval.min_separation, w.coincidence_threshold);
    return value;
}

namespace {

class SimplexRun {
public:
    SimplexRun(const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& lo,
               const std::vector<double>& hi, const SimplexOptions& options, OptimizeResult& result)
        : f_(f), lo_(lo), hi_(hi), options_(options), result_(result) {}

    bool exhausted() const { return result_.evaluations >= options_.budget; }

    // Evaluates a batch of normalised points; returns how many were run.
    std::size_t evaluate(const std::vector<std::vector<double>>& us, std::vector<double>& values) {
        const std::size_t room = static_cast<std::size_t>(std::max(0, options_.budget - result_.evaluations));
        const std::size_t n = std::min(room, us.size());
        values.assign(n, 0.0);
        std::vector<std::vector<double>> xs(n);
        for (std::size_t i = 0; i < n; ++i) xs[i] = to_x(us[i]);
        std::vector<char> failed(n, 0);
        detail::parallel_for(n, options_.jobs, [&](std::size_t i) {
            double v;
            try {
                v = f_(xs[i]);
            } catch (const std::exception&) {
                v = kFailurePenalty;
            }
            if (!std::isfinite(v)) v = kFailurePenalty;
            failed[i] = v >= kFailurePenalty;
            values[i] = v;
        });
        for (std::size_t i = 0; i < n; ++i) {
            result_.log.push_back({result_.evaluations, xs[i], values[i], failed[i] != 0});
            ++result_.evaluations;
            if (result_.best.empty() || values[i] < result_.value) {
                result_.value = values[i];
                result_.best = xs[i];
            }
        }
        if (n < us.size()) result_.budget_exhausted = true;
        return n;
    }

    bool evaluate_one(const std::vector<double>& u, double& value) {
        std::vector<double> v;
        if (evaluate({u}, v) == 0) return false;
        value = v[0];
        return true;
    }

    // One Nelder-Mead descent from normalised point u0 with value v0.
    void descend(const std::vector<double>& u0, double v0, double step) {
        const std::size_t d = u0.size();
        std::vector<std::vector<double>> simplex{u0};
        std::vector<double> values{v0};
        std::vector<std::vector<double>> fresh;
        for (std::size_t i = 0; i < d; ++i) {
            auto u = u0;
            u[i] = (u0[i] + step <= 1.0) ? u0[i] + step : u0[i] - step;
            fresh.push_back(clip(u));
        }
        std::vector<double> fv;
        const std::size_t got = evaluate(fresh, fv);
        if (got < fresh.size()) return;
        for (std::size_t i = 0; i < d; ++i) {
            simplex.push_back(fresh[i]);
            values.push_back(fv[i]);
        }

        while (!exhausted()) {
            std::vector<std::size_t> order(d + 1);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
            {
                std::vector<std::vector<double>> s2;
                std::vector<double> v2;
                for (auto i : order) {
                    s2.push_back(simplex[i]);
                    v2.push_back(values[i]);
                }
                simplex.swap(s2);
                values.swap(v2);
            }
            double size = 0.0;
            for (std::size_t i = 1; i <= d; ++i)
                for (std::size_t k = 0; k < d; ++k) size = std::max(size, std::abs(simplex[i][k] - simplex[0][k]));
            if (size < options_.tolerance) return;

            std::vector<double> centroid(d, 0.0);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t k = 0; k < d; ++k) centroid[k] += simplex[i][k] / d;
            const auto along = [&](double t) {
                std::vector<double> u(d);
                for (std::size_t k = 0; k < d; ++k) u[k] = centroid[k] + t * (simplex[d][k] - centroid[k]);
                return clip(u);
            };

            const auto xr = along(-1.0);
            double fr;
            if (!evaluate_one(xr, fr)) return;
            if (fr < values[0]) {
                const auto xe = along(-2.0);
                double fe;
                if (!evaluate_one(xe, fe)) return;
                if (fe < fr) {
                    simplex[d] = xe;
                    values[d] = fe;
                } else {
                    simplex[d] = xr;
                    values[d] = fr;
                }
                continue;
            }
            if (fr < values[d - 1]) {
                simplex[d] = xr;
                values[d] = fr;
                continue;
            }
            const bool outside = fr < values[d];
            const auto xc = along(outside ? -0.5 : 0.5);
            double fc;
            if (!evaluate_one(xc, fc)) return;
            if (fc < (outside ? fr : values[d])) {
                simplex[d] = xc;
                values[d] = fc;
                continue;
            }
            std::vector<std::vector<double>> shrunk;
            for (std::size_t i = 1; i <= d; ++i) {
                std::vector<double> u(d);
                for (std::size_t k = 0; k < d; ++k) u[k] = simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k]);
                shrunk.push_back(clip(u));
            }
            std::vector<double> sv;
            const std::size_t n = evaluate(shrunk, sv);
            for (std::size_t i = 0; i < n; ++i) {
                simplex[i + 1] = shrunk[i];
                values[i + 1] = sv[i];
            }
            if (n < shrunk.size()) return;
        }
    }

    std::vector<double> to_u(const std::vector<double>& x) const {
        std::vector<double> u(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) u[k] = (x[k] - lo_[k]) / (hi_[k] - lo_[k]);
        return clip(u);
    }

private:
    static std::vector<double> clip(std::vector<double> u) {
        for (auto& v : u) v = std::clamp(v, 0.0, 1.0);
        return u;
    }
    std::vector<double> to_x(const std::vector<double>& u) const {
        std::vector<double> x(u.size());
        for (std::size_t k = 0; k < u.size(); ++k) x[k] = lo_[k] + u[k] * (hi_[k] - lo_[k]);
        return x;
    }

    const std::function<double(const std::vector<double>&)>& f_;
    const std::vector<double>& lo_;
    const std::vector<double>& hi_;
    const SimplexOptions& options_;
    OptimizeResult& result_;
};

}  // namespace

OptimizeResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& lo,
                           const std::vector<double>& hi, const std::vector<double>& x0,
                           const SimplexOptions& options) {
    const std::size_t d = x0.size();
    if (d == 0 || lo.size() != d || hi.size() != d) fail(ErrorCode::InvalidArgument, "bounds and seed differ in dimension");
    for (std::size_t k = 0; k < d; ++k) {
        if (!(hi[k] > lo[k])) fail(ErrorCode::InvalidArgument, "degenerate bounds");
        if (x0[k] < lo[k] || x0[k] > hi[k]) fail(ErrorCode::InvalidArgument, "seed outside bounds");
    }
    if (options.budget < 1) fail(ErrorCode::InvalidArgument, "budget must be at least 1");

    OptimizeResult result;
    SimplexRun run(f, lo, hi, options, result);
    double v0;
    run.evaluate_one(run.to_u(x0), v0);
    run.descend(run.to_u(x0), v0, options.initial_step);

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int r = 0; r < options.restarts && !run.exhausted(); ++r) {
        auto u = run.to_u(result.best);
        const double scale = options.initial_step * 0.5;
        // Draws are consumed in a fixed order so the schedule only depends on the seed.
        for (auto& v : u) v = std::clamp(v + scale * unit(rng), 0.0, 1.0);
        double vr;
        if (!run.evaluate_one(u, vr)) break;
        run.descend(u, vr, scale);
    }
    if (run.exhausted()) result.budget_exhausted = true;
    return result;
}

DesignReport optimize(const DesignProblem& problem, const Evaluator& evaluator, unsigned jobs) {
    problem.validate();
    std::vector<double> lo, hi, x0;
    for (const auto& p : problem.parameters) {
        lo.push_back(p.min);
        hi.push_back(p.max);
        x0.push_back(p.seed);
    }
    SimplexOptions so;
    so.budget = problem.budget;
    so.seed = problem.seed;
    so.jobs = jobs;
    const auto f = [&](const std::vector<double>& x) { return objective(problem, evaluator(x)); };
    OptimizeResult res = nelder_mead(f, lo, hi, x0, so);

    DesignReport report;
    for (std::size_t k = 0; k < problem.parameters.size(); ++k) report.params[problem.parameters[k].name] = res.best[k];
    const Evaluation eval = evaluator(res.best);
    report.objective = objective(problem, eval);
    report.min_separation = eval.min_separation;
    for (std::size_t i = 0; i < problem.targets.size(); ++i) {
        TargetOutcome t;
        t.target = problem.targets[i];
        t.achieved = i < eval.resonances.size() ? eval.resonances[i] : 0.0;
        t.relative_error = t.achieved > 0.0 ? (t.achieved - t.target) / t.target : -1.0;
        t.deviation_db = i < eval.deviations_db.size() ? eval.deviations_db[i] : 0.0;
        report.targets.push_back(t);
    }
    report.evaluations = res.evaluations;
    report.budget_exhausted = res.budget_exhausted;
    report.log = std::move(res.log);
    return report;
}

nlohmann::json report_to_json(const DesignProblem& problem, const DesignReport& report) {
    nlohmann::json j;
    j["params"] = report.params;
    j["objective"] = report.objective;
    j["evaluations"] = report.evaluations;
    j["budget"] = problem.budget;
    j["budget_exhausted"] = report.budget_exhausted;
    j["min_separation"] = report.min_separation;
    j["targets"] = nlohmann::json::array();
    for (const auto& t : report.targets)
        j["targets"].push_back({{"target_hz", t.target},
                                {"achieved_hz", t.achieved},
                                {"relative_error", t.relative_error},
                                {"deviation_db", t.deviation_db}});
    return j;
}

DesignProblem problem_from_json(const nlohmann::json& doc) {
    DesignProblem p;
    try {
        p.targets = doc.at("targets_hz").get<std::vector<double>>();
        for (const auto& q : doc.at("parameters")) {
            ParameterSpec s;
            s.name = q.at("name").get<std::string>();
            s.min = q.at("min").get<double>();
            s.max = q.at("max").get<double>();
            s.seed = q.at("seed").get<double>();
            p.parameters.push_back(s);
        }
        if (doc.contains("weights")) {
            const auto& w = doc["weights"];
            p.weights.resonance = w.value("resonance", p.weights.resonance);
            p.weights.deviation = w.value("deviation", p.weights.deviation);
            p.weights.coincidence = w.value("coincidence", p.weights.coincidence);
            p.weights.coincidence_threshold = w.value("coincidence_threshold", p.weights.coincidence_threshold);
        }
        p.budget = doc.value("budget", p.budget);
        p.seed = doc.value("seed", p.seed);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Io, std::string("malformed design problem: ") + e.what());
    }
    p.validate();
    return p;
}

namespace {

std::pair<char, std::size_t> split_symbol(const std::string& name, std::string& stem) {
    std::size_t digits = name.size();
    while (digits > 0 && std::isdigit(static_cast<unsigned char>(name[digits - 1]))) --digits;
    stem = name.substr(0, digits);
    if (digits == name.size()) return {'g', 0};
    return {'p', static_cast<std::size_t>(std::stoul(name.substr(digits)))};
}

}  // namespace

void HDesign::set(const std::string& name, double value) {
    std::string stem;
    const auto [kind, idx] = split_symbol(name, stem);
    if (kind == 'g') {
        if (stem == "G") center.rhombus_diagonal = value;
        else if (stem == "g") {
            center.feed_gap = value;
            for (auto& p : pairs) p.feed_gap = value;
        } else if (stem == "w") {
            for (auto& p : pairs) p.strip_width = value;
        } else fail(ErrorCode::InvalidArgument, "unknown design parameter '" + name + "'");
        return;
    }
    if (idx < 1 || idx > pairs.size()) fail(ErrorCode::InvalidArgument, "design parameter '" + name + "' names a missing pair");
    auto& p = pairs[idx - 1];
    if (stem == "AL") p.arm_length = value;
    else if (stem == "h") p.arm_spacing = value;
    else if (stem == "lL") p.inductor_offset = value;
    else if (stem == "L") p.inductor_value = value;
    else fail(ErrorCode::InvalidArgument, "unknown design parameter '" + name + "'");
}

double HDesign::get(const std::string& name) const {
    std::string stem;
    const auto [kind, idx] = split_symbol(name, stem);
    if (kind == 'g') {
        if (stem == "G") return center.rhombus_diagonal;
        if (stem == "g") return center.feed_gap;
        if (stem == "w") return pairs.at(0).strip_width;
        fail(ErrorCode::InvalidArgument, "unknown design parameter '" + name + "'");
    }
    if (idx < 1 || idx > pairs.size()) fail(ErrorCode::InvalidArgument, "design parameter '" + name + "' names a missing pair");
    const auto& p = pairs[idx - 1];
    if (stem == "AL") return p.arm_length;
    if (stem == "h") return p.arm_spacing;
    if (stem == "lL") return p.inductor_offset;
    if (stem == "L") return p.inductor_value;
    fail(ErrorCode::InvalidArgument, "unknown design parameter '" + name + "'");
}

SegmentMesh HDesign::build() const { return build_h_radiator(pairs, center); }

HDesign quad_band_design() {
    HDesign d;
    RadiatorParams left;
    left.arm_length = 66.7e-3;
    left.arm_spacing = 36e-3;
    left.strip_width = 4.8e-3;
    left.inductor_value = 36e-9;
    left.inductor_offset = 13.2e-3;
    left.feed_gap = 1.0e-3;
    RadiatorParams right = left;
    right.arm_length = 47.5e-3;
    right.arm_spacing = 30e-3;
    right.inductor_value = 20e-9;
    right.inductor_offset = 13.1e-3;
    d.pairs = {left, right};
    d.center.rhombus_diagonal = 36e-3;
    d.center.feed_gap = 1.0e-3;
    d.center.feed = true;
    d.center.bottom = BottomStyle::RhombusSkeleton;
    return d;
}

IsotropyAnalysis analyse_isotropy(const SegmentMesh& coarse, double f_lo, double f_hi, const AnalysisOptions& options) {
    if (!(f_lo > 0.0) || !(f_hi > f_lo)) fail(ErrorCode::InvalidArgument, "analysis band must satisfy 0 < f_lo < f_hi");
    if (!coarse.mirror_normal) fail(ErrorCode::InvalidArgument, "isotropy analysis needs a mirror-symmetric mesh");
    const SegmentMesh mesh =
        discretize(coarse, options.sweep.scale.to_solver(f_hi), options.segments_per_wavelength);
    std::vector<double> grid;
    for (double f = f_lo; f < f_hi; f *= 1.0 + options.grid_step) grid.push_back(f);
    grid.push_back(f_hi);
    const ModeSweep sweep = modal_sweep(mesh, grid, options.sweep);
    IsotropyAnalysis out;
    for (auto& r : sweep_resonances(mesh, sweep, options.sweep, options.rel_tol)) {
        if (!(r.parity < -0.5)) continue;
        const FarFieldGrid g = modal_pattern(mesh, r.mode, options.sweep, options.pattern);
        out.deviations_db.push_back(directivity_deviation(g).deviation_db);
        out.resonances.push_back(std::move(r));
    }
    return out;
}

Evaluator h_design_evaluator(const HDesign& base, const DesignProblem& problem, const AnalysisOptions& options) {
    return [base, problem, options](const std::vector<double>& x) {
        Evaluation e;
        try {
            HDesign d = base;
            for (std::size_t k = 0; k < problem.parameters.size(); ++k) d.set(problem.parameters[k].name, x[k]);
            const double lo = 0.8 * problem.targets.front();
            const double hi = 1.2 * problem.targets.back();
            const IsotropyAnalysis a = analyse_isotropy(d.build(), lo, hi, options);
            std::vector<double> fs;
            for (const auto& r : a.resonances) fs.push_back(r.frequency);
            for (double t : problem.targets) {
                double best = 0.0, dev = 0.0, err = 1e300;
                for (std::size_t i = 0; i < fs.size(); ++i) {
                    const double rel = std::abs(std::log(fs[i] / t));
                    if (rel < err) {
                        err = rel;
                        best = fs[i];
                        dev = a.deviations_db[i];
                    }
                }
                e.resonances.push_back(best);
                e.deviations_db.push_back(dev);
            }
            e.min_separation = 1.0;
            for (std::size_t i = 1; i < fs.size(); ++i)
                e.min_separation = std::min(e.min_separation, (fs[i] - fs[i - 1]) / fs[i - 1]);
        } catch (const Error& err) {
            e.failed = true;
            e.error = err.what();
        }
        return e;
    };
}

int place_inductor(const SegmentMesh& mesh, const ModeSweep& sweep, int track_id, double frequency) {
    if (track_id < 0 || track_id >= sweep.track_count()) fail(ErrorCode::NotFound, "track " + std::to_string(track_id) + " not found");
    const CharacteristicMode* best = nullptr;
    double dist = 1e300;
    for (std::size_t k = 0; k < sweep.frequencies.size(); ++k) {
        const auto* m = sweep.mode(track_id, k);
        if (m && std::abs(sweep.frequencies[k] - frequency) < dist) {
            dist = std::abs(sweep.frequencies[k] - frequency);
            best = m;
        }
    }
    if (!best) fail(ErrorCode::NotFound, "track " + std::to_string(track_id) + " has no mode near the frequency");
    const BasisSet basis(mesh);
    if (best->current.size() != basis.size()) fail(ErrorCode::InvalidArgument, "sweep does not belong to this mesh");
    const auto ends = basis.segment_end_currents(mesh, best->current.cast<cplx>());
    int seg = -1;
    double peak = -1.0;
    for (std::size_t s = 0; s < mesh.segments.size(); ++s) {
        if (mesh.segments[s].tag.rfind("arm", 0) != 0) continue;
        const double mag = std::abs(0.5 * (ends[s][0] + ends[s][1]));
        if (mag > peak * (1.0 + 1e-12)) {
            peak = mag;
            seg = static_cast<int>(s);
        }
    }
    if (seg < 0) fail(ErrorCode::NotFound, "mesh has no arm segments");
    return seg;
}

double offset_from_tip(const SegmentMesh& mesh, int segment) {
    if (segment < 0 || segment >= static_cast<int>(mesh.segments.size()))
        fail(ErrorCode::InvalidArgument, "segment index out of range");
    const std::string& tag = mesh.segments[segment].tag;
    const auto degree = mesh.node_degrees();
    // Dijkstra over same-tag segments from both ends of the segment.
    const std::size_t nn = mesh.nodes.size();
    std::vector<double> dist(nn, 1e300);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    const double half = 0.5 * mesh.length(segment);
    for (int end : mesh.segments[segment].nodes) {
        dist[end] = half;
        queue.push({half, end});
    }
    std::vector<std::vector<int>> incident(nn);
    for (std::size_t s = 0; s < mesh.segments.size(); ++s)
        if (mesh.segments[s].tag == tag) {
            incident[mesh.segments[s].nodes[0]].push_back(static_cast<int>(s));
            incident[mesh.segments[s].nodes[1]].push_back(static_cast<int>(s));
        }
    double best = 1e300;
    while (!queue.empty()) {
        const auto [d, n] = queue.top();
        queue.pop();
        if (d > dist[n]) continue;
        if (degree[n] == 1) best = std::min(best, d);
        for (int s : incident[n]) {
            if (s == segment) continue;
            const auto& sg = mesh.segments[s];
            const int other = sg.nodes[0] == n ? sg.nodes[1] : sg.nodes[0];
            const double nd = d + mesh.length(s);
            if (nd < dist[other]) {
                dist[other] = nd;
                queue.push({nd, other});
            }
        }
    }
    if (best > 1e299) fail(ErrorCode::NotFound, "segment is not on a wire with a free end");
    return best;
}

double fit_eps_eff(const std::vector<double>& free_space, const std::vector<double>& targets) {
    if (free_space.size() != targets.size() || targets.empty())
        fail(ErrorCode::InvalidArgument, "resonances and targets differ in count");
    double mean = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (!(free_space[i] > 0.0) || !(targets[i] > 0.0)) fail(ErrorCode::InvalidArgument, "frequencies must be positive");
        mean += std::log(free_space[i] / targets[i]);
    }
    mean /= static_cast<double>(targets.size());
    return std::max(1.0, std::exp(2.0 * mean));
}

}  // namespace isocma
