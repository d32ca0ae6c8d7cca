// SPDX-License-Identifier: Apache-2.0
//
// Derivative-free design loop: places isotropy-mode resonances of an H
// radiator at target frequencies while penalising pattern deviation and
// coincident resonances.

#pragma once

#include "isocma/modal.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace isocma {

struct ParameterSpec {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    double seed = 0.0;
};

struct DesignWeights {
    double resonance = 1.0;
    double deviation = 1e-4;    // per dB
    double coincidence = 1.0;
    double coincidence_threshold = 0.05;  // fractional separation
};

struct DesignProblem {
    std::vector<double> targets;  // Hz, ascending
    std::vector<ParameterSpec> parameters;
    DesignWeights weights;
    int budget = 200;
    std::uint64_t seed = 1;

    void validate() const;
};

/// What an evaluator measures at one parameter vector.
struct Evaluation {
    std::vector<double> resonances;     // matched to targets, Hz (0 if missing)
    std::vector<double> deviations_db;  // per target
    double min_separation = 1.0;        // min pairwise |fa - fb| / fa over isotropy tracks
    bool failed = false;
    std::string error;
};

using Evaluator = std::function<Evaluation(const std::vector<double>& params)>;

inline constexpr double kFailurePenalty = 1e6;

double coincidence_penalty(double min_separation, double threshold);
double objective(const DesignProblem& problem, const Evaluation& eval);

struct LogEntry {
    int index = 0;
    std::vector<double> params;
    double value = 0.0;
    bool failed = false;
};

struct OptimizeResult {
    std::vector<double> best;
    double value = 0.0;
    int evaluations = 0;
    bool budget_exhausted = false;
    std::vector<LogEntry> log;
};

struct SimplexOptions {
    int budget = 200;
    int restarts = 3;
    std::uint64_t seed = 1;
    double initial_step = 0.1;  // fraction of each bound range
    double tolerance = 1e-8;    // simplex size in bound-normalised units
    unsigned jobs = 1;
};

/// Nelder-Mead on the box [lo, hi] with clipping to the bounds, followed by
/// `restarts` restarts from seeded perturbations of the best point. The
/// returned point is never worse than x0.
OptimizeResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                           const std::vector<double>& lo, const std::vector<double>& hi,
                           const std::vector<double>& x0, const SimplexOptions& options);

struct TargetOutcome {
    double target = 0.0;
    double achieved = 0.0;
    double relative_error = 0.0;
    double deviation_db = 0.0;
};

struct DesignReport {
    std::map<std::string, double> params;
    std::vector<TargetOutcome> targets;
    double min_separation = 0.0;
    double objective = 0.0;
    int evaluations = 0;
    bool budget_exhausted = false;
    std::vector<LogEntry> log;
};

DesignReport optimize(const DesignProblem& problem, const Evaluator& evaluator, unsigned jobs = 1);

nlohmann::json report_to_json(const DesignProblem& problem, const DesignReport& report);
DesignProblem problem_from_json(const nlohmann::json& doc);

/// Editable H-radiator description addressed by symbol:
/// AL<i>, h<i>, lL<i>, L<i> (1-based pair index), w, G (rhombus diagonal), g.
struct HDesign {
    std::vector<RadiatorParams> pairs;
    HCenter center;

    void set(const std::string& name, double value);
    double get(const std::string& name) const;
    SegmentMesh build() const;
};

/// Quad-band starting geometry; the arm spacings h1 = G = 36 mm and
/// h2 = 30 mm are calibrated (see README).
HDesign quad_band_design();
inline const std::vector<double> kQuadBandTargets{868e6, 1176e6, 1575e6, 2450e6};

struct IsotropyAnalysis {
    std::vector<TrackResonance> resonances;  // odd-parity (feed-excitable) resonances
    std::vector<double> deviations_db;       // modal directivity deviation at each
};

struct AnalysisOptions {
    SweepOptions sweep;
    double grid_step = 0.02;     // fractional spacing of the coarse sweep
    double rel_tol = 1e-3;       // bisection resolution
    int segments_per_wavelength = 20;
    GridSpec pattern;
};

/// Coarse geometric sweep over [f_lo, f_hi], tracked, refined, filtered to
/// modes that are odd under the mirror plane.
IsotropyAnalysis analyse_isotropy(const SegmentMesh& mesh, double f_lo, double f_hi, const AnalysisOptions& options);

/// Evaluator over an H design: parameters named as in HDesign.
Evaluator h_design_evaluator(const HDesign& base, const DesignProblem& problem, const AnalysisOptions& options);

/// Segment on arm segments (tag prefix "arm") with the largest |J| of the
/// given track's mode nearest `frequency`.
int place_inductor(const SegmentMesh& mesh, const ModeSweep& sweep, int track_id, double frequency);

/// Distance along the wire from the nearest free end to the centre of
/// `segment`, for use as lL.
double offset_from_tip(const SegmentMesh& mesh, int segment);

/// Single effective-permittivity fit: the eps_eff >= 1 minimising the summed
/// squared log error between relabelled free-space resonances and targets.
double fit_eps_eff(const std::vector<double>& free_space_resonances, const std::vector<double>& targets);

}  // namespace isocma
