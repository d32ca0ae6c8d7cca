// SPDX-License-Identifier: Apache-2.0
//
// Frequency-swept modal analysis of a mesh: tracked characteristic modes,
// refined resonances, modal patterns and excitation purity.

#pragma once

#include "isocma/cma.hpp"
#include "isocma/farfield.hpp"

#include <vector>

namespace isocma {

struct SweepOptions {
    int n_modes = 10;
    FrequencyScale scale;
    ExecPolicy exec;
    TrackOptions track;
    DecomposeOptions decompose;
};

/// Uniform grid of `points` frequencies from start to stop inclusive.
std::vector<double> linear_grid(double start, double stop, int points);

/// Modes of the loaded operator at one reported frequency.
ModeSet modes_at(const SegmentMesh& mesh, double frequency, const SweepOptions& options);

/// Modes at every reported frequency, tracked. Frequencies are evaluated
/// independently (in parallel when exec.jobs > 1) and tracked in order.
ModeSweep modal_sweep(const SegmentMesh& mesh, const std::vector<double>& frequencies, const SweepOptions& options);

struct TrackResonance {
    int track = -1;
    double frequency = 0.0;   // reported frequency where the angle crosses 180 degrees
    double parity = 0.0;      // mirror parity of the mode at the resonance (0 if unknown)
    CharacteristicMode mode;  // mode recomputed at `frequency`
};

/// Every crossing of every track, refined by bisection until the bracket is
/// below `rel_tol` of its centre. Sorted by frequency, then track.
std::vector<TrackResonance> sweep_resonances(const SegmentMesh& mesh, const ModeSweep& sweep,
                                             const SweepOptions& options, double rel_tol = 1e-3);

/// Best match of `reference` among `set` by R-weighted correlation.
int match_mode(const ModeSet& set, const Eigen::VectorXd& reference);

/// Source-free pattern of a modal current.
FarFieldGrid modal_pattern(const SegmentMesh& mesh, const CharacteristicMode& mode, const SweepOptions& options,
                           const GridSpec& grid = {});

}  // namespace isocma
