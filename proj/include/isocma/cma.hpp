// SPDX-License-Identifier: Apache-2.0
//
// Characteristic modes of an impedance operator: X J = lambda R J with
// R-normalised real eigencurrents, plus cross-frequency tracking, resonance
// extraction and modal weighting coefficients.

#pragma once

#include "isocma/mom.hpp"

#include <optional>
#include <vector>

namespace isocma {

double characteristic_angle(double lambda);   // degrees, 180 at resonance
double modal_significance(double lambda);     // 1 / |1 + j lambda|

struct CharacteristicMode {
    double frequency = 0.0;
    double eigenvalue = 0.0;
    Eigen::VectorXd current;  // <J, R J> = 1
    double angle = 180.0;
    double significance = 1.0;
    int track_id = -1;
};

struct DecomposeOptions {
    /// Directions of R below this fraction of its largest eigenvalue are
    /// treated as non-radiating and condensed out of the reduced problem.
    double r_floor = 1e-12;
    /// R eigenvalues below -r_indefinite * ||R|| throw Numerical.
    double r_indefinite = 1e-8;
};

/// Generalized eigenproblem X J = lambda R J on the (symmetrised) real and
/// imaginary parts of the operator. Returns the `n_modes` modes of smallest
/// |lambda| in ascending |lambda| order; the largest-magnitude entry of each
/// eigencurrent is positive.
std::vector<CharacteristicMode> decompose(const Eigen::MatrixXd& r, const Eigen::MatrixXd& x, int n_modes,
                                          double frequency = 0.0, const DecomposeOptions& options = {});
std::vector<CharacteristicMode> decompose(const ImpedanceOperator& z, int n_modes,
                                          const DecomposeOptions& options = {});

/// <Jn, E_i> / (1 + j lambda_n).
cplx mwc(const CharacteristicMode& mode, const Eigen::VectorXcd& excitation);

/// Normalised overlap |<Ja, R Jb>| / sqrt(<Ja,R Ja><Jb,R Jb>).
double mode_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& r);

/// Modes at one frequency and the resistance matrix they were normalised in.
struct ModeSet {
    double frequency = 0.0;
    std::vector<CharacteristicMode> modes;
    Eigen::MatrixXd resistance;
};

struct ModeSweep {
    std::vector<double> frequencies;
    std::vector<ModeSet> sets;
    /// tracks[id][k] = index into sets[k].modes, or -1 when the track is absent.
    std::vector<std::vector<int>> tracks;

    int track_count() const { return static_cast<int>(tracks.size()); }
    /// (frequency, angle) samples of a track, in frequency order.
    std::vector<std::pair<double, double>> angle_samples(int track) const;
    std::vector<std::pair<double, double>> eigenvalue_samples(int track) const;
    const CharacteristicMode* mode(int track, std::size_t k) const;
};

struct TrackOptions {
    double correlation_floor = 0.5;
};

/// Greedy one-to-one assignment between adjacent frequencies by eigencurrent
/// correlation (ties broken by eigenvalue proximity). Unmatched modes start
/// new tracks; a track that loses its mode is closed for good.
ModeSweep track_modes(std::vector<ModeSet> sets, const TrackOptions& options = {});

/// Incremental form of track_modes. Each pushed set is matched against the
/// previous one using the pushed set's resistance matrix, which is released
/// once the next set arrives.
class ModeTracker {
public:
    explicit ModeTracker(const TrackOptions& options = {}) : options_(options) {}
    void push(ModeSet set);
    ModeSweep finish();

private:
    TrackOptions options_;
    ModeSweep sweep_;
};

/// Linear-interpolated crossings of the characteristic angle through 180 degrees.
std::vector<double> find_resonances(const std::vector<std::pair<double, double>>& angle_samples);

/// Parity of a current under the mesh mirror plane: +1 even, -1 odd,
/// std::nullopt if the mesh has no mirror plane.
std::optional<double> mirror_parity(const SegmentMesh& mesh, const BasisSet& basis, const Eigen::VectorXcd& current);

}  // namespace isocma
