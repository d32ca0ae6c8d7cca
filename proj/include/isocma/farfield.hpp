// SPDX-License-Identifier: Apache-2.0
//
// Far-zone radiation of wire currents, directivity on a theta-phi sphere and
// the isotropy (deviation) metrics, plus the closed-form U-radiator pattern.

#pragma once

#include "isocma/mom.hpp"

#include <string>
#include <vector>

namespace isocma {

struct GridSpec {
    double theta_step_deg = 5.0;  // must divide 180
    double phi_step_deg = 5.0;    // must divide 360
};

/// Sampled sphere. Rows are theta (0..180 inclusive), columns are phi
/// (0..360 exclusive). Fields are r * E with the e^{-jkr} factor removed.
struct FarFieldGrid {
    double frequency = 0.0;
    std::vector<double> theta_deg;
    std::vector<double> phi_deg;
    Eigen::MatrixXcd e_theta;
    Eigen::MatrixXcd e_phi;
    Eigen::MatrixXd intensity;    // W/sr
    Eigen::MatrixXd directivity;  // linear
    double radiated_power = 0.0;  // W

    double directivity_dbi(int it, int ip) const;
    /// Solid-angle weight of each sample (rings of width dtheta, polar caps of
    /// half width); the weights sum to 4 pi exactly.
    Eigen::MatrixXd solid_angle_weights() const;
    double mean_directivity() const;
    /// Sample closest to a direction, as (row, column).
    std::pair<int, int> nearest(double theta_deg, double phi_deg) const;
};

enum class DeviationKind { Gain, Directivity };

struct DeviationReport {
    double frequency = 0.0;
    double max_db = 0.0;
    double min_db = 0.0;
    double deviation_db = 0.0;
    DeviationKind kind = DeviationKind::Directivity;
};

/// Radiates per-segment end currents (see BasisSet::segment_end_currents).
/// Currents vary linearly along each segment and the segment integral is
/// evaluated in closed form. Throws Numerical if nothing radiates.
FarFieldGrid radiate_segments(const SegmentMesh& mesh, const std::vector<std::array<cplx, 2>>& end_currents,
                              double frequency, const GridSpec& spec = {}, const ExecPolicy& exec = {});

FarFieldGrid radiate(const SegmentMesh& mesh, const BasisSet& basis, const Eigen::VectorXcd& current,
                     double frequency, const GridSpec& spec = {}, const ExecPolicy& exec = {});

/// Source-free patterns (modal currents): max - min of directivity.
DeviationReport directivity_deviation(const FarFieldGrid& grid);
/// Driven patterns: max - min of gain 4 pi U / P_acc.
DeviationReport gain_deviation(const FarFieldGrid& grid, double accepted_power);

/// Closed-form power pattern sin^2[(k/2) h sin(t) cos(p)] / [(k/2) sin(t) cos(p)]^2,
/// normalised to directivity. E_theta holds sqrt(intensity), E_phi is zero.
FarFieldGrid analytic_u_pattern(double h, double frequency, const GridSpec& spec = {});
double analytic_u_intensity(double h, double frequency, double theta_rad, double phi_rad);

/// 1 - sin^2(pi x) / (pi x)^2 for x = h / lambda in (0, 0.5).
double analytic_deviation(double h_over_lambda);

}  // namespace isocma
