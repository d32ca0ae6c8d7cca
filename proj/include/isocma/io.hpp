// SPDX-License-Identifier: Apache-2.0
//
// Text renderers for sweep, pattern, port and link data, and an atomic file
// writer. Numbers are printed with a fixed format so identical inputs give
// identical bytes.

#pragma once

#include "isocma/cma.hpp"
#include "isocma/farfield.hpp"
#include "isocma/linksim.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace isocma {

/// "%.10g" rendering used by every writer.
std::string num(double v);

/// Writes to `path.partial` and renames over `path`; the partial file is
/// removed if anything fails.
void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// A driven sample with and without the series feed capacitor.
struct PortSample {
    double frequency = 0.0;
    cplx zin;          // bare structure
    cplx zin_matched;  // after the series capacitor (equals zin when none)
    double s11_db = 0.0;  // of zin_matched
    cplx s11;             // of zin_matched
};

std::string ca_sweep_csv(const ModeSweep& sweep);
std::string eigenvalue_sweep_csv(const ModeSweep& sweep);
std::string driven_csv(const std::vector<PortSample>& samples);
std::string matching_csv(const std::vector<PortSample>& samples);
std::string touchstone_s1p(const std::vector<PortSample>& samples, double z0);
std::string pattern_csv(const FarFieldGrid& grid);
std::string deviation_csv(const std::vector<DeviationReport>& reports);
/// Segment-centre coordinates and the signed real eigencurrent there.
std::string eigencurrent_csv(const SegmentMesh& mesh, const CharacteristicMode& mode);
std::string constellation_csv(const LinkResult& result);

}  // namespace isocma
