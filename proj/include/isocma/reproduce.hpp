// SPDX-License-Identifier: Apache-2.0
//
// End-to-end reproduction cases. Each case computes its figures of merit,
// compares them with reference values, and writes its data files.

#pragma once

#include "isocma/designer.hpp"
#include "isocma/io.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace isocma {

struct ReproduceOptions {
    std::filesystem::path out_dir;  // empty: nothing is written
    unsigned jobs = 1;
    std::uint64_t seed = 1;
    std::optional<double> eps_eff;  // unset: fitted where a case calls for it
    double z0 = 50.0;
};

struct Check {
    std::string name;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool pass = false;
};

struct CaseReport {
    std::string name;
    std::map<std::string, double> values;
    std::vector<Check> checks;
    std::vector<std::string> lines;  // one-line summaries, one per band or step
    std::vector<std::string> files;  // relative to out_dir, in write order

    bool passed() const;
    double value(const std::string& key) const;  // throws NotFound
};

std::vector<std::string> case_names();
CaseReport reproduce_case(const std::string& name, const ReproduceOptions& options);

/// Writes summary.csv (case, check, value, lo, hi, pass) for a set of reports.
std::string summary_csv(const std::vector<CaseReport>& reports);

/// U radiators of the inductor study: arms 60 mm, spacing 22 mm, 4.8 mm strip,
/// two 40 nH inductors 13 mm from the tips when `loaded`.
RadiatorParams inductor_study_params(bool loaded);

/// H radiator of the coincidence study for a given right arm length.
HDesign purification_design(double right_arm_length);

/// Far field of the ideal standing-wave current on a U with quarter-wave
/// arms at `frequency`: unit current along the bottom, cos(k s) falling
/// to zero at the arm tips. Radiated with the segment far-field code.
FarFieldGrid reference_u_pattern(double h, double frequency, int segments_per_arm = 64, const GridSpec& spec = {});

/// Directivity deviation of the feed-excitable fundamental mode of a thin U
/// with quarter-wave arms at `frequency`.
double thin_u_mode_deviation(double h_over_lambda, double frequency = 1e9);

}  // namespace isocma
