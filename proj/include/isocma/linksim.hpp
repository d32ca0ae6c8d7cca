// SPDX-License-Identifier: Apache-2.0
//
// AWGN link emulation over a radiation pattern: link budget, QPSK/16QAM
// symbol streams and EVM.

#pragma once

#include "isocma/farfield.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace isocma {

enum class Modulation { Qpsk, Qam16 };

/// Unit-average-power alphabet.
std::vector<cplx> alphabet(Modulation m);
Modulation parse_modulation(const std::string& name);
std::string modulation_name(Modulation m);

struct Direction {
    std::string label;
    double theta_deg = 90.0;
    double phi_deg = 0.0;
};

/// "+X", "-X", "+Y", "-Y", "+Z", "-Z" or "theta,phi" in degrees.
Direction parse_direction(const std::string& text);
std::vector<Direction> cardinal_directions();

struct LinkConfig {
    Modulation modulation = Modulation::Qpsk;
    int symbol_count = 10000;
    double symbol_rate = 1e6;  // informational
    double tx_power_dbm = 0.0;
    double range_m = 1.5;
    double noise_floor_dbm = -60.0;  // -infinity gives a noiseless channel
    std::uint64_t seed = 1;
    Direction direction{"+X", 90.0, 0.0};
    bool snap_to_grid = true;  // otherwise the direction must be a grid sample
    double rx_gain_dbi = 0.0;
};

struct LinkResult {
    double snr_db = 0.0;
    double gain_dbi = 0.0;
    double path_loss_db = 0.0;
    double evm_pct = 0.0;
    std::vector<cplx> reference;
    std::vector<cplx> received;
};

double free_space_path_loss_db(double range_m, double frequency);

/// RMS error vector over RMS reference, in percent.
double evm(const std::vector<cplx>& received, const std::vector<cplx>& reference);

/// Transmits through `pattern` toward config.direction. The antenna gain is
/// 4 pi U / accepted_power when given, directivity otherwise.
LinkResult simulate_link(const FarFieldGrid& pattern, const LinkConfig& config,
                         std::optional<double> accepted_power = std::nullopt);

/// Symbols at a prescribed Es/N0 (dB), independent of any pattern.
LinkResult simulate_awgn(Modulation m, int symbol_count, double snr_db, std::uint64_t seed);

}  // namespace isocma
