// SPDX-License-Identifier: Apache-2.0

#include "isocma/linksim.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace isocma {

namespace {

// Portable uniform and Gaussian draws on top of mt19937_64; the standard
// distributions are implementation-defined and would break cross-platform
// reproducibility.
class NoiseSource {
public:
    explicit NoiseSource(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    std::uint64_t index(std::uint64_t n) {
        // n is a power of two for every alphabet used here.
        return gen_() >> (64 - static_cast<int>(std::log2(static_cast<double>(n))));
    }

    // Box-Muller: one complex sample with unit variance per component.
    cplx gaussian_pair() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return {r * std::cos(2.0 * phys::pi * u2), r * std::sin(2.0 * phys::pi * u2)};
    }

private:
    std::mt19937_64 gen_;
};

LinkResult transmit(Modulation m, int count, double snr_db, std::uint64_t seed) {
    if (count < 1000) fail(ErrorCode::InvalidArgument, "symbol_count must be at least 1000");
    const auto symbols = alphabet(m);
    NoiseSource rng(seed);
    const bool noiseless = std::isinf(snr_db) && snr_db > 0;
    const double sigma = noiseless ? 0.0 : std::sqrt(0.5 * std::pow(10.0, -snr_db / 10.0));
    LinkResult r;
    r.snr_db = snr_db;
    r.reference.reserve(count);
    r.received.reserve(count);
    for (int i = 0; i < count; ++i) {
        const cplx s = symbols[rng.index(symbols.size())];
        const cplx n = rng.gaussian_pair() * sigma;
        r.reference.push_back(s);
        r.received.push_back(s + n);
    }
    r.evm_pct = evm(r.received, r.reference);
    return r;
}

}  // namespace

std::vector<cplx> alphabet(Modulation m) {
    std::vector<cplx> out;
    if (m == Modulation::Qpsk) {
        const double a = 1.0 / std::sqrt(2.0);
        for (double re : {-a, a})
            for (double im : {-a, a}) out.emplace_back(re, im);
        return out;
    }
    const double a = 1.0 / std::sqrt(10.0);
    for (int re : {-3, -1, 1, 3})
        for (int im : {-3, -1, 1, 3}) out.emplace_back(re * a, im * a);
    return out;
}

Modulation parse_modulation(const std::string& name) {
    if (name == "QPSK" || name == "qpsk") return Modulation::Qpsk;
    if (name == "16QAM" || name == "16qam" || name == "QAM16") return Modulation::Qam16;
    fail(ErrorCode::InvalidArgument, "unknown modulation '" + name + "'");
}

std::string modulation_name(Modulation m) { return m == Modulation::Qpsk ? "QPSK" : "16QAM"; }

std::vector<Direction> cardinal_directions() {
    return {{"+X", 90.0, 0.0}, {"-X", 90.0, 180.0}, {"+Y", 90.0, 90.0},
            {"-Y", 90.0, 270.0}, {"+Z", 0.0, 0.0},  {"-Z", 180.0, 0.0}};
}

Direction parse_direction(const std::string& text) {
    for (const auto& d : cardinal_directions())
        if (d.label == text) return d;
    std::istringstream in(text);
    Direction d;
    char comma = 0;
    if (in >> d.theta_deg >> comma >> d.phi_deg && comma == ',' && (in >> std::ws).eof()) {
        if (d.theta_deg < 0.0 || d.theta_deg > 180.0) fail(ErrorCode::InvalidArgument, "theta must lie in [0, 180]");
        d.label = text;
        return d;
    }
    fail(ErrorCode::InvalidArgument, "unrecognised direction '" + text + "'");
}

double free_space_path_loss_db(double range_m, double frequency) {
    if (!(range_m > 0.0) || !(frequency > 0.0)) fail(ErrorCode::InvalidArgument, "range and frequency must be positive");
    return 20.0 * std::log10(4.0 * phys::pi * range_m * frequency / phys::c0);
}

double evm(const std::vector<cplx>& received, const std::vector<cplx>& reference) {
    if (received.size() != reference.size()) fail(ErrorCode::InvalidArgument, "symbol streams differ in length");
    if (reference.empty()) fail(ErrorCode::InvalidArgument, "symbol streams are empty");
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        err += std::norm(received[i] - reference[i]);
        ref += std::norm(reference[i]);
    }
    if (!(ref > 0.0)) fail(ErrorCode::InvalidArgument, "reference stream has zero power");
    return 100.0 * std::sqrt(err / ref);
}

LinkResult simulate_awgn(Modulation m, int symbol_count, double snr_db, std::uint64_t seed) {
    return transmit(m, symbol_count, snr_db, seed);
}

LinkResult simulate_link(const FarFieldGrid& pattern, const LinkConfig& config, std::optional<double> accepted_power) {
    const auto [it, ip] = pattern.nearest(config.direction.theta_deg, config.direction.phi_deg);
    if (!config.snap_to_grid) {
        const bool pole = pattern.theta_deg[it] == 0.0 || pattern.theta_deg[it] == 180.0;
        double dphi = std::fmod(std::abs(pattern.phi_deg[ip] - config.direction.phi_deg), 360.0);
        dphi = std::min(dphi, 360.0 - dphi);
        if (std::abs(pattern.theta_deg[it] - config.direction.theta_deg) > 1e-9 || (!pole && dphi > 1e-9))
            fail(ErrorCode::InvalidArgument, "direction " + config.direction.label + " is not a grid sample");
    }
    double g_lin = pattern.directivity(it, ip);
    if (accepted_power) {
        if (!(*accepted_power > 0.0)) fail(ErrorCode::InvalidArgument, "accepted power must be positive");
        g_lin = 4.0 * phys::pi * pattern.intensity(it, ip) / *accepted_power;
    }
    const double gain_dbi = 10.0 * std::log10(std::max(g_lin, 1e-30));
    const double fspl = free_space_path_loss_db(config.range_m, pattern.frequency);
    const double snr = config.tx_power_dbm - fspl + gain_dbi + config.rx_gain_dbi - config.noise_floor_dbm;
    LinkResult r = transmit(config.modulation, config.symbol_count, snr, config.seed);
    r.gain_dbi = gain_dbi;
    r.path_loss_db = fspl;
    return r;
}

}  // namespace isocma
