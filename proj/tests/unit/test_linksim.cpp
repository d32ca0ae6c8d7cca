// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "isocma/farfield.hpp"
#include "isocma/linksim.hpp"

#include <cmath>

using namespace isocma;
using doctest::Approx;

TEST_CASE("alphabets have unit average power") {
    for (auto m : {Modulation::Qpsk, Modulation::Qam16}) {
        const auto a = alphabet(m);
        double p = 0.0;
        for (auto s : a) p += std::norm(s);
        CHECK(p / a.size() == Approx(1.0).epsilon(1e-12));
    }
    CHECK(alphabet(Modulation::Qpsk).size() == 4);
    CHECK(alphabet(Modulation::Qam16).size() == 16);
}

TEST_CASE("EVM follows 1/sqrt(SNR) on AWGN") {
    for (double snr : {10.0, 20.0, 30.0}) {
        const double expect = 100.0 * std::pow(10.0, -snr / 20.0);
        for (auto m : {Modulation::Qpsk, Modulation::Qam16}) {
            const LinkResult r = simulate_awgn(m, 100000, snr, 3);
            CHECK(r.evm_pct == Approx(expect).epsilon(0.02));
        }
    }
}

TEST_CASE("same seed, same stream") {
    const auto a = simulate_awgn(Modulation::Qam16, 2000, 15.0, 42);
    const auto b = simulate_awgn(Modulation::Qam16, 2000, 15.0, 42);
    const auto c = simulate_awgn(Modulation::Qam16, 2000, 15.0, 43);
    CHECK(a.received == b.received);
    CHECK(a.received != c.received);
}

TEST_CASE("EVM is invariant to a common rotation") {
    const auto r = simulate_awgn(Modulation::Qpsk, 5000, 18.0, 5);
    const cplx rot = std::polar(1.0, 0.731);
    auto rx = r.received, ref = r.reference;
    for (auto& s : rx) s *= rot;
    for (auto& s : ref) s *= rot;
    CHECK(evm(rx, ref) == Approx(r.evm_pct).epsilon(1e-12));
}

TEST_CASE("evm rejects mismatched streams") {
    CHECK_THROWS_AS(evm({1.0}, {}), Error);
    CHECK_THROWS_AS(evm({}, {}), Error);
    CHECK_THROWS_AS(simulate_awgn(Modulation::Qpsk, 10, 10.0, 1), Error);
}

TEST_CASE("directions") {
    const auto d = cardinal_directions();
    REQUIRE(d.size() == 6);
    CHECK(parse_direction("+Z").theta_deg == 0.0);
    CHECK(parse_direction("-Z").theta_deg == 180.0);
    CHECK(parse_direction("-Y").phi_deg == 270.0);
    const Direction t = parse_direction("45,30");
    CHECK(t.theta_deg == 45.0);
    CHECK(t.phi_deg == 30.0);
    CHECK_THROWS_AS(parse_direction("north"), Error);
    CHECK_THROWS_AS(parse_direction("200,0"), Error);
    CHECK_THROWS_AS(parse_modulation("8PSK"), Error);
}

TEST_CASE("free-space path loss") {
    // 20 log10(4 pi d / lambda)
    const double f = 868e6, d = 1.5;
    const double expect = 20.0 * std::log10(4.0 * M_PI * d * f / 299792458.0);
    CHECK(free_space_path_loss_db(d, f) == Approx(expect).epsilon(1e-12));
}

TEST_CASE("link budget over an isotropic-like pattern") {
    const FarFieldGrid g = analytic_u_pattern(0.01, 1e9, {10.0, 10.0});
    LinkConfig cfg;
    cfg.tx_power_dbm = 0.0;
    cfg.noise_floor_dbm = -70.0;
    cfg.direction = parse_direction("+Z");
    const LinkResult r = simulate_link(g, cfg);
    const double expect_snr = cfg.tx_power_dbm + r.gain_dbi - free_space_path_loss_db(cfg.range_m, 1e9) - cfg.noise_floor_dbm;
    CHECK(r.snr_db == Approx(expect_snr).epsilon(1e-12));
    CHECK(r.evm_pct == Approx(100.0 * std::pow(10.0, -r.snr_db / 20.0)).epsilon(0.05));
    cfg.noise_floor_dbm = -HUGE_VAL;
    CHECK(simulate_link(g, cfg).evm_pct == 0.0);
}

TEST_CASE("six directions with one seed: EVM spread equals gain spread") {
    const FarFieldGrid g = analytic_u_pattern(0.08, 1e9, {5.0, 5.0});
    LinkConfig cfg;
    cfg.noise_floor_dbm = -70.0;
    double emin = 1e9, emax = 0.0, gmin = 1e9, gmax = -1e9;
    for (const auto& d : cardinal_directions()) {
        cfg.direction = d;
        const auto r = simulate_link(g, cfg);
        emin = std::min(emin, r.evm_pct);
        emax = std::max(emax, r.evm_pct);
        gmin = std::min(gmin, r.gain_dbi);
        gmax = std::max(gmax, r.gain_dbi);
    }
    CHECK(20.0 * std::log10(emax / emin) == Approx(gmax - gmin).epsilon(1e-9));
}
