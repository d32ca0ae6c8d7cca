// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "isocma/isocma.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

fs::path tmp_dir(const char* name) {
    const char* env = std::getenv("ISOCMA_TEST_TMP");
    const fs::path base = env ? fs::path(env) : fs::temp_directory_path() / "isocma_capi";
    const fs::path p = base / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("version and status names") {
    CHECK(std::strlen(isocma_version()) > 0);
    CHECK(std::string(isocma_status_name(ISOCMA_OK)) == "ok");
    CHECK(std::string(isocma_status_name(ISOCMA_NOT_FOUND)) == "not found");
}

TEST_CASE("argument errors set the last error") {
    isocma_mesh* m = nullptr;
    CHECK(isocma_mesh_preset(nullptr, &m) == ISOCMA_INVALID_ARGUMENT);
    CHECK(isocma_mesh_preset("no-such", &m) == ISOCMA_NOT_FOUND);
    CHECK(m == nullptr);
    CHECK(std::string(isocma_last_error()).find("no-such") != std::string::npos);
    CHECK(isocma_mesh_from_json("{not json", &m) != ISOCMA_OK);
    isocma_radiator_params p{};
    CHECK(isocma_mesh_build_u(&p, ISOCMA_BOTTOM_STRIP, 1, &m) == ISOCMA_VALIDATION);
    isocma_mesh_free(nullptr);  // no-op
}

TEST_CASE("mesh round trip and discretization") {
    isocma_mesh* m = nullptr;
    REQUIRE(isocma_mesh_preset("quad-band", &m) == ISOCMA_OK);
    size_t nodes = 0, segs = 0, loads = 0;
    int port = 0;
    REQUIRE(isocma_mesh_counts(m, &nodes, &segs, &loads, &port) == ISOCMA_OK);
    CHECK(loads == 4);
    CHECK(port == 1);
    char* json = nullptr;
    REQUIRE(isocma_mesh_to_json(m, &json) == ISOCMA_OK);
    isocma_mesh* back = nullptr;
    REQUIRE(isocma_mesh_from_json(json, &back) == ISOCMA_OK);
    size_t nodes2 = 0, segs2 = 0;
    isocma_mesh_counts(back, &nodes2, &segs2, nullptr, nullptr);
    CHECK(nodes2 == nodes);
    CHECK(segs2 == segs);
    isocma_string_free(json);

    isocma_mesh* fine = nullptr;
    REQUIRE(isocma_mesh_discretize(m, 2.5e9, 20, &fine) == ISOCMA_OK);
    size_t fsegs = 0;
    isocma_mesh_counts(fine, nullptr, &fsegs, nullptr, nullptr);
    CHECK(fsegs > segs);

    const fs::path dir = tmp_dir("mesh");
    const std::string path = (dir / "m.json").string();
    REQUIRE(isocma_mesh_save(m, path.c_str()) == ISOCMA_OK);
    isocma_mesh* loaded = nullptr;
    REQUIRE(isocma_mesh_load(path.c_str(), &loaded) == ISOCMA_OK);
    CHECK(isocma_mesh_load((dir / "none.json").string().c_str(), &back) == ISOCMA_IO);
    isocma_mesh_free(loaded);
    isocma_mesh_free(fine);
    isocma_mesh_free(back);
    isocma_mesh_free(m);
}

TEST_CASE("driven dipole through the C interface") {
    isocma_mesh* m = nullptr;
    REQUIRE(isocma_mesh_build_dipole(0.5, 1e-5, 40, 1, &m) == ISOCMA_OK);
    isocma_config cfg;
    isocma_config_default(&cfg);
    CHECK(cfg.eps_eff == 1.0);
    CHECK(cfg.z0 == 50.0);
    const double f = 299792458.0;
    isocma_port_result r{};
    REQUIRE(isocma_drive_sweep(m, &f, 1, &cfg, 0.0, &r) == ISOCMA_OK);
    CHECK(r.zin_re > 65.0);
    CHECK(r.zin_re < 85.0);
    CHECK(r.zin_matched_re == r.zin_re);
    CHECK(r.accepted_power > 0.0);

    isocma_pattern* pat = nullptr;
    REQUIRE(isocma_pattern_driven(m, f, &cfg, 5.0, &pat) == ISOCMA_OK);
    double mean = 0.0;
    REQUIRE(isocma_pattern_mean_directivity(pat, &mean) == ISOCMA_OK);
    CHECK(std::abs(mean - 1.0) < 0.01);
    isocma_deviation dev{};
    REQUIRE(isocma_pattern_deviation(pat, &dev) == ISOCMA_OK);
    CHECK(dev.is_gain == 1);
    double d90 = 0.0;
    REQUIRE(isocma_pattern_directivity_dbi(pat, 90.0, 0.0, &d90) == ISOCMA_OK);
    CHECK(std::abs(d90 - 2.15) < 0.1);

    isocma_link_config link;
    isocma_link_config_default(&link);
    isocma_link_result lr{};
    REQUIRE(isocma_link_simulate(pat, &link, nullptr, &lr) == ISOCMA_OK);
    CHECK(lr.evm_pct > 0.0);
    link.modulation = "8PSK";
    CHECK(isocma_link_simulate(pat, &link, nullptr, &lr) == ISOCMA_INVALID_ARGUMENT);

    const fs::path dir = tmp_dir("drive");
    REQUIRE(isocma_write_port_files(&r, 1, 50.0, (dir / "d.csv").string().c_str(), nullptr,
                                    (dir / "d.s1p").string().c_str()) == ISOCMA_OK);
    CHECK(fs::exists(dir / "d.s1p"));
    REQUIRE(isocma_pattern_write(pat, (dir / "p.csv").string().c_str()) == ISOCMA_OK);
    isocma_pattern_free(pat);
    isocma_mesh_free(m);
}

TEST_CASE("characteristic-mode sweep through the C interface") {
    isocma_mesh* m = nullptr;
    REQUIRE(isocma_mesh_build_dipole(0.5, 1e-4, 20, 1, &m) == ISOCMA_OK);
    isocma_config cfg;
    isocma_config_default(&cfg);
    cfg.n_modes = 3;
    std::vector<double> fs_;
    for (int i = 0; i < 11; ++i) fs_.push_back(250e6 + 10e6 * i);
    isocma_sweep* sw = nullptr;
    REQUIRE(isocma_cma_sweep(m, fs_.data(), fs_.size(), &cfg, &sw) == ISOCMA_OK);
    int tracks = 0;
    REQUIRE(isocma_sweep_track_count(sw, &tracks) == ISOCMA_OK);
    CHECK(tracks >= 3);
    size_t count = 0;
    REQUIRE(isocma_sweep_resonances(sw, nullptr, 0, &count) == ISOCMA_OK);
    REQUIRE(count >= 1);
    std::vector<isocma_resonance> res(count);
    REQUIRE(isocma_sweep_resonances(sw, res.data(), res.size(), &count) == ISOCMA_OK);
    // Half-wave resonance a little below 300 MHz, odd under the mirror.
    CHECK(res[0].frequency > 270e6);
    CHECK(res[0].frequency < 300e6);
    CHECK(res[0].parity < -0.5);
    double lam = 0.0, ang = 0.0;
    CHECK(isocma_sweep_sample(sw, 999, 0, &lam, &ang) == ISOCMA_INVALID_ARGUMENT);
    REQUIRE(isocma_sweep_sample(sw, 0, 0, &lam, &ang) == ISOCMA_OK);
    CHECK(std::abs(ang - (180.0 - std::atan(lam) * 180.0 / M_PI)) < 1e-9);
    const fs::path dir = tmp_dir("cma");
    REQUIRE(isocma_sweep_write(sw, (dir / "ca.csv").string().c_str(), (dir / "ev.csv").string().c_str()) == ISOCMA_OK);
    REQUIRE(isocma_sweep_write_eigencurrent(sw, 0, (dir / "j.csv").string().c_str()) == ISOCMA_OK);
    CHECK(isocma_sweep_write_eigencurrent(sw, 999, (dir / "x.csv").string().c_str()) != ISOCMA_OK);
    isocma_sweep_free(sw);
    isocma_mesh_free(m);
}

TEST_CASE("awgn and reproduction cases") {
    double evm = 0.0;
    REQUIRE(isocma_awgn_evm("16QAM", 100000, 20.0, 1, &evm) == ISOCMA_OK);
    CHECK(std::abs(evm - 10.0) < 0.3);
    REQUIRE(isocma_case_count() == 5);
    CHECK(std::string(isocma_case_name(3)) == "analytic");
    CHECK(isocma_case_name(99) == nullptr);
    isocma_report* rep = nullptr;
    REQUIRE(isocma_reproduce("analytic", nullptr, 1, 1, 0.0, 50.0, &rep) == ISOCMA_OK);
    CHECK(isocma_report_passed(rep) == 1);
    CHECK(isocma_report_check_count(rep) == 2);
    isocma_check c{};
    REQUIRE(isocma_report_check(rep, 0, &c) == ISOCMA_OK);
    CHECK(c.pass == 1);
    double v = 0.0;
    REQUIRE(isocma_report_value(rep, "max_pointwise_error_dB", &v) == ISOCMA_OK);
    CHECK(v < 0.2);
    CHECK(isocma_report_value(rep, "nope", &v) == ISOCMA_NOT_FOUND);
    CHECK(isocma_report_line_count(rep) == 4);
    const fs::path dir = tmp_dir("summary");
    const isocma_report* list[] = {rep};
    REQUIRE(isocma_write_summary(list, 1, (dir / "summary.csv").string().c_str()) == ISOCMA_OK);
    isocma_report_free(rep);
    CHECK(isocma_reproduce("bogus", nullptr, 1, 1, 0.0, 50.0, &rep) == ISOCMA_INVALID_ARGUMENT);
}

TEST_CASE("optimizer through the C interface") {
    const char* problem = R"({"targets_hz": [1e9], "parameters": [{"name": "AL1", "min": 0.0, "max": 1.0, "seed": 2.0}]})";
    char* report = nullptr;
    CHECK(isocma_optimize(problem, 1, &report, nullptr) == ISOCMA_VALIDATION);
    CHECK(report == nullptr);
}
