// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "isocma/farfield.hpp"
#include "isocma/io.hpp"
#include "isocma/linksim.hpp"

#include <filesystem>
#include <sstream>

using namespace isocma;
namespace fs = std::filesystem;

namespace {

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

fs::path scratch_dir(const char* name) {
    const fs::path p = fs::temp_directory_path() / ("isocma_io_" + std::string(name));
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("fixed number format") {
    CHECK(num(1.0) == "1");
    CHECK(num(868e6) == "868000000");
    CHECK(num(0.1) == "0.1");
    CHECK(num(1.0 / 3.0) == "0.3333333333");
    CHECK(num(-2.5e-12) == "-2.5e-12");
}

TEST_CASE("atomic write and read back") {
    const fs::path dir = scratch_dir("write");
    const fs::path f = dir / "sub" / "a.csv";
    write_file(f, "x,y\n1,2\n");
    CHECK(read_file(f) == "x,y\n1,2\n");
    CHECK(!fs::exists(f.string() + ".partial"));
    write_file(f, "z\n");
    CHECK(read_file(f) == "z\n");
    CHECK_THROWS_AS(read_file(dir / "missing.csv"), Error);
    fs::remove_all(dir);
}

TEST_CASE("port files") {
    std::vector<PortSample> s(3);
    for (int i = 0; i < 3; ++i) {
        s[i].frequency = 1e9 + i * 1e8;
        s[i].zin = {50.0, 100.0};
        s[i].zin_matched = {50.0, 10.0 * i};
        s[i].s11 = {0.1 * i, -0.05};
        s[i].s11_db = -20.0 + i;
    }
    const std::string d = driven_csv(s);
    CHECK(d.rfind("f_Hz,ReZin_ohm,ImZin_ohm,S11_dB\n", 0) == 0);
    CHECK(count_lines(d) == 4);
    CHECK(d.find("1100000000,50,10,-19\n") != std::string::npos);
    const std::string t = touchstone_s1p(s, 50.0);
    CHECK(t.find("# HZ S RI R 50\n") != std::string::npos);
    CHECK(t.find("1200000000 0.2 -0.05\n") != std::string::npos);
    CHECK(count_lines(matching_csv(s)) == 4);
}

TEST_CASE("pattern and deviation tables") {
    const FarFieldGrid g = analytic_u_pattern(0.03, 1e9, {30.0, 90.0});
    const std::string p = pattern_csv(g);
    CHECK(count_lines(p) == 1 + 7 * 4);
    CHECK(p.rfind("theta_deg,phi_deg,D_dBi,", 0) == 0);
    std::vector<DeviationReport> r{directivity_deviation(g)};
    const std::string d = deviation_csv(r);
    CHECK(d.find(",directivity\n") != std::string::npos);
}

TEST_CASE("constellation rows") {
    const LinkResult r = simulate_awgn(Modulation::Qpsk, 1000, 20.0, 1);
    const std::string c = constellation_csv(r);
    CHECK(count_lines(c) == 1001);
    CHECK(c.rfind("ReSym,ImSym\n", 0) == 0);
}

TEST_CASE("identical inputs give identical bytes") {
    const FarFieldGrid a = analytic_u_pattern(0.05, 2e9);
    const FarFieldGrid b = analytic_u_pattern(0.05, 2e9);
    CHECK(pattern_csv(a) == pattern_csv(b));
}
