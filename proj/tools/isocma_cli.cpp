// SPDX-License-Identifier: Apache-2.0
//
// isocma command-line front end. Talks to the solver only through the C API.

#include "isocma/isocma.h"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check(isocma_status s) {
    if (s != ISOCMA_OK) throw Failure(std::string(isocma_status_name(s)) + ": " + isocma_last_error());
}

template <class T, void (*Free)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Free(p); }
    T** out() { return &p; }
};
using Mesh = Handle<isocma_mesh, isocma_mesh_free>;
using Sweep = Handle<isocma_sweep, isocma_sweep_free>;
using Pattern = Handle<isocma_pattern, isocma_pattern_free>;
using Report = Handle<isocma_report, isocma_report_free>;

// 868M, 2.45G, 2.18p, 1e9, 1.5GHz
double parse_si(std::string text) {
    for (const char* unit : {"Hz", "F", "H"}) {
        const std::string u = unit;
        if (text.size() > u.size() && text.compare(text.size() - u.size(), u.size(), u) == 0) {
            text.erase(text.size() - u.size());
            break;
        }
    }
    double scale = 1.0;
    if (!text.empty()) {
        switch (text.back()) {
            case 'T': scale = 1e12; break;
            case 'G': scale = 1e9; break;
            case 'M': scale = 1e6; break;
            case 'k': scale = 1e3; break;
            case 'm': scale = 1e-3; break;
            case 'u': scale = 1e-6; break;
            case 'n': scale = 1e-9; break;
            case 'p': scale = 1e-12; break;
            case 'f': scale = 1e-15; break;
            default: break;
        }
        if (scale != 1.0) text.pop_back();
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(v)) throw Failure("cannot parse number '" + text + "'");
    return v * scale;
}

std::vector<double> parse_range(const std::string& text) {
    const auto a = text.find(':');
    const auto b = a == std::string::npos ? a : text.find(':', a + 1);
    if (b == std::string::npos) throw Failure("frequency range must be start:stop:points, got '" + text + "'");
    const double start = parse_si(text.substr(0, a));
    const double stop = parse_si(text.substr(a + 1, b - a - 1));
    const double points = parse_si(text.substr(b + 1));
    if (!(start > 0.0) || !(stop > start)) throw Failure("frequency range must satisfy 0 < start < stop");
    if (points < 2 || points != std::floor(points)) throw Failure("frequency range needs an integer point count >= 2");
    const int n = static_cast<int>(points);
    std::vector<double> f(n);
    for (int i = 0; i < n; ++i) f[i] = start + (stop - start) * i / (n - 1);
    f.back() = stop;
    return f;
}

// Same contract as the library writers: bytes land in NAME.partial first.
void write_text(const fs::path& path, const std::string& text) {
    const fs::path partial = path.string() + ".partial";
    FILE* fp = std::fopen(partial.string().c_str(), "wb");
    if (!fp) throw Failure("cannot write " + partial.string());
    const bool wrote = std::fwrite(text.data(), 1, text.size(), fp) == text.size();
    if (std::fclose(fp) != 0 || !wrote) {
        std::remove(partial.string().c_str());
        throw Failure("cannot write " + partial.string());
    }
    std::error_code ec;
    fs::rename(partial, path, ec);
    if (ec) throw Failure("cannot rename " + partial.string());
}

std::string format(const char* fmt, double a, double b = 0, double c = 0, double d = 0, double e = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, a, b, c, d, e);
    return buf;
}

struct Common {
    std::string out_dir;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    double eps_eff = 1.0;
    double z0 = 50.0;
    std::uint64_t seed = 1;
    std::string geometry;
    std::string preset;

    fs::path out(const std::string& name) const {
        fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
        std::error_code ec;
        fs::create_directories(dir, ec);
        return dir / name;
    }
    isocma_config config() const {
        isocma_config c;
        isocma_config_default(&c);
        c.eps_eff = eps_eff;
        c.z0 = z0;
        c.jobs = jobs;
        return c;
    }
    void load(Mesh& m) const {
        if (!geometry.empty() && !preset.empty()) throw Failure("give either --geometry or --preset, not both");
        if (!geometry.empty()) check(isocma_mesh_load(geometry.c_str(), m.out()));
        else if (!preset.empty()) check(isocma_mesh_preset(preset.c_str(), m.out()));
        else throw Failure("a geometry is required (--geometry FILE or --preset NAME)");
    }
};

void add_common(CLI::App* app, Common& c, bool geometry) {
    app->add_option("--out", c.out_dir, "Output directory (default $ISOCMA_OUT or .)");
    app->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
    app->add_option("--eps-eff", c.eps_eff, "Effective permittivity for frequency relabelling")->check(CLI::Range(1.0, 1e6));
    app->add_option("--z0", c.z0, "Reference impedance in ohm")->check(CLI::PositiveNumber);
    app->add_option("--seed", c.seed, "Random seed");
    if (geometry) {
        app->add_option("--geometry", c.geometry, "Geometry JSON file");
        app->add_option("--preset", c.preset, "Built-in geometry: quad-band, u-unloaded, u-loaded, purification:<AL2 mm>");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"isocma: thin-wire MoM and characteristic-mode solver for quasi-isotropic radiators"};
    app.require_subcommand(1);
    Common c;
    if (const char* env = std::getenv("ISOCMA_OUT")) c.out_dir = env;

    std::string f_range, output, problem, case_name = "all", modulation = "QPSK", cap_text, freq_text;
    std::string fmax_text;
    std::vector<std::string> directions;
    int modes = 10, mode = -1, spw = 20, symbols = 10000;
    double step = 5.0, tx_power = 0.0, range = 1.5, noise_floor = -60.0;

    auto* mesh_cmd = app.add_subcommand("mesh", "Write a geometry as JSON");
    add_common(mesh_cmd, c, true);
    mesh_cmd->add_option("--output", output, "File name inside --out (default mesh.json)");
    mesh_cmd->add_option("--discretize", fmax_text, "Refine for this maximum frequency (Hz, SI suffixes)");
    mesh_cmd->add_option("--spw", spw, "Segments per wavelength for --discretize");

    auto* cma_cmd = app.add_subcommand("cma", "Characteristic-mode sweep");
    add_common(cma_cmd, c, true);
    cma_cmd->add_option("--f", f_range, "start:stop:points")->required();
    cma_cmd->add_option("--modes", modes, "Modes kept per frequency")->check(CLI::PositiveNumber);
    cma_cmd->add_option("--spw", spw, "Segments per wavelength at the top frequency");

    auto* drive_cmd = app.add_subcommand("drive", "Driven port sweep");
    add_common(drive_cmd, c, true);
    drive_cmd->add_option("--f", f_range, "start:stop:points")->required();
    drive_cmd->add_option("--cap", cap_text, "Series feed capacitance (F, e.g. 2.18p)");
    drive_cmd->add_option("--spw", spw, "Segments per wavelength at the top frequency");

    auto* pattern_cmd = app.add_subcommand("pattern", "Far-field pattern at one frequency");
    add_common(pattern_cmd, c, true);
    pattern_cmd->add_option("--freq", freq_text, "Frequency (Hz, SI suffixes)")->required();
    pattern_cmd->add_option("--mode", mode, "Characteristic mode index (ascending |lambda|); driven when omitted");
    pattern_cmd->add_option("--step", step, "Grid step in degrees");

    auto* dev_cmd = app.add_subcommand("deviation", "Gain or directivity deviation versus frequency");
    add_common(dev_cmd, c, true);
    dev_cmd->add_option("--f", f_range, "start:stop:points")->required();
    dev_cmd->add_option("--mode", mode, "Characteristic mode index; driven gain deviation when omitted");
    dev_cmd->add_option("--step", step, "Grid step in degrees");

    auto* opt_cmd = app.add_subcommand("optimize", "Place isotropy resonances at target frequencies");
    add_common(opt_cmd, c, false);
    opt_cmd->add_option("--problem", problem, "Design problem JSON")->required();

    auto* link_cmd = app.add_subcommand("link", "AWGN link through the antenna pattern");
    add_common(link_cmd, c, true);
    link_cmd->add_option("--freq", freq_text, "Frequency (Hz, SI suffixes)")->required();
    link_cmd->add_option("--modulation", modulation, "QPSK or 16QAM");
    link_cmd->add_option("--direction", directions, "+X,-X,+Y,-Y,+Z,-Z or theta,phi (repeatable; default all six)");
    link_cmd->add_option("--symbols", symbols, "Symbol count (>= 1000)");
    link_cmd->add_option("--tx-power", tx_power, "Transmit power in dBm");
    link_cmd->add_option("--range", range, "Range in m");
    link_cmd->add_option("--noise-floor", noise_floor, "Noise floor in dBm");

    auto* rep_cmd = app.add_subcommand("reproduce", "Run reproduction cases");
    add_common(rep_cmd, c, false);
    rep_cmd->add_option("--case", case_name, "inductor-shift, purification, quad-band, analytic, link or all");

    if (argc < 2) {
        std::fputs(app.help().c_str(), stderr);
        return 2;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const isocma_config cfg = c.config();
        if (mesh_cmd->parsed()) {
            Mesh m;
            c.load(m);
            if (!fmax_text.empty()) {
                Mesh fine;
                check(isocma_mesh_discretize(m.p, parse_si(fmax_text), spw, fine.out()));
                std::swap(m.p, fine.p);
            }
            const fs::path path = c.out(output.empty() ? "mesh.json" : output);
            check(isocma_mesh_save(m.p, path.string().c_str()));
            size_t nodes, segs, loads;
            int port;
            check(isocma_mesh_counts(m.p, &nodes, &segs, &loads, &port));
            std::printf("%s: %zu nodes, %zu segments, %zu loads, %s\n", path.string().c_str(), nodes, segs, loads,
                        port ? "fed" : "no port");
        } else if (cma_cmd->parsed()) {
            Mesh m;
            c.load(m);
            const auto f = parse_range(f_range);
            isocma_config k = cfg;
            k.n_modes = modes;
            k.segments_per_wavelength = spw;
            Sweep s;
            check(isocma_cma_sweep(m.p, f.data(), f.size(), &k, s.out()));
            check(isocma_sweep_write(s.p, c.out("cma_ca.csv").string().c_str(),
                                     c.out("cma_eigenvalues.csv").string().c_str()));
            int tracks = 0;
            check(isocma_sweep_track_count(s.p, &tracks));
            size_t n = 0;
            check(isocma_sweep_resonances(s.p, nullptr, 0, &n));
            std::vector<isocma_resonance> res(n);
            check(isocma_sweep_resonances(s.p, res.data(), n, &n));
            std::string csv = "track,f_Hz,parity,eigenvalue,deviation_dB\n";
            for (size_t i = 0; i < n; ++i) {
                const auto& r = res[i];
                csv += std::to_string(r.track) + format(",%.10g,%.10g,%.10g,%.10g\n", r.frequency, r.parity,
                                                        r.eigenvalue, r.deviation_db);
                std::printf("track %d resonance %.4f GHz parity %+.2f directivity deviation %.2f dB\n", r.track,
                            r.frequency / 1e9, r.parity, r.deviation_db);
                check(isocma_sweep_write_eigencurrent(
                    s.p, i, c.out("cma_mode_" + std::to_string(i) + ".csv").string().c_str()));
            }
            write_text(c.out("cma_resonances.csv"), csv);
            std::printf("%d tracks over %zu frequencies\n", tracks, f.size());
        } else if (drive_cmd->parsed()) {
            Mesh m;
            c.load(m);
            const auto f = parse_range(f_range);
            isocma_config k = cfg;
            k.segments_per_wavelength = spw;
            const double cap = cap_text.empty() ? 0.0 : parse_si(cap_text);
            std::vector<isocma_port_result> r(f.size());
            check(isocma_drive_sweep(m.p, f.data(), f.size(), &k, cap, r.data()));
            check(isocma_write_port_files(r.data(), r.size(), c.z0, c.out("drive.csv").string().c_str(),
                                          c.out("drive_matching.csv").string().c_str(),
                                          c.out("drive.s1p").string().c_str()));
            size_t best = 0;
            for (size_t i = 0; i < r.size(); ++i)
                if (r[i].s11_db < r[best].s11_db) best = i;
            std::printf("best match %.2f dB at %.4f GHz, Zin %.2f%+.2fj ohm\n", r[best].s11_db, r[best].frequency / 1e9,
                        r[best].zin_matched_re, r[best].zin_matched_im);
        } else if (pattern_cmd->parsed()) {
            Mesh m;
            c.load(m);
            const double f = parse_si(freq_text);
            Pattern p;
            if (mode >= 0) check(isocma_pattern_mode(m.p, f, mode, &cfg, step, p.out()));
            else check(isocma_pattern_driven(m.p, f, &cfg, step, p.out()));
            check(isocma_pattern_write(p.p, c.out("pattern.csv").string().c_str()));
            isocma_deviation d;
            check(isocma_pattern_deviation(p.p, &d));
            double mean = 0.0;
            check(isocma_pattern_mean_directivity(p.p, &mean));
            std::printf("%.4f GHz: %s deviation %.2f dB (max %.2f dBi, min %.2f dBi), mean directivity %.4f\n", f / 1e9,
                        d.is_gain ? "gain" : "directivity", d.deviation_db, d.max_db, d.min_db, mean);
        } else if (dev_cmd->parsed()) {
            Mesh m;
            c.load(m);
            const auto f = parse_range(f_range);
            std::vector<isocma_deviation> ds(f.size());
            for (size_t i = 0; i < f.size(); ++i) {
                Pattern p;
                if (mode >= 0) check(isocma_pattern_mode(m.p, f[i], mode, &cfg, step, p.out()));
                else check(isocma_pattern_driven(m.p, f[i], &cfg, step, p.out()));
                check(isocma_pattern_deviation(p.p, &ds[i]));
            }
            check(isocma_write_deviation_csv(ds.data(), ds.size(), c.out("deviation.csv").string().c_str()));
            size_t best = 0;
            for (size_t i = 0; i < ds.size(); ++i)
                if (ds[i].deviation_db < ds[best].deviation_db) best = i;
            std::printf("lowest deviation %.2f dB at %.4f GHz over %zu frequencies\n", ds[best].deviation_db,
                        ds[best].frequency / 1e9, ds.size());
        } else if (opt_cmd->parsed()) {
            FILE* fp = std::fopen(problem.c_str(), "rb");
            if (!fp) throw Failure("cannot read " + problem);
            std::string text;
            char buf[4096];
            for (size_t n; (n = std::fread(buf, 1, sizeof buf, fp)) > 0;) text.append(buf, n);
            std::fclose(fp);
            char* report = nullptr;
            check(isocma_optimize(text.c_str(), c.jobs, &report, c.out("design_log.csv").string().c_str()));
            const std::string json = report;
            isocma_string_free(report);
            write_text(c.out("design_report.json"), json + "\n");
            std::printf("%s\n", json.c_str());
        } else if (link_cmd->parsed()) {
            Mesh m;
            c.load(m);
            const double f = parse_si(freq_text);
            Pattern p;
            check(isocma_pattern_driven(m.p, f, &cfg, 5.0, p.out()));
            if (directions.empty()) directions = {"+X", "-X", "+Y", "-Y", "+Z", "-Z"};
            std::string csv = "direction,gain_dBi,SNR_dB,EVM_pct\n";
            for (size_t i = 0; i < directions.size(); ++i) {
                isocma_link_config lc;
                isocma_link_config_default(&lc);
                lc.modulation = modulation.c_str();
                lc.symbol_count = symbols;
                lc.tx_power_dbm = tx_power;
                lc.range_m = range;
                lc.noise_floor_dbm = noise_floor;
                lc.seed = c.seed;
                lc.direction = directions[i].c_str();
                isocma_link_result r;
                const std::string file = "link_constellation_" + std::to_string(i) + ".csv";
                check(isocma_link_simulate(p.p, &lc, c.out(file).string().c_str(), &r));
                csv += "\"" + directions[i] + "\"" + format(",%.10g,%.10g,%.10g\n", r.gain_dbi, r.snr_db, r.evm_pct);
                std::printf("%-8s gain %6.2f dBi  SNR %6.2f dB  EVM %6.3f%%\n", directions[i].c_str(), r.gain_dbi,
                            r.snr_db, r.evm_pct);
            }
            write_text(c.out("link_summary.csv"), csv);
        } else if (rep_cmd->parsed()) {
            std::vector<std::string> names;
            if (case_name == "all")
                for (size_t i = 0; i < isocma_case_count(); ++i) names.push_back(isocma_case_name(i));
            else
                names.push_back(case_name);
            const fs::path dir = c.out(".");
            std::vector<std::unique_ptr<Report>> reports;
            std::vector<const isocma_report*> raw;
            int failed = 0;
            for (const auto& n : names) {
                reports.push_back(std::make_unique<Report>());
                check(isocma_reproduce(n.c_str(), dir.string().c_str(), c.jobs, c.seed, rep_cmd->count("--eps-eff") ? c.eps_eff : 0.0,
                                       c.z0, reports.back()->out()));
                const isocma_report* r = reports.back()->p;
                raw.push_back(r);
                std::printf("[%s]\n", n.c_str());
                for (size_t i = 0; i < isocma_report_line_count(r); ++i) std::printf("  %s\n", isocma_report_line(r, i));
                for (size_t i = 0; i < isocma_report_check_count(r); ++i) {
                    isocma_check k;
                    check(isocma_report_check(r, i, &k));
                    if (!k.pass) ++failed;
                    std::printf("  %s %s = %.6g (accepted %.6g .. %.6g)\n", k.pass ? "PASS" : "FAIL", k.name, k.value,
                                k.lo, k.hi);
                }
            }
            check(isocma_write_summary(raw.data(), raw.size(), c.out("summary.csv").string().c_str()));
            std::printf("%d check(s) failed\n", failed);
            if (failed) return 1;
        }
    } catch (const Failure& e) {
        std::fprintf(stderr, "isocma: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "isocma: %s\n", e.what());
        return 1;
    }
    return 0;
}
