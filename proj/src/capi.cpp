// SPDX-License-Identifier: Apache-2.0

#include "isocma/isocma.h"

#include "isocma/feednet.hpp"
#include "isocma/reproduce.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

using namespace isocma;

struct isocma_mesh {
    SegmentMesh mesh;
};

struct isocma_sweep {
    SegmentMesh mesh;
    SweepOptions options;
    ModeSweep sweep;
    std::vector<TrackResonance> resonances;
    std::vector<double> deviations;
};

struct isocma_pattern {
    FarFieldGrid grid;
    double accepted_power = 0.0;  // 0 for modal patterns
};

struct isocma_report {
    CaseReport report;
};

namespace {

thread_local std::string g_last_error;

isocma_status to_status(ErrorCode c) {
    switch (c) {
        case ErrorCode::InvalidArgument: return ISOCMA_INVALID_ARGUMENT;
        case ErrorCode::Validation: return ISOCMA_VALIDATION;
        case ErrorCode::Numerical: return ISOCMA_NUMERICAL;
        case ErrorCode::NotFound: return ISOCMA_NOT_FOUND;
        case ErrorCode::Io: return ISOCMA_IO;
    }
    return ISOCMA_INTERNAL;
}

template <class F>
isocma_status guard(F&& body) {
    try {
        body();
        return ISOCMA_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const nlohmann::json::exception& e) {
        g_last_error = std::string("malformed JSON: ") + e.what();
        return ISOCMA_IO;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return ISOCMA_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return ISOCMA_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return ISOCMA_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

RadiatorParams to_params(const isocma_radiator_params& p) {
    RadiatorParams r;
    r.arm_length = p.arm_length;
    r.arm_spacing = p.arm_spacing;
    r.strip_width = p.strip_width;
    r.rhombus_diagonal = p.rhombus_diagonal;
    r.inductor_value = p.inductor_value;
    r.inductor_offset = p.inductor_offset;
    r.feed_gap = p.feed_gap;
    return r;
}

BottomStyle to_bottom(int b) {
    if (b == ISOCMA_BOTTOM_STRIP) return BottomStyle::Strip;
    if (b == ISOCMA_BOTTOM_RHOMBUS) return BottomStyle::RhombusSkeleton;
    fail(ErrorCode::InvalidArgument, "unknown bottom style " + std::to_string(b));
}

isocma_config config_or_default(const isocma_config* c) {
    isocma_config out;
    isocma_config_default(&out);
    if (c) out = *c;
    if (!(out.eps_eff >= 1.0)) fail(ErrorCode::InvalidArgument, "eps_eff must be >= 1");
    if (!(out.z0 > 0.0)) fail(ErrorCode::InvalidArgument, "z0 must be positive");
    if (out.jobs < 1) fail(ErrorCode::InvalidArgument, "jobs must be >= 1");
    if (out.n_modes < 1) fail(ErrorCode::InvalidArgument, "n_modes must be >= 1");
    if (out.segments_per_wavelength < 10) fail(ErrorCode::InvalidArgument, "segments_per_wavelength must be >= 10");
    return out;
}

SweepOptions sweep_options(const isocma_config& c) {
    SweepOptions s;
    s.n_modes = c.n_modes;
    s.scale.eps_eff = c.eps_eff;
    s.exec.jobs = c.jobs;
    return s;
}

std::vector<double> frequencies(const double* f, std::size_t n) {
    if (n == 0) fail(ErrorCode::InvalidArgument, "no frequencies given");
    need(f, "frequencies");
    std::vector<double> out(f, f + n);
    for (double v : out)
        if (!(v > 0.0)) fail(ErrorCode::InvalidArgument, "frequencies must be positive");
    return out;
}

SegmentMesh refined(const SegmentMesh& mesh, double f_reported_max, const isocma_config& c) {
    return discretize(mesh, FrequencyScale{c.eps_eff}.to_solver(f_reported_max), c.segments_per_wavelength);
}

}  // namespace

extern "C" {

const char* isocma_version(void) { return "1.0.0"; }
const char* isocma_last_error(void) { return g_last_error.c_str(); }

const char* isocma_status_name(isocma_status s) {
    switch (s) {
        case ISOCMA_OK: return "ok";
        case ISOCMA_INVALID_ARGUMENT: return "invalid argument";
        case ISOCMA_VALIDATION: return "validation error";
        case ISOCMA_NUMERICAL: return "numerical error";
        case ISOCMA_NOT_FOUND: return "not found";
        case ISOCMA_IO: return "I/O error";
        case ISOCMA_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void isocma_string_free(char* s) { std::free(s); }

// ---- meshes

isocma_status isocma_mesh_build_u(const isocma_radiator_params* params, int bottom, int feed, isocma_mesh** out) {
    return guard([&] {
        need(params, "params");
        need(out, "out");
        *out = new isocma_mesh{build_u_radiator(to_params(*params), UOptions{to_bottom(bottom), feed != 0})};
    });
}

isocma_status isocma_mesh_build_h(const isocma_radiator_params* pairs, size_t n_pairs, double rhombus_diagonal,
                                  double feed_gap, int bottom, int feed, isocma_mesh** out) {
    return guard([&] {
        need(pairs, "pairs");
        need(out, "out");
        std::vector<RadiatorParams> ps;
        for (size_t i = 0; i < n_pairs; ++i) ps.push_back(to_params(pairs[i]));
        HCenter c;
        c.rhombus_diagonal = rhombus_diagonal;
        c.feed_gap = feed_gap;
        c.feed = feed != 0;
        c.bottom = to_bottom(bottom);
        *out = new isocma_mesh{build_h_radiator(ps, c)};
    });
}

isocma_status isocma_mesh_build_dipole(double length, double radius, int segments, int feed, isocma_mesh** out) {
    return guard([&] {
        need(out, "out");
        *out = new isocma_mesh{build_dipole(length, radius, segments, feed != 0)};
    });
}

isocma_status isocma_mesh_preset(const char* name, isocma_mesh** out) {
    return guard([&] {
        need(name, "name");
        need(out, "out");
        const std::string n = name;
        if (n == "quad-band") {
            *out = new isocma_mesh{quad_band_design().build()};
        } else if (n == "u-unloaded" || n == "u-loaded") {
            *out = new isocma_mesh{build_u_radiator(inductor_study_params(n == "u-loaded"))};
        } else if (n.rfind("purification:", 0) == 0) {
            std::size_t used = 0;
            double mm = 0.0;
            try {
                mm = std::stod(n.substr(13), &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != n.size() - 13) fail(ErrorCode::InvalidArgument, "bad preset '" + n + "'");
            *out = new isocma_mesh{purification_design(mm * 1e-3).build()};
        } else {
            fail(ErrorCode::NotFound, "unknown preset '" + n + "'");
        }
    });
}

isocma_status isocma_mesh_from_json(const char* json, isocma_mesh** out) {
    return guard([&] {
        need(json, "json");
        need(out, "out");
        *out = new isocma_mesh{mesh_from_json(nlohmann::json::parse(json))};
    });
}

isocma_status isocma_mesh_load(const char* path, isocma_mesh** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        const std::string text = read_file(path);
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::Io, std::string(path) + ": " + e.what());
        }
        *out = new isocma_mesh{mesh_from_json(doc)};
    });
}

isocma_status isocma_mesh_save(const isocma_mesh* mesh, const char* path) {
    return guard([&] {
        need(mesh, "mesh");
        need(path, "path");
        write_file(path, mesh_to_json(mesh->mesh).dump(2) + "\n");
    });
}

isocma_status isocma_mesh_to_json(const isocma_mesh* mesh, char** out) {
    return guard([&] {
        need(mesh, "mesh");
        need(out, "out");
        *out = dup(mesh_to_json(mesh->mesh).dump(2));
    });
}

isocma_status isocma_mesh_discretize(const isocma_mesh* mesh, double f_max, int spw, isocma_mesh** out) {
    return guard([&] {
        need(mesh, "mesh");
        need(out, "out");
        *out = new isocma_mesh{discretize(mesh->mesh, f_max, spw)};
    });
}

isocma_status isocma_mesh_counts(const isocma_mesh* mesh, size_t* nodes, size_t* segments, size_t* loads,
                                 int* has_port) {
    return guard([&] {
        need(mesh, "mesh");
        if (nodes) *nodes = mesh->mesh.nodes.size();
        if (segments) *segments = mesh->mesh.segments.size();
        if (loads) *loads = mesh->mesh.loads.size();
        if (has_port) *has_port = mesh->mesh.port.has_value();
    });
}

void isocma_mesh_free(isocma_mesh* mesh) { delete mesh; }

void isocma_config_default(isocma_config* c) {
    if (!c) return;
    c->eps_eff = 1.0;
    c->z0 = 50.0;
    c->jobs = 1;
    c->n_modes = 10;
    c->segments_per_wavelength = 20;
}

// ---- driven port

isocma_status isocma_drive_sweep(const isocma_mesh* mesh, const double* f, size_t count, const isocma_config* config,
                                 double series_capacitance, isocma_port_result* results) {
    return guard([&] {
        need(mesh, "mesh");
        need(results, "results");
        const isocma_config c = config_or_default(config);
        const auto fs = frequencies(f, count);
        const SegmentMesh m = refined(mesh->mesh, *std::max_element(fs.begin(), fs.end()), c);
        const FrequencyScale scale{c.eps_eff};
        std::vector<isocma_port_result> tmp(fs.size());
        detail::parallel_for(fs.size(), c.jobs, [&](std::size_t i) {
            const double fsolve = scale.to_solver(fs[i]);
            const DrivenSolution s = solve_driven(assemble_loaded(m, fsolve), m, 1.0, c.z0);
            const cplx zm = series_capacitance > 0.0 ? series_capacitor(s.zin, series_capacitance, fsolve) : s.zin;
            const PortState ps = reflection(zm, c.z0, fs[i]);
            tmp[i] = {fs[i], s.zin.real(), s.zin.imag(), zm.real(), zm.imag(), ps.s11.real(), ps.s11.imag(),
                      ps.s11_db, s.accepted_power};
        });
        std::copy(tmp.begin(), tmp.end(), results);
    });
}

isocma_status isocma_write_port_files(const isocma_port_result* results, size_t count, double z0, const char* csv,
                                      const char* matching, const char* s1p) {
    return guard([&] {
        need(results, "results");
        std::vector<PortSample> samples;
        for (size_t i = 0; i < count; ++i) {
            const auto& r = results[i];
            samples.push_back({r.frequency, {r.zin_re, r.zin_im}, {r.zin_matched_re, r.zin_matched_im}, r.s11_db,
                               {r.s11_re, r.s11_im}});
        }
        if (csv) write_file(csv, driven_csv(samples));
        if (matching) write_file(matching, matching_csv(samples));
        if (s1p) write_file(s1p, touchstone_s1p(samples, z0));
    });
}

// ---- characteristic modes

isocma_status isocma_cma_sweep(const isocma_mesh* mesh, const double* f, size_t count, const isocma_config* config,
                               isocma_sweep** out) {
    return guard([&] {
        need(mesh, "mesh");
        need(out, "out");
        const isocma_config c = config_or_default(config);
        auto fs = frequencies(f, count);
        auto s = std::make_unique<isocma_sweep>();
        s->mesh = refined(mesh->mesh, *std::max_element(fs.begin(), fs.end()), c);
        s->options = sweep_options(c);
        s->sweep = modal_sweep(s->mesh, fs, s->options);
        s->resonances = sweep_resonances(s->mesh, s->sweep, s->options);
        s->deviations.resize(s->resonances.size());
        detail::parallel_for(s->resonances.size(), c.jobs, [&](std::size_t i) {
            s->deviations[i] =
                directivity_deviation(modal_pattern(s->mesh, s->resonances[i].mode, s->options)).deviation_db;
        });
        *out = s.release();
    });
}

isocma_status isocma_sweep_track_count(const isocma_sweep* sweep, int* count) {
    return guard([&] {
        need(sweep, "sweep");
        need(count, "count");
        *count = sweep->sweep.track_count();
    });
}

isocma_status isocma_sweep_sample(const isocma_sweep* sweep, int track, size_t k, double* eigenvalue, double* angle) {
    return guard([&] {
        need(sweep, "sweep");
        if (track < 0 || track >= sweep->sweep.track_count() || k >= sweep->sweep.frequencies.size())
            fail(ErrorCode::InvalidArgument, "track or sample index out of range");
        const auto* m = sweep->sweep.mode(track, k);
        if (!m) fail(ErrorCode::NotFound, "track " + std::to_string(track) + " has no mode at sample " + std::to_string(k));
        if (eigenvalue) *eigenvalue = m->eigenvalue;
        if (angle) *angle = m->angle;
    });
}

isocma_status isocma_sweep_write(const isocma_sweep* sweep, const char* ca, const char* ev) {
    return guard([&] {
        need(sweep, "sweep");
        if (ca) write_file(ca, ca_sweep_csv(sweep->sweep));
        if (ev) write_file(ev, eigenvalue_sweep_csv(sweep->sweep));
    });
}

isocma_status isocma_sweep_resonances(const isocma_sweep* sweep, isocma_resonance* out, size_t capacity,
                                      size_t* count) {
    return guard([&] {
        need(sweep, "sweep");
        if (count) *count = sweep->resonances.size();
        if (capacity > 0) need(out, "out");
        for (size_t i = 0; i < std::min(capacity, sweep->resonances.size()); ++i) {
            const auto& r = sweep->resonances[i];
            out[i] = {r.track, r.frequency, r.parity, r.mode.eigenvalue, sweep->deviations[i]};
        }
    });
}

isocma_status isocma_sweep_write_eigencurrent(const isocma_sweep* sweep, size_t i, const char* path) {
    return guard([&] {
        need(sweep, "sweep");
        need(path, "path");
        if (i >= sweep->resonances.size()) fail(ErrorCode::InvalidArgument, "resonance index out of range");
        write_file(path, eigencurrent_csv(sweep->mesh, sweep->resonances[i].mode));
    });
}

void isocma_sweep_free(isocma_sweep* sweep) { delete sweep; }

// ---- far field

isocma_status isocma_pattern_driven(const isocma_mesh* mesh, double frequency, const isocma_config* config,
                                    double step, isocma_pattern** out) {
    return guard([&] {
        need(mesh, "mesh");
        need(out, "out");
        const isocma_config c = config_or_default(config);
        frequencies(&frequency, 1);
        const SegmentMesh m = refined(mesh->mesh, frequency, c);
        const double fs = FrequencyScale{c.eps_eff}.to_solver(frequency);
        const DrivenSolution s = solve_driven(assemble_loaded(m, fs, ExecPolicy{c.jobs}), m, 1.0, c.z0);
        const BasisSet basis(m);
        auto p = std::make_unique<isocma_pattern>();
        p->grid = radiate(m, basis, s.current, fs, GridSpec{step, step}, ExecPolicy{c.jobs});
        p->grid.frequency = frequency;
        p->accepted_power = s.accepted_power;
        *out = p.release();
    });
}

isocma_status isocma_pattern_mode(const isocma_mesh* mesh, double frequency, int mode, const isocma_config* config,
                                  double step, isocma_pattern** out) {
    return guard([&] {
        need(mesh, "mesh");
        need(out, "out");
        const isocma_config c = config_or_default(config);
        frequencies(&frequency, 1);
        const SegmentMesh m = refined(mesh->mesh, frequency, c);
        SweepOptions so = sweep_options(c);
        so.n_modes = std::max(so.n_modes, mode + 1);
        const ModeSet set = modes_at(m, frequency, so);
        if (mode < 0 || mode >= static_cast<int>(set.modes.size()))
            fail(ErrorCode::NotFound, "mode " + std::to_string(mode) + " not available");
        auto p = std::make_unique<isocma_pattern>();
        p->grid = modal_pattern(m, set.modes[mode], so, GridSpec{step, step});
        *out = p.release();
    });
}

isocma_status isocma_pattern_deviation(const isocma_pattern* pattern, isocma_deviation* out) {
    return guard([&] {
        need(pattern, "pattern");
        need(out, "out");
        const DeviationReport r = pattern->accepted_power > 0.0 ? gain_deviation(pattern->grid, pattern->accepted_power)
                                                                : directivity_deviation(pattern->grid);
        *out = {pattern->grid.frequency, r.max_db, r.min_db, r.deviation_db, r.kind == DeviationKind::Gain};
    });
}

isocma_status isocma_pattern_mean_directivity(const isocma_pattern* pattern, double* mean) {
    return guard([&] {
        need(pattern, "pattern");
        need(mean, "mean");
        *mean = pattern->grid.mean_directivity();
    });
}

isocma_status isocma_pattern_directivity_dbi(const isocma_pattern* pattern, double theta, double phi, double* d) {
    return guard([&] {
        need(pattern, "pattern");
        need(d, "d_dbi");
        const auto [it, ip] = pattern->grid.nearest(theta, phi);
        *d = pattern->grid.directivity_dbi(it, ip);
    });
}

isocma_status isocma_pattern_write(const isocma_pattern* pattern, const char* path) {
    return guard([&] {
        need(pattern, "pattern");
        need(path, "path");
        write_file(path, pattern_csv(pattern->grid));
    });
}

isocma_status isocma_write_deviation_csv(const isocma_deviation* reports, size_t count, const char* path) {
    return guard([&] {
        need(reports, "reports");
        need(path, "path");
        std::vector<DeviationReport> rs;
        for (size_t i = 0; i < count; ++i) {
            const auto& r = reports[i];
            rs.push_back({r.frequency, r.max_db, r.min_db, r.deviation_db,
                          r.is_gain ? DeviationKind::Gain : DeviationKind::Directivity});
        }
        write_file(path, deviation_csv(rs));
    });
}

void isocma_pattern_free(isocma_pattern* pattern) { delete pattern; }

// ---- link

void isocma_link_config_default(isocma_link_config* c) {
    if (!c) return;
    const LinkConfig d;
    c->modulation = "QPSK";
    c->symbol_count = d.symbol_count;
    c->tx_power_dbm = d.tx_power_dbm;
    c->range_m = d.range_m;
    c->noise_floor_dbm = d.noise_floor_dbm;
    c->seed = d.seed;
    c->direction = "+X";
}

isocma_status isocma_link_simulate(const isocma_pattern* pattern, const isocma_link_config* config,
                                   const char* constellation, isocma_link_result* out) {
    return guard([&] {
        need(pattern, "pattern");
        need(config, "config");
        need(out, "out");
        need(config->modulation, "modulation");
        need(config->direction, "direction");
        LinkConfig c;
        c.modulation = parse_modulation(config->modulation);
        c.symbol_count = config->symbol_count;
        c.tx_power_dbm = config->tx_power_dbm;
        c.range_m = config->range_m;
        c.noise_floor_dbm = config->noise_floor_dbm;
        c.seed = config->seed;
        c.direction = parse_direction(config->direction);
        if (c.symbol_count < 1000) fail(ErrorCode::InvalidArgument, "symbol_count must be at least 1000");
        std::optional<double> pa;
        if (pattern->accepted_power > 0.0) pa = pattern->accepted_power;
        const LinkResult r = simulate_link(pattern->grid, c, pa);
        if (constellation) write_file(constellation, constellation_csv(r));
        *out = {r.snr_db, r.gain_dbi, r.path_loss_db, r.evm_pct};
    });
}

isocma_status isocma_awgn_evm(const char* modulation, int count, double snr_db, uint64_t seed, double* evm_pct) {
    return guard([&] {
        need(modulation, "modulation");
        need(evm_pct, "evm_pct");
        *evm_pct = simulate_awgn(parse_modulation(modulation), count, snr_db, seed).evm_pct;
    });
}

// ---- design

isocma_status isocma_optimize(const char* problem_json, unsigned jobs, char** report_json, const char* log_path) {
    return guard([&] {
        need(problem_json, "problem_json");
        need(report_json, "report_json");
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(problem_json);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::Io, std::string("malformed design problem: ") + e.what());
        }
        const DesignProblem problem = problem_from_json(doc);
        HDesign base = quad_band_design();
        if (doc.contains("base"))
            for (const auto& [k, v] : doc["base"].items()) base.set(k, v.get<double>());
        AnalysisOptions a;
        if (doc.contains("eps_eff")) a.sweep.scale.eps_eff = doc["eps_eff"].get<double>();
        const DesignReport rep = optimize(problem, h_design_evaluator(base, problem, a), std::max(1u, jobs));
        if (log_path) {
            std::string csv = "index";
            for (const auto& p : problem.parameters) csv += "," + p.name;
            csv += ",objective,failed\n";
            for (const auto& e : rep.log) {
                csv += std::to_string(e.index);
                for (double v : e.params) csv += "," + num(v);
                csv += "," + num(e.value) + "," + (e.failed ? "1" : "0") + "\n";
            }
            write_file(log_path, csv);
        }
        *report_json = dup(report_to_json(problem, rep).dump(2));
    });
}

// ---- reproduction

size_t isocma_case_count(void) { return case_names().size(); }

const char* isocma_case_name(size_t i) {
    static const std::vector<std::string> names = case_names();
    return i < names.size() ? names[i].c_str() : nullptr;
}

isocma_status isocma_reproduce(const char* name, const char* out_dir, unsigned jobs, uint64_t seed, double eps_eff,
                               double z0, isocma_report** out) {
    return guard([&] {
        need(name, "name");
        need(out, "out");
        ReproduceOptions o;
        if (out_dir) o.out_dir = out_dir;
        o.jobs = std::max(1u, jobs);
        o.seed = seed;
        if (eps_eff > 0.0) {
            if (eps_eff < 1.0) fail(ErrorCode::InvalidArgument, "eps_eff must be >= 1");
            o.eps_eff = eps_eff;
        }
        if (!(z0 > 0.0)) fail(ErrorCode::InvalidArgument, "z0 must be positive");
        o.z0 = z0;
        *out = new isocma_report{reproduce_case(name, o)};
    });
}

size_t isocma_report_line_count(const isocma_report* r) { return r ? r->report.lines.size() : 0; }

const char* isocma_report_line(const isocma_report* r, size_t i) {
    return r && i < r->report.lines.size() ? r->report.lines[i].c_str() : nullptr;
}

size_t isocma_report_check_count(const isocma_report* r) { return r ? r->report.checks.size() : 0; }

isocma_status isocma_report_check(const isocma_report* r, size_t i, isocma_check* out) {
    return guard([&] {
        need(r, "report");
        need(out, "out");
        if (i >= r->report.checks.size()) fail(ErrorCode::InvalidArgument, "check index out of range");
        const auto& c = r->report.checks[i];
        *out = {c.name.c_str(), c.value, c.lo, c.hi, c.pass};
    });
}

isocma_status isocma_report_value(const isocma_report* r, const char* key, double* value) {
    return guard([&] {
        need(r, "report");
        need(key, "key");
        need(value, "value");
        *value = r->report.value(key);
    });
}

int isocma_report_passed(const isocma_report* r) { return r && r->report.passed(); }

isocma_status isocma_write_summary(const isocma_report* const* reports, size_t count, const char* path) {
    return guard([&] {
        need(reports, "reports");
        need(path, "path");
        std::vector<CaseReport> rs;
        for (size_t i = 0; i < count; ++i) {
            need(reports[i], "report");
            rs.push_back(reports[i]->report);
        }
        write_file(path, summary_csv(rs));
    });
}

void isocma_report_free(isocma_report* r) { delete r; }

}  // extern "C"
