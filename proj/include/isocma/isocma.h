/* SPDX-License-Identifier: Apache-2.0 */
/*
 * C interface to the isocma solver. Objects are opaque handles released with
 * their matching *_free function. Every call returns an isocma_status; on
 * failure isocma_last_error() describes the problem (per thread, valid until
 * the next failing call on that thread). Strings returned through char**
 * are released with isocma_string_free.
 */
#ifndef ISOCMA_H
#define ISOCMA_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ISOCMA_API __declspec(dllexport)
#else
#define ISOCMA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum isocma_status {
    ISOCMA_OK = 0,
    ISOCMA_INVALID_ARGUMENT = 1,
    ISOCMA_VALIDATION = 2,
    ISOCMA_NUMERICAL = 3,
    ISOCMA_NOT_FOUND = 4,
    ISOCMA_IO = 5,
    ISOCMA_INTERNAL = 99
} isocma_status;

ISOCMA_API const char* isocma_version(void);
ISOCMA_API const char* isocma_last_error(void);
ISOCMA_API const char* isocma_status_name(isocma_status status);
ISOCMA_API void isocma_string_free(char* s);

/* ---- meshes ---- */

typedef struct isocma_mesh isocma_mesh;

typedef struct isocma_radiator_params {
    double arm_length;       /* m */
    double arm_spacing;      /* m */
    double strip_width;      /* m */
    double rhombus_diagonal; /* m */
    double inductor_value;   /* H, 0 for none */
    double inductor_offset;  /* m from the arm tip */
    double feed_gap;         /* m */
} isocma_radiator_params;

enum { ISOCMA_BOTTOM_STRIP = 0, ISOCMA_BOTTOM_RHOMBUS = 1 };

ISOCMA_API isocma_status isocma_mesh_build_u(const isocma_radiator_params* params, int bottom, int feed,
                                             isocma_mesh** out);
ISOCMA_API isocma_status isocma_mesh_build_h(const isocma_radiator_params* pairs, size_t n_pairs,
                                             double rhombus_diagonal, double feed_gap, int bottom, int feed,
                                             isocma_mesh** out);
ISOCMA_API isocma_status isocma_mesh_build_dipole(double length, double radius, int segments, int feed,
                                                  isocma_mesh** out);
/* "quad-band", "u-unloaded", "u-loaded", or "purification:<AL2 in mm>". */
ISOCMA_API isocma_status isocma_mesh_preset(const char* name, isocma_mesh** out);
ISOCMA_API isocma_status isocma_mesh_from_json(const char* json, isocma_mesh** out);
ISOCMA_API isocma_status isocma_mesh_load(const char* path, isocma_mesh** out);
ISOCMA_API isocma_status isocma_mesh_save(const isocma_mesh* mesh, const char* path);
ISOCMA_API isocma_status isocma_mesh_to_json(const isocma_mesh* mesh, char** out);
ISOCMA_API isocma_status isocma_mesh_discretize(const isocma_mesh* mesh, double f_max, int segments_per_wavelength,
                                                isocma_mesh** out);
ISOCMA_API isocma_status isocma_mesh_counts(const isocma_mesh* mesh, size_t* nodes, size_t* segments, size_t* loads,
                                            int* has_port);
ISOCMA_API void isocma_mesh_free(isocma_mesh* mesh);

/* ---- solver settings ---- */

typedef struct isocma_config {
    double eps_eff;  /* frequency relabelling, >= 1 */
    double z0;       /* reference impedance, ohm */
    unsigned jobs;   /* worker threads, >= 1 */
    int n_modes;     /* characteristic modes kept per frequency */
    int segments_per_wavelength; /* applied at the top analysis frequency */
} isocma_config;

ISOCMA_API void isocma_config_default(isocma_config* config);

/* ---- driven port ---- */

typedef struct isocma_port_result {
    double frequency;
    double zin_re, zin_im;           /* bare structure */
    double zin_matched_re, zin_matched_im; /* after the series capacitor */
    double s11_re, s11_im, s11_db;   /* of the matched impedance */
    double accepted_power;           /* W for a 1 V gap */
} isocma_port_result;

/* Drives the mesh port at each reported frequency; series_capacitance <= 0 means none. */
ISOCMA_API isocma_status isocma_drive_sweep(const isocma_mesh* mesh, const double* frequencies, size_t count,
                                            const isocma_config* config, double series_capacitance,
                                            isocma_port_result* results);
/* Writes CSV (f_Hz,ReZin_ohm,ImZin_ohm,S11_dB), matching CSV and Touchstone files; any path may be NULL. */
ISOCMA_API isocma_status isocma_write_port_files(const isocma_port_result* results, size_t count, double z0,
                                                 const char* csv_path, const char* matching_path,
                                                 const char* s1p_path);

/* ---- characteristic modes ---- */

typedef struct isocma_sweep isocma_sweep;

typedef struct isocma_resonance {
    int track;
    double frequency;
    double parity;        /* +1 even, -1 odd under the mirror plane, 0 unknown */
    double eigenvalue;
    double deviation_db;  /* modal directivity deviation at the resonance */
} isocma_resonance;

/* Discretizes the mesh at the top frequency, then decomposes and tracks. */
ISOCMA_API isocma_status isocma_cma_sweep(const isocma_mesh* mesh, const double* frequencies, size_t count,
                                          const isocma_config* config, isocma_sweep** out);
ISOCMA_API isocma_status isocma_sweep_track_count(const isocma_sweep* sweep, int* count);
/* ISOCMA_NOT_FOUND when the track has no mode at sample k. */
ISOCMA_API isocma_status isocma_sweep_sample(const isocma_sweep* sweep, int track, size_t k, double* eigenvalue,
                                             double* angle_deg);
ISOCMA_API isocma_status isocma_sweep_write(const isocma_sweep* sweep, const char* ca_csv_path,
                                            const char* eigenvalue_csv_path);
/* Refined resonances of every track; `count` receives the total, at most `capacity` are written. */
ISOCMA_API isocma_status isocma_sweep_resonances(const isocma_sweep* sweep, isocma_resonance* out, size_t capacity,
                                                 size_t* count);
/* Eigencurrent of the i-th resonance (as ordered by isocma_sweep_resonances) keyed by segment centres. */
ISOCMA_API isocma_status isocma_sweep_write_eigencurrent(const isocma_sweep* sweep, size_t resonance,
                                                         const char* path);
ISOCMA_API void isocma_sweep_free(isocma_sweep* sweep);

/* ---- far field ---- */

typedef struct isocma_pattern isocma_pattern;

typedef struct isocma_deviation {
    double frequency;
    double max_db, min_db, deviation_db;
    int is_gain; /* 1 gain deviation (driven), 0 directivity deviation (modal) */
} isocma_deviation;

/* Driven pattern at one frequency (1 V gap). */
ISOCMA_API isocma_status isocma_pattern_driven(const isocma_mesh* mesh, double frequency, const isocma_config* config,
                                               double step_deg, isocma_pattern** out);
/* Pattern of the characteristic mode with index `mode` (ascending |lambda|) at `frequency`. */
ISOCMA_API isocma_status isocma_pattern_mode(const isocma_mesh* mesh, double frequency, int mode,
                                             const isocma_config* config, double step_deg, isocma_pattern** out);
ISOCMA_API isocma_status isocma_pattern_deviation(const isocma_pattern* pattern, isocma_deviation* out);
ISOCMA_API isocma_status isocma_pattern_mean_directivity(const isocma_pattern* pattern, double* mean);
ISOCMA_API isocma_status isocma_pattern_directivity_dbi(const isocma_pattern* pattern, double theta_deg,
                                                        double phi_deg, double* d_dbi);
ISOCMA_API isocma_status isocma_pattern_write(const isocma_pattern* pattern, const char* path);
ISOCMA_API isocma_status isocma_write_deviation_csv(const isocma_deviation* reports, size_t count, const char* path);
ISOCMA_API void isocma_pattern_free(isocma_pattern* pattern);

/* ---- link ---- */

typedef struct isocma_link_config {
    const char* modulation; /* "QPSK" or "16QAM" */
    int symbol_count;
    double tx_power_dbm;
    double range_m;
    double noise_floor_dbm;
    uint64_t seed;
    const char* direction;  /* "+X" ... "-Z" or "theta,phi" */
} isocma_link_config;

typedef struct isocma_link_result {
    double snr_db, gain_dbi, path_loss_db, evm_pct;
} isocma_link_result;

ISOCMA_API void isocma_link_config_default(isocma_link_config* config);
/* Gain uses the accepted power for driven patterns, directivity otherwise.
 * The received constellation is written to constellation_path unless NULL. */
ISOCMA_API isocma_status isocma_link_simulate(const isocma_pattern* pattern, const isocma_link_config* config,
                                              const char* constellation_path, isocma_link_result* out);
ISOCMA_API isocma_status isocma_awgn_evm(const char* modulation, int symbol_count, double snr_db, uint64_t seed,
                                         double* evm_pct);

/* ---- design ---- */

/* Optimizes the quad-band H design (optionally overridden by a "base" object
 * of symbol -> value in the problem) and returns the report JSON. The
 * evaluation log is written as CSV unless log_path is NULL. */
ISOCMA_API isocma_status isocma_optimize(const char* problem_json, unsigned jobs, char** report_json,
                                         const char* log_path);

/* ---- reproduction cases ---- */

typedef struct isocma_report isocma_report;

typedef struct isocma_check {
    const char* name;
    double value, lo, hi;
    int pass;
} isocma_check;

/* Case names are listed by isocma_case_name(i) for i < isocma_case_count().
 * out_dir may be NULL (nothing written); eps_eff <= 0 lets the case choose. */
ISOCMA_API size_t isocma_case_count(void);
ISOCMA_API const char* isocma_case_name(size_t i);
ISOCMA_API isocma_status isocma_reproduce(const char* name, const char* out_dir, unsigned jobs, uint64_t seed,
                                          double eps_eff, double z0, isocma_report** out);
ISOCMA_API size_t isocma_report_line_count(const isocma_report* report);
ISOCMA_API const char* isocma_report_line(const isocma_report* report, size_t i);
ISOCMA_API size_t isocma_report_check_count(const isocma_report* report);
ISOCMA_API isocma_status isocma_report_check(const isocma_report* report, size_t i, isocma_check* out);
ISOCMA_API isocma_status isocma_report_value(const isocma_report* report, const char* key, double* value);
ISOCMA_API int isocma_report_passed(const isocma_report* report);
/* summary CSV over several reports (case, check, value, lo, hi, pass). */
ISOCMA_API isocma_status isocma_write_summary(const isocma_report* const* reports, size_t count, const char* path);
ISOCMA_API void isocma_report_free(isocma_report* report);

#ifdef __cplusplus
}
#endif

#endif /* ISOCMA_H */
