/* C interface to the springy-billiards engine.
 *
 * All entry points are thread-compatible: distinct handles may be used from
 * distinct threads. Functions that can fail return an sb_status and, when an
 * err buffer is supplied, a NUL-terminated message describing the failure.
 */
#ifndef SPRINGY_BILLIARDS_H
#define SPRINGY_BILLIARDS_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sb_status {
    SB_OK = 0,
    SB_ERROR_CONFIG = 2,  /* invalid configuration or arguments */
    SB_ERROR_RUNTIME = 3, /* simulation or I/O failure */
} sb_status;

typedef struct sb_config sb_config;

const char* sb_version(void);

/* geometry_kind: "rob", "stadium" or "mushroom" (published parameter values
 * are the defaults). Returns NULL for an unknown kind. */
sb_config* sb_config_create(const char* geometry_kind);

/* Parse a run-configuration file. Returns NULL on failure. */
sb_config* sb_config_load(const char* path, char* err, size_t err_len);

/* Override one value, addressed as "section.key" (e.g. "ensemble.m"). */
sb_status sb_config_set(sb_config* cfg, const char* key, const char* value,
                        char* err, size_t err_len);

sb_status sb_config_validate(const sb_config* cfg, char* err, size_t err_len);

/* Render the configuration in the file format. Returns the number of bytes
 * that would be written; truncates if buf is too small. buf may be NULL. */
size_t sb_config_dump(const sb_config* cfg, char* buf, size_t buf_len);

void sb_config_free(sb_config* cfg);

/* Ensemble run: writes series_run<k>.csv per run plus summary.json. */
sb_status sb_run_simulate(const sb_config* cfg, const char* out_dir, char* err,
                          size_t err_len);

/* Single trajectory / realization with the invariant column. */
sb_status sb_run_trace(const sb_config* cfg, const char* out_csv, char* err,
                       size_t err_len);

/* Fit equilibration rates for the given series files; aggregate by (m, eb0).
 * fallback_bar_period is used for files without a neighbouring summary.json
 * (pass 0 to require metadata). */
sb_status sb_fit_rates(const char* const* series_csvs, size_t n_files,
                       const char* out_csv, double fallback_bar_period, char* err,
                       size_t err_len);

/* Linear fit of rate against sqrt(m); out_svg may be NULL. */
sb_status sb_extrapolate(const char* rates_csv, const char* out_json,
                         const char* out_svg, char* err, size_t err_len);

/* Per-segment invariant drift report for an existing trace. */
sb_status sb_invariant_report(const sb_config* cfg, const char* trace_csv,
                              const char* out_json, char* err, size_t err_len);

/* Elastic exchange of vertical velocities at a bar impact. */
sb_status sb_collision(double v_p, double v_b, double mass_ratio, double* v_p_out,
                       double* v_b_out);

/* Pressure-equilibrium bar position of a mushroom/stadium configuration. */
sb_status sb_pressure_equilibrium(const sb_config* cfg, double* y_f_out, char* err,
                                  size_t err_len);

#ifdef __cplusplus
}
#endif

#endif /* SPRINGY_BILLIARDS_H */
