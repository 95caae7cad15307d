#ifndef TWOSCALE_H
#define TWOSCALE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>
#include <stddef.h>
#include <stdint.h>

typedef enum TsStatus {
  TS_STATUS_OK = 0,
  TS_STATUS_NULL_POINTER = 1,
  TS_STATUS_INVALID_INPUT = 2,
  TS_STATUS_FACTORIZATION = 3,
  TS_STATUS_NON_FINITE = 4,
  TS_STATUS_QUADRATURE_NOT_CONVERGED = 5,
  TS_STATUS_IO = 6,
  TS_STATUS_BUFFER_TOO_SMALL = 7,
  TS_STATUS_OUT_OF_RANGE = 8,
  TS_STATUS_PANIC = 9,
} TsStatus;

typedef enum TsPreset {
  // Indicator initial value, no source.
  TS_PRESET_A = 0,
  // Zero initial value, singular source.
  TS_PRESET_B = 1,
} TsPreset;

typedef enum TsVary {
  TS_VARY_SPATIAL = 0,
  TS_VARY_TEMPORAL = 1,
} TsVary;

typedef struct TsProblem TsProblem;

typedef struct TsReport TsReport;

typedef struct TsTrajectory TsTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error of this thread into `buf` (NUL terminated, truncated
// to `len`) and returns the full message length excluding the NUL. Returns 0
// when no error is pending.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
uintptr_t ts_last_error_message(char *buf, uintptr_t len);

// E_α(−x) for 0 < α < 1 and x ≥ 0.
//
// # Safety
// `out` must be valid for a write.
enum TsStatus ts_mittag_leffler(double alpha, double x, double *out);

// L1 weights for `m` steps: `b` receives b_0..b_{m−1}, `d` the scaled
// differences d_0..d_{m−1}. Either buffer may be null to skip it.
//
// # Safety
// Non-null buffers must hold `len` doubles.
enum TsStatus ts_l1_weights(double alpha,
                            double tau,
                            uintptr_t m,
                            double *b,
                            double *d,
                            uintptr_t len);

// Creates one of the two built-in problems on (0, 1) with T = 1.
//
// # Safety
// `out` must be valid for a write. The handle must be released with
// [`ts_problem_free`].
enum TsStatus ts_problem_preset(enum TsPreset preset,
                                double alpha,
                                double s,
                                struct TsProblem **out);

// # Safety
// `p` must be null or a handle from [`ts_problem_preset`] not yet freed.
void ts_problem_free(struct TsProblem *p);

// Solves with `n` elements and `m` steps. With `all_snapshots` nonzero every
// time level is kept, otherwise only the initial and final ones.
//
// # Safety
// `problem` must be a live handle and `out` valid for a write. Release the
// result with [`ts_trajectory_free`].
enum TsStatus ts_solve(const struct TsProblem *problem,
                       uintptr_t n,
                       uintptr_t m,
                       int32_t all_snapshots,
                       struct TsTrajectory **out);

// # Safety
// `t` must be null or a live trajectory handle.
void ts_trajectory_free(struct TsTrajectory *t);

// Number of stored snapshots.
//
// # Safety
// `t` must be a live handle and `out` valid for a write.
enum TsStatus ts_trajectory_snapshot_count(const struct TsTrajectory *t, uintptr_t *out);

// Interior unknowns per snapshot (N − 1).
//
// # Safety
// `t` must be a live handle and `out` valid for a write.
enum TsStatus ts_trajectory_dofs(const struct TsTrajectory *t, uintptr_t *out);

// Time and interior nodal values of snapshot `k`. `values` must hold at
// least [`ts_trajectory_dofs`] doubles.
//
// # Safety
// `t` must be a live handle, `time` valid for a write, `values` valid for
// `len` doubles.
enum TsStatus ts_trajectory_snapshot(const struct TsTrajectory *t,
                                     uintptr_t k,
                                     double *time,
                                     double *values,
                                     uintptr_t len);

// Self-refinement study. `levels` lists `n_levels` doubling resolutions on the
// varied axis, `fixed` the other one. `rho` selects the Ĥ^ρ norm; pass NaN
// for L².
//
// # Safety
// `problem` must be a live handle, `levels` valid for `n_levels` reads and
// `out` valid for a write. Release the result with [`ts_report_free`].
enum TsStatus ts_run_study(const struct TsProblem *problem,
                           enum TsVary vary,
                           const uintptr_t *levels,
                           uintptr_t n_levels,
                           uintptr_t fixed,
                           double rho,
                           struct TsReport **out);

// Number of rows of a built-in table (1 through 8).
//
// # Safety
// `out` must be valid for a write.
enum TsStatus ts_table_rows(uint8_t number, uintptr_t *out);

// Runs row `row` of built-in table `number`.
//
// # Safety
// `out` must be valid for a write. Release the result with [`ts_report_free`].
enum TsStatus ts_run_table_row(uint8_t number, uintptr_t row, struct TsReport **out);

// # Safety
// `r` must be null or a live report handle.
void ts_report_free(struct TsReport *r);

// (α, s) of the study.
//
// # Safety
// `r` must be a live handle; `alpha` and `s` valid for writes.
enum TsStatus ts_report_orders(const struct TsReport *r, double *alpha, double *s);

// Number of errors; there is one rate fewer.
//
// # Safety
// `r` must be a live handle and `out` valid for a write.
enum TsStatus ts_report_len(const struct TsReport *r, uintptr_t *out);

// # Safety
// `r` must be a live handle and `buf` valid for `len` doubles.
enum TsStatus ts_report_errors(const struct TsReport *r, double *buf, uintptr_t len);

// # Safety
// `r` must be a live handle and `buf` valid for `len` doubles.
enum TsStatus ts_report_rates(const struct TsReport *r, double *buf, uintptr_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TWOSCALE_H */
