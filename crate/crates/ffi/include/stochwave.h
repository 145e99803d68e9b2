#ifndef STOCHWAVE_H
#define STOCHWAVE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SwStatus {
  SW_STATUS_OK = 0,
  SW_STATUS_NULL_POINTER = 1,
  SW_STATUS_INVALID_UTF8 = 2,
  SW_STATUS_CONFIG = 3,
  SW_STATUS_DOMAIN = 4,
  SW_STATUS_OUT_OF_RANGE = 5,
  SW_STATUS_NUMERICAL = 6,
  SW_STATUS_IO = 7,
  SW_STATUS_PANIC = 8,
} SwStatus;

/**
 * Opaque experiment configuration.
 */
typedef struct SwConfig SwConfig;

/**
 * Opaque record of one simulated path.
 */
typedef struct SwPath SwPath;

/**
 * Opaque result of an alpha sweep.
 */
typedef struct SwSweep SwSweep;

/**
 * Scalar outcome of a path.
 */
typedef struct SwPathSummary {
  uint64_t seed;
  double alpha;
  bool hit;
  double tau_hat;
  double min_over_run;
  double singular_integral;
  double log_weight;
  bool invalid;
  size_t steps;
} SwPathSummary;

typedef struct SwSweepRow {
  double alpha;
  size_t n_paths;
  size_t n_hit;
  double p_hat;
  double ci_lo;
  double ci_hi;
  double mean_tau;
  size_t invalid_count;
} SwSweepRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t sw_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sw_version(void);

/**
 * Parses a `key = value` config; a null `text` yields the defaults.
 *
 * # Safety
 * `text` must be null or a NUL-terminated string; `out` must be writable.
 */
enum SwStatus sw_config_parse(const char *text, struct SwConfig **out);

/**
 * # Safety
 * `cfg` must be null or a handle from [`sw_config_parse`] not yet freed.
 */
void sw_config_free(struct SwConfig *cfg);

/**
 * Overrides the number of paths per alpha.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum SwStatus sw_config_set_n_paths(struct SwConfig *cfg, size_t n_paths);

/**
 * Replaces the sweep's alpha list.
 *
 * # Safety
 * `cfg` must be a live handle and `alphas` must point to `len` doubles.
 */
enum SwStatus sw_config_set_alpha_list(struct SwConfig *cfg, const double *alphas, size_t len);

/**
 * Simulates one path at `alpha` with the given seed.
 *
 * # Safety
 * `cfg` must be a live handle; `out` must be writable.
 */
enum SwStatus sw_run_path(const struct SwConfig *cfg,
                          double alpha,
                          uint64_t seed,
                          struct SwPath **out);

/**
 * # Safety
 * `path` must be null or a live handle.
 */
void sw_path_free(struct SwPath *path);

/**
 * # Safety
 * `path` must be a live handle; `out` must be writable.
 */
enum SwStatus sw_path_summary(const struct SwPath *path, struct SwPathSummary *out);

/**
 * Copies up to `len` per-step minima into `buf`; `*written` receives the
 * number copied. Pass a null `buf` to query the count.
 *
 * # Safety
 * `path` must be a live handle, `buf` null or `len` writable doubles,
 * `written` writable.
 */
enum SwStatus sw_path_minima(const struct SwPath *path, double *buf, size_t len, size_t *written);

/**
 * Runs the configured sweep on `workers` threads (0 = available parallelism).
 *
 * # Safety
 * `cfg` must be a live handle; `out` must be writable.
 */
enum SwStatus sw_run_sweep(const struct SwConfig *cfg, size_t workers, struct SwSweep **out);

/**
 * # Safety
 * `sweep` must be null or a live handle.
 */
void sw_sweep_free(struct SwSweep *sweep);

/**
 * Number of alpha rows; 0 for a null handle.
 *
 * # Safety
 * `sweep` must be null or a live handle.
 */
size_t sw_sweep_len(const struct SwSweep *sweep);

/**
 * # Safety
 * `sweep` must be a live handle; `out` must be writable.
 */
enum SwStatus sw_sweep_row(const struct SwSweep *sweep, size_t index, struct SwSweepRow *out);

/**
 * Periodic wave kernel `S_I(t, x)` on a circle of length `length`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SwStatus sw_circle_kernel(double t, double x, double length, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum SwStatus sw_kernel_space_integral(double t, double length, double *out);

/**
 * 95% Wilson interval for `k` successes out of `n`.
 *
 * # Safety
 * `lo` and `hi` must be writable.
 */
enum SwStatus sw_wilson_interval(size_t k, size_t n, double *lo, double *hi);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STOCHWAVE_H */
