#ifndef GAUGEPROJ_H
#define GAUGEPROJ_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Verdict codes written by [`gp_check_integral_condition`].
 */
#define GP_VERDICT_FINITE 0

#define GP_VERDICT_DIVERGENT 1

#define GP_VERDICT_INCONCLUSIVE 2

typedef enum GpStatus {
  GP_STATUS_OK = 0,
  GP_STATUS_NULL_POINTER = 1,
  GP_STATUS_INVALID_ARGUMENT = 2,
  GP_STATUS_PRECONDITION = 3,
  GP_STATUS_NUMERICAL = 4,
  GP_STATUS_CONFIG = 5,
  GP_STATUS_IO = 6,
  GP_STATUS_UTF8 = 7,
  GP_STATUS_PANIC = 8,
} GpStatus;

/**
 * Opaque gauge function.
 */
typedef struct GpGauge GpGauge;

/**
 * Opaque nested-disc hierarchy.
 */
typedef struct GpHierarchy GpHierarchy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy of the last error message on this thread, or null. Free with
 * [`gp_string_free`].
 */
char *gp_last_error_message(void);

void gp_clear_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void gp_string_free(char *s);

/**
 * `f(r) = r^s`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum GpStatus gp_gauge_power(double s, struct GpGauge **out);

/**
 * Gauge from its JSON form, e.g. `{"family":"logpower","s":2}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum GpStatus gp_gauge_from_json(const char *json, struct GpGauge **out);

/**
 * # Safety
 * `g` must be null or a handle from this library, freed once.
 */
void gp_gauge_free(struct GpGauge *g);

/**
 * `log f(r)` from `log r`.
 *
 * # Safety
 * `g` must be a live handle and `out` a valid pointer.
 */
enum GpStatus gp_gauge_evaluate_log(const struct GpGauge *g, double log_r, double *out);

/**
 * Fitted doubling exponent `s` and constant `kappa`.
 *
 * # Safety
 * `g` must be a live handle; `s` and `kappa` valid pointers.
 */
enum GpStatus gp_gauge_doubling(const struct GpGauge *g, double *s, double *kappa);

/**
 * Integral condition for `(f, g)`; writes a `GP_VERDICT_*` code and the
 * value (infinite or NaN unless finite).
 *
 * # Safety
 * `f`, `g` must be live handles; `verdict`, `value` valid pointers.
 */
enum GpStatus gp_check_integral_condition(const struct GpGauge *f,
                                          const struct GpGauge *g,
                                          int32_t *verdict,
                                          double *value);

/**
 * Derives the schedule and branching for `f` and builds the hierarchy.
 *
 * # Safety
 * `f` must be a live handle and `out` a valid pointer.
 */
enum GpStatus gp_hierarchy_build(const struct GpGauge *f,
                                 size_t depth,
                                 uint64_t disc_cap,
                                 struct GpHierarchy **out);

/**
 * # Safety
 * `h` must be null or a handle from this library, freed once.
 */
void gp_hierarchy_free(struct GpHierarchy *h);

/**
 * Depth of the hierarchy, 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t gp_hierarchy_depth(const struct GpHierarchy *h);

/**
 * Number of discs at `level`, saturated at `u64::MAX`.
 *
 * # Safety
 * `h` must be a live handle and `out` a valid pointer.
 */
enum GpStatus gp_hierarchy_disc_count(const struct GpHierarchy *h, size_t level, uint64_t *out);

/**
 * Runs every construction check; writes the number of checks and failures.
 *
 * # Safety
 * `h` must be a live handle; `checks` and `failures` valid pointers.
 */
enum GpStatus gp_hierarchy_validate(const struct GpHierarchy *h,
                                    uint64_t *checks,
                                    uint64_t *failures);

/**
 * JSON description of the hierarchy with centers for at most `max_discs`
 * discs. Free the result with [`gp_string_free`].
 *
 * # Safety
 * `h` must be a live handle and `out` a valid pointer.
 */
enum GpStatus gp_hierarchy_to_json(const struct GpHierarchy *h, uint64_t max_discs, char **out);

/**
 * Runs the full pipeline on a JSON configuration without writing files.
 * Writes the summary JSON and the process exit code the CLI would use.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `summary` and
 * `exit_code` valid pointers.
 */
enum GpStatus gp_run_pipeline(const char *config_json, char **summary, int32_t *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GAUGEPROJ_H */
