#ifndef UNITONLAB_H
#define UNITONLAB_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum UnitonStatus {
  UNITON_STATUS_OK = 0,
  UNITON_STATUS_NULL_ARGUMENT = 1,
  UNITON_STATUS_INVALID_UTF8 = 2,
  UNITON_STATUS_PARSE_ERROR = 3,
  UNITON_STATUS_CONSTRAINT_VIOLATED = 4,
  UNITON_STATUS_CELL_VIOLATION = 5,
  UNITON_STATUS_FACTORIZATION_FAILED = 6,
  UNITON_STATUS_NUMERICAL_ERROR = 7,
  UNITON_STATUS_CHECKS_FAILED = 8,
  UNITON_STATUS_PANIC = 9,
} UnitonStatus;

/**
 * Opaque handle around an integrated meromorphic frame.
 */
typedef struct UnitonFrame UnitonFrame;

/**
 * Opaque handle around a validated normalized potential.
 */
typedef struct UnitonPotential UnitonPotential;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; do not free.
 */
const char *uniton_version(void);

/**
 * Last error message for this thread, or NULL. Free with
 * `uniton_string_free`.
 */
char *uniton_last_error_message(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must be a pointer previously returned by a unitonlab function and
 * not yet freed.
 */
void uniton_string_free(char *s);

/**
 * Evaluate the S⁶ Willmore two-sphere family at (z, λ), λ on the unit
 * circle; writes 7 components into `out`.
 *
 * # Safety
 * `out` must point to at least 7 writable doubles.
 */
enum UnitonStatus uniton_s6_eval(double z_re,
                                 double z_im,
                                 double lambda_re,
                                 double lambda_im,
                                 double *out);

/**
 * Parse a potential spec (JSON) into an opaque handle.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string; `out` a writable pointer.
 */
enum UnitonStatus uniton_potential_parse_json(const char *json, struct UnitonPotential **out);

/**
 * Load a built-in potential: "s6-example" or "s4-family".
 *
 * # Safety
 * `name` must be a valid NUL-terminated string; `out` a writable pointer.
 */
enum UnitonStatus uniton_potential_builtin(const char *name, struct UnitonPotential **out);

/**
 * # Safety
 * `p` must come from a `uniton_potential_*` constructor (or be NULL) and
 * not already freed.
 */
void uniton_potential_free(struct UnitonPotential *p);

/**
 * Exact Picard integration of a potential from base point z₀.
 * `max_steps` = 0 uses the potential's nilpotency certificate.
 *
 * # Safety
 * `pot` must be a live potential handle; `out` a writable pointer.
 */
enum UnitonStatus uniton_picard_integrate(const struct UnitonPotential *pot,
                                          double z0_re,
                                          double z0_im,
                                          uintptr_t max_steps,
                                          struct UnitonFrame **out);

/**
 * # Safety
 * `f` must come from `uniton_picard_integrate` (or be NULL) and not
 * already freed.
 */
void uniton_frame_free(struct UnitonFrame *f);

/**
 * Number of Picard steps the integration used.
 *
 * # Safety
 * `f` must be a live frame handle.
 */
uintptr_t uniton_frame_steps(const struct UnitonFrame *f);

/**
 * Serialize a frame to JSON. Free the result with `uniton_string_free`.
 *
 * # Safety
 * `f` must be a live frame handle; `out` a writable pointer.
 */
enum UnitonStatus uniton_frame_to_json(const struct UnitonFrame *f, char **out);

/**
 * Evaluate the frame at z as a loop JSON. Free with `uniton_string_free`.
 *
 * # Safety
 * `f` must be a live frame handle; `out` a writable pointer.
 */
enum UnitonStatus uniton_frame_loop_at(const struct UnitonFrame *f,
                                       double z_re,
                                       double z_im,
                                       char **out);

/**
 * Birkhoff factorization of a loop (JSON in, JSON out). `depth` < 0 picks
 * the default ansatz. Free the result with `uniton_string_free`.
 *
 * # Safety
 * `loop_json` must be a valid NUL-terminated string; `out` writable.
 */
enum UnitonStatus uniton_birkhoff_json(const char *loop_json,
                                       int32_t depth,
                                       double tol,
                                       char **out);

/**
 * Iwasawa factorization of a loop (JSON in, JSON out); `compact` ≠ 0 uses
 * the compact real form. Free the result with `uniton_string_free`.
 *
 * # Safety
 * `loop_json` must be a valid NUL-terminated string; `out` writable.
 */
enum UnitonStatus uniton_iwasawa_json(const char *loop_json,
                                      int32_t compact,
                                      double tol,
                                      char **out);

/**
 * Run the full pipeline from a config JSON; writes the report JSON to
 * `out` (free with `uniton_string_free`). Returns `ChecksFailed` when the
 * run finished but an invariant failed its tolerance.
 *
 * # Safety
 * `config_json` must be a valid NUL-terminated string; `out` writable.
 */
enum UnitonStatus uniton_run_pipeline_json(const char *config_json, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UNITONLAB_H */
