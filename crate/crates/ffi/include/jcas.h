#ifndef JCAS_H
#define JCAS_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Interpretation of a channel spec.
 */
typedef enum JcasMode {
  JCAS_MODE_MONO_STATIC = 0,
  JCAS_MODE_BI_STATIC = 1,
} JcasMode;

/**
 * Which bi-static exponent to compute.
 */
typedef enum JcasRhoKind {
  JCAS_RHO_KIND_SUCCESSIVE = 0,
  JCAS_RHO_KIND_JOINT = 1,
  JCAS_RHO_KIND_JOINT_LOWER_BOUND = 2,
} JcasRhoKind;

/**
 * Status codes returned by every fallible function.
 */
typedef enum JcasStatus {
  JCAS_STATUS_OK = 0,
  JCAS_STATUS_NULL_POINTER = 1,
  JCAS_STATUS_INVALID_UTF8 = 2,
  JCAS_STATUS_INVALID_SPEC = 3,
  JCAS_STATUS_INVALID_ARGUMENT = 4,
  JCAS_STATUS_UNSUPPORTED = 5,
  JCAS_STATUS_INSUFFICIENT_DATA = 6,
  JCAS_STATUS_NON_CONVERGENCE = 7,
  JCAS_STATUS_IO = 8,
  JCAS_STATUS_PANIC = 9,
} JcasStatus;

/**
 * Opaque channel family.
 */
typedef struct JcasChannel JcasChannel;

/**
 * Opaque region curve.
 */
typedef struct JcasCurve JcasCurve;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null when the last
 * call succeeded. The pointer stays valid until the next call into the
 * library on the same thread.
 */
const char *jcas_last_error(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must be null or come from this library and not have been freed.
 */
void jcas_string_free(char *s);

/**
 * Parse a JSON channel spec.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum JcasStatus jcas_channel_from_json(const char *json,
                                       enum JcasMode mode,
                                       struct JcasChannel **out_channel);

/**
 * # Safety
 * `channel` must be null or a live handle from [`jcas_channel_from_json`].
 */
void jcas_channel_free(struct JcasChannel *channel);

/**
 * Alphabet and state counts. Any out-pointer may be null.
 *
 * # Safety
 * `channel` must be a live handle.
 */
enum JcasStatus jcas_channel_dims(const struct JcasChannel *channel,
                                  size_t *x_size,
                                  size_t *y_size,
                                  size_t *z_size,
                                  size_t *num_states);

/**
 * Detection exponent `φ(P_X)` for an input distribution of length `|X|`.
 *
 * # Safety
 * `channel` must be a live handle, `p_x` must point to `len` doubles.
 */
enum JcasStatus jcas_phi(const struct JcasChannel *channel,
                         const double *p_x,
                         size_t len,
                         double tol,
                         double *out_value);

/**
 * Compound capacity `max_P min_s I(P, W_s)`; `argmax` may be null,
 * otherwise it receives `|X|` doubles.
 *
 * # Safety
 * `channel` must be a live handle; `argmax`, when non-null, must hold `|X|` doubles.
 */
enum JcasStatus jcas_compound_capacity(const struct JcasChannel *channel,
                                       size_t resolution,
                                       double *out_value,
                                       double *argmax);

/**
 * `min_s C(W_s)`.
 *
 * # Safety
 * `channel` must be a live handle.
 */
enum JcasStatus jcas_worst_case_capacity(const struct JcasChannel *channel, double *out_value);

/**
 * Bi-static exponent at rate `rate`. `row_grid == 0` selects the default grid.
 *
 * # Safety
 * `channel` must be a live handle, `p_x` must point to `len` doubles.
 */
enum JcasStatus jcas_rho(const struct JcasChannel *channel,
                         enum JcasRhoKind kind,
                         const double *p_x,
                         size_t len,
                         double rate,
                         size_t row_grid,
                         double *out_value);

/**
 * Whether every sensing kernel is output-symmetric within `tol`.
 *
 * # Safety
 * `channel` must be a live handle.
 */
enum JcasStatus jcas_check_symmetry(const struct JcasChannel *channel,
                                    double tol,
                                    bool *out_symmetric);

/**
 * Open-loop mono-static frontier. `resolution == 0` selects the default.
 *
 * # Safety
 * `channel` must be a live handle; `out_curve` must be writable.
 */
enum JcasStatus jcas_region_mono_open(const struct JcasChannel *channel,
                                      size_t resolution,
                                      struct JcasCurve **out_curve);

/**
 * Closed-loop mono-static inner bound sampled at `e_samples` exponents.
 *
 * # Safety
 * `channel` must be a live handle; `out_curve` must be writable.
 */
enum JcasStatus jcas_region_mono_closed(const struct JcasChannel *channel,
                                        size_t resolution,
                                        size_t e_samples,
                                        struct JcasCurve **out_curve);

/**
 * Number of points on a curve; 0 for a null handle.
 *
 * # Safety
 * `curve` must be null or a live handle.
 */
size_t jcas_curve_len(const struct JcasCurve *curve);

/**
 * Point `index` as `(E, R)` in nats.
 *
 * # Safety
 * `curve` must be a live handle.
 */
enum JcasStatus jcas_curve_point(const struct JcasCurve *curve,
                                 size_t index,
                                 double *out_exponent,
                                 double *out_rate);

/**
 * Curve as CSV; free with [`jcas_string_free`].
 *
 * # Safety
 * `curve` must be a live handle; `out_csv` must be writable.
 */
enum JcasStatus jcas_curve_to_csv(const struct JcasCurve *curve, char **out_csv);

/**
 * # Safety
 * `curve` must be null or a live handle.
 */
void jcas_curve_free(struct JcasCurve *curve);

/**
 * Open-loop mono-static simulation. Writes the report CSV to `out_csv`
 * (free with [`jcas_string_free`]) and the fitted exponent to
 * `out_exponent`: `INFINITY` when no detection error occurred, `NAN` when
 * too few block lengths had enough errors. Runs on the calling thread's
 * rayon pool.
 *
 * # Safety
 * `channel` must be a live handle; `p_type` must point to `type_len`
 * doubles and `n_list` to `n_len` sizes.
 */
enum JcasStatus jcas_simulate_mono(const struct JcasChannel *channel,
                                   const double *p_type,
                                   size_t type_len,
                                   const size_t *n_list,
                                   size_t n_len,
                                   size_t trials,
                                   uint64_t seed,
                                   bool tilted,
                                   double *out_exponent,
                                   char **out_csv);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* JCAS_H */
