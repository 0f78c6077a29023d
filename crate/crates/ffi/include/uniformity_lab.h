#pragma once

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stdint.h>
#include <stddef.h>

/**
 * Result of every call.
 */
typedef enum UlStatus {
  UL_STATUS_OK = 0,
  UL_STATUS_INVALID_ARGUMENT = 1,
  UL_STATUS_NULL_POINTER = 2,
  /**
   * Numerical failure or non-convergence.
   */
  UL_STATUS_NUMERICAL = 3,
  UL_STATUS_IO = 4,
  /**
   * The extraction ran but produced no local function.
   */
  UL_STATUS_EXTRACTION_FAILED = 5,
  /**
   * An internal panic was caught.
   */
  UL_STATUS_PANIC = 6,
} UlStatus;

/**
 * A finitely supported function `Z -> C`.
 */
typedef struct UlFunction UlFunction;

/**
 * A local function with a fixed resolution, modulus and anchor.
 */
typedef struct UlLocalFunction UlLocalFunction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread, or an empty string.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *ul_last_error(void);

/**
 * Builds a function from `len` values starting at `offset`. `im` may be
 * null for a real function.
 *
 * # Safety
 * `re` (and `im` when non-null) must point to `len` readable doubles.
 */
enum UlStatus ul_function_new(int64_t offset,
                              const double *re,
                              const double *im,
                              size_t len,
                              struct UlFunction **out);

/**
 * The indicator of `[lo, hi)`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum UlStatus ul_function_indicator(int64_t lo, int64_t hi, struct UlFunction **out);

/**
 * Reads a function file `[{"x": .., "re": .., "im": ..}, ...]`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum UlStatus ul_function_from_json_file(const char *path, struct UlFunction **out);

/**
 * Releases a function; null is ignored.
 *
 * # Safety
 * `f` must come from this library and not be used afterwards.
 */
void ul_function_free(struct UlFunction *f);

/**
 * Length of the stored window.
 *
 * # Safety
 * Pointers must be valid.
 */
enum UlStatus ul_function_len(const struct UlFunction *f, size_t *out);

/**
 * First point of the stored window.
 *
 * # Safety
 * Pointers must be valid.
 */
enum UlStatus ul_function_offset(const struct UlFunction *f, int64_t *out);

/**
 * `f(x)`, zero outside the window.
 *
 * # Safety
 * Pointers must be valid.
 */
enum UlStatus ul_function_eval(const struct UlFunction *f, int64_t x, double *re, double *im);

/**
 * `‖f‖_{U^s}` for `1 <= s <= 6`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum UlStatus ul_gowers_norm(const struct UlFunction *f, uint32_t s, double *out);

/**
 * `‖x -> f(u + qx)‖_{U^s}`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum UlStatus ul_gowers_norm_on_class(const struct UlFunction *f,
                                      int64_t u,
                                      uint64_t q,
                                      uint32_t s,
                                      double *out);

/**
 * `Λ_{q,N}(f₀, f₁, f₂)`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum UlStatus ul_lambda(uint64_t q,
                        uint64_t n,
                        const struct UlFunction *f0,
                        const struct UlFunction *f1,
                        const struct UlFunction *f2,
                        double *re,
                        double *im);

/**
 * The dual function `E_y f₀(x - qy²) f₁(x + y - qy²)` as a new handle.
 *
 * # Safety
 * Pointers must be valid.
 */
enum UlStatus ul_dual_function(uint64_t q,
                               uint64_t n,
                               const struct UlFunction *f0,
                               const struct UlFunction *f1,
                               struct UlFunction **out);

/**
 * Number of configurations `x, x + y, x + qy²` with `y ∈ [M]` inside the set.
 *
 * # Safety
 * `set` must point to `len` readable integers.
 */
enum UlStatus ul_count_configs(uint64_t q,
                               uint64_t n,
                               const int64_t *set,
                               size_t len,
                               uint64_t *out);

/**
 * Exact maximum of a configuration-free subset of `[N]` (`N <= 40`). The
 * lexicographically least optimum is written to `set`, which must have room
 * for `capacity >= N` entries.
 *
 * # Safety
 * `set` must point to `capacity` writable integers.
 */
enum UlStatus ul_max_free_set(uint64_t q,
                              uint64_t n,
                              bool unbounded,
                              int64_t *set,
                              size_t capacity,
                              size_t *out_size);

/**
 * The `q' ∈ [1, Q]` minimising `‖q' α‖`, with `a` the nearest integer to
 * `q' α` and `err = ‖q' α‖`.
 *
 * # Safety
 * Output pointers must be valid.
 */
enum UlStatus ul_best_denominator(double alpha,
                                  uint64_t q_max,
                                  uint64_t *out_q,
                                  int64_t *out_a,
                                  double *out_err);

/**
 * Extracts a local function correlating with `f` given `|Λ(g₀, g₁, f)| >= δ`,
 * using the default thresholds. `correlation` receives `|Σ f φ|`, also when
 * the extraction fails.
 *
 * # Safety
 * Pointers must be valid; `correlation` may be null.
 */
enum UlStatus ul_extract_correlating_local(uint64_t q,
                                           uint64_t n,
                                           double delta,
                                           const struct UlFunction *f,
                                           const struct UlFunction *g0,
                                           const struct UlFunction *g1,
                                           struct UlLocalFunction **out,
                                           double *correlation);

/**
 * Releases a local function; null is ignored.
 *
 * # Safety
 * `phi` must come from this library and not be used afterwards.
 */
void ul_local_function_free(struct UlLocalFunction *phi);

/**
 * `φ(x)`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum UlStatus ul_local_function_eval(const struct UlLocalFunction *phi,
                                     int64_t x,
                                     double *re,
                                     double *im);

/**
 * # Safety
 * Pointers must be valid.
 */
enum UlStatus ul_local_function_modulus(const struct UlLocalFunction *phi, uint64_t *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum UlStatus ul_local_function_resolution(const struct UlLocalFunction *phi, uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
