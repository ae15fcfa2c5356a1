#ifndef SYMKNOT_H
#define SYMKNOT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SkStatus {
  SK_STATUS_OK = 0,
  SK_STATUS_NULL_POINTER = 1,
  SK_STATUS_INVALID_ARGUMENT = 2,
  SK_STATUS_NUMERICAL = 3,
  SK_STATUS_IO = 4,
  SK_STATUS_BUFFER_TOO_SMALL = 5,
  SK_STATUS_PANIC = 6,
} SkStatus;

/**
 * Opaque closed polygon.
 */
typedef struct SkCurve SkCurve;

/**
 * Summary of a symmetric minimization.
 */
typedef struct SkReport {
  double sym_grad_rms;
  double full_grad_rms;
  double scaled_energy;
  size_t iterations;
  /**
   * 1 when the gradient tolerance was reached.
   */
  int32_t converged;
} SkReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *sk_last_error(void);

/**
 * Builds a curve from `n` interleaved `x, y, z` triples.
 *
 * # Safety
 * `xyz` must point to `3 * n` readable doubles; `out` must be writable.
 */
enum SkStatus sk_curve_new(const double *xyz, size_t n, struct SkCurve **out);

/**
 * # Safety
 * `curve` must come from this library and not be freed twice.
 */
void sk_curve_free(struct SkCurve *curve);

/**
 * Number of samples, or 0 for a null handle.
 *
 * # Safety
 * `curve` must be null or a live handle.
 */
size_t sk_curve_len(const struct SkCurve *curve);

/**
 * Copies the coordinates into `out` (`3 * len` doubles).
 *
 * # Safety
 * `out` must point to `capacity` writable doubles.
 */
enum SkStatus sk_curve_points(const struct SkCurve *curve, double *out, size_t capacity);

/**
 * # Safety
 * `path` must be a nul-terminated string; `out` must be writable.
 */
enum SkStatus sk_curve_load(const char *path, struct SkCurve **out);

/**
 * # Safety
 * `curve` must be a live handle; `path` a nul-terminated string.
 */
enum SkStatus sk_curve_save(const struct SkCurve *curve, const char *path);

/**
 * Samples the standard torus knot curve `T(a, b)` at `n` points.
 *
 * # Safety
 * `out` must be writable.
 */
enum SkStatus sk_torus_curve(int64_t a, int64_t b, double rho, size_t n, struct SkCurve **out);

/**
 * # Safety
 * `curve` must be a live handle; `out` writable.
 */
enum SkStatus sk_energy(const struct SkCurve *curve, double alpha, double *out);

/**
 * # Safety
 * `curve` must be a live handle; `out` writable.
 */
enum SkStatus sk_scaled_energy(const struct SkCurve *curve, double alpha, double *out);

/**
 * Gradient of the energy (`scaled = 0`) or of the scaled energy
 * (`scaled != 0`), written as `3 * len` doubles.
 *
 * # Safety
 * `grad` must point to `capacity` writable doubles.
 */
enum SkStatus sk_energy_gradient(const struct SkCurve *curve,
                                 double alpha,
                                 int32_t scaled,
                                 double *grad,
                                 size_t capacity);

/**
 * Energy of the unit circle; `alpha` may be 2.
 *
 * # Safety
 * `out` must be writable.
 */
enum SkStatus sk_circle_oracle(double alpha, double *out);

/**
 * # Safety
 * `curve` must be a live handle; `out` writable.
 */
enum SkStatus sk_bilipschitz_ratio(const struct SkCurve *curve, double *out);

/**
 * Tests invariance under the order-`m` action with shift parameter `k`.
 *
 * # Safety
 * `curve` must be a live handle; outputs writable.
 */
enum SkStatus sk_is_symmetric(const struct SkCurve *curve,
                              size_t m,
                              int64_t k,
                              double tol,
                              int32_t *symmetric,
                              double *residual);

/**
 * Minimizes the scaled energy of `T(a, b)` among curves fixed by the
 * order-`m` action. `max_iters = 0` keeps the default. Reaching the
 * iteration limit still returns the curve, with `converged = 0`.
 *
 * # Safety
 * `out_curve` and `report` must be writable.
 */
enum SkStatus sk_minimize_symmetric(int64_t a,
                                    int64_t b,
                                    size_t m,
                                    double alpha,
                                    size_t n,
                                    size_t max_iters,
                                    struct SkCurve **out_curve,
                                    struct SkReport *report);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SYMKNOT_H */
