/* Copyright 2026 The qslkit Authors
 * SPDX-License-Identifier: Apache-2.0 */

#ifndef QSLKIT_H
#define QSLKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. `QSL_STATUS_OK` is zero.
 */
typedef enum QslStatus {
  QSL_STATUS_OK = 0,
  QSL_STATUS_NULL_POINTER = 1,
  QSL_STATUS_INVALID_INPUT = 2,
  QSL_STATUS_INVALID_STATE = 3,
  QSL_STATUS_QUADRATURE_FAILED = 4,
  QSL_STATUS_UNSUPPORTED = 5,
  /**
   * The requested rate is undefined because C(t) vanishes nearby.
   */
  QSL_STATUS_SINGULAR = 6,
  QSL_STATUS_PANIC = 7,
} QslStatus;

/**
 * Opaque model handle.
 */
typedef struct QslModel QslModel;

/**
 * Initial state: excited population and coherence ⟨e|ρ|g⟩.
 */
typedef struct QslState {
  double p_excited;
  double coherence_re;
  double coherence_im;
} QslState;

typedef struct QslBoundReport {
  double lambda1;
  double lambda2;
  double lambda_inf;
  double d_measure;
  double tau_qsl;
  double ratio;
  /**
   * NaN when the reference state is mixed.
   */
  double bures_ratio;
  double quadrature_err;
  bool stationary;
  bool speed_up;
} QslBoundReport;

typedef struct QslBuresReport {
  double sin2_angle;
  double operator_ratio;
  double weighted_ratio;
  double quadrature_err;
} QslBuresReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a model with coupling `gamma0`, reservoir width `lambda` and
 * detuning `delta`. The handle is written to `out` and must be released
 * with [`qsl_model_free`].
 *
 * # Safety
 * `out` must be null or valid for a pointer write.
 */
enum QslStatus qsl_model_new(double gamma0, double lambda, double delta, struct QslModel **out);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must be null or a handle from [`qsl_model_new`] not yet freed.
 */
void qsl_model_free(struct QslModel *model);

/**
 * Amplitude C(t) of the excited state.
 *
 * # Safety
 * `model` must be a live handle; `re` and `im` must be null or writable.
 */
enum QslStatus qsl_amplitude(const struct QslModel *model, double t, double *re, double *im);

/**
 * Excited-state population |C(t)|².
 *
 * # Safety
 * `model` must be a live handle; `out` must be null or writable.
 */
enum QslStatus qsl_excited_population(const struct QslModel *model, double t, double *out);

/**
 * Time-dependent decay rate γ(t). Returns `QSL_STATUS_SINGULAR` near a
 * zero of C(t) and leaves `out` untouched.
 *
 * # Safety
 * `model` must be a live handle; `out` must be null or writable.
 */
enum QslStatus qsl_decay_rate(const struct QslModel *model, double t, double *out);

/**
 * Long-time rate of the weak-coupling limit.
 *
 * # Safety
 * `model` must be a live handle; `out` must be null or writable.
 */
enum QslStatus qsl_markov_limit(const struct QslModel *model, double *out);

/**
 * τ_QSL/τ_D over the window [tau_start, tau_start + tau_d] for the state
 * evolved from `state`.
 *
 * # Safety
 * `model` must be a live handle, `state` readable, `out` null or writable.
 */
enum QslStatus qsl_ratio(const struct QslModel *model,
                         const struct QslState *state,
                         double tau_start,
                         double tau_d,
                         struct QslBoundReport *out);

/**
 * Population-only ratio for an initially excited atom, with the window
 * starting at `tau`.
 *
 * # Safety
 * `model` must be a live handle; `out` must be null or writable.
 */
enum QslStatus qsl_ratio_evolved(const struct QslModel *model,
                                 double tau,
                                 double tau_d,
                                 double *out);

/**
 * Bures-angle comparator for a pure initial state.
 *
 * # Safety
 * `model` must be a live handle, `state` readable, `out` null or writable.
 */
enum QslStatus qsl_bures(const struct QslModel *model,
                         const struct QslState *state,
                         double tau_d,
                         struct QslBuresReport *out);

/**
 * Copies the calling thread's last error message into `buf` as a
 * NUL-terminated string, truncating to `len` bytes. Returns the length
 * the full message needs including the terminator, or 0 if there is none.
 *
 * # Safety
 * `buf` must be null or valid for `len` byte writes.
 */
size_t qsl_last_error_message(char *buf, size_t len);

/**
 * Static version string.
 */
const char *qsl_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QSLKIT_H */
