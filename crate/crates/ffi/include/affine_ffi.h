#ifndef AFFINE_FFI_H
#define AFFINE_FFI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Values 1 to 5 match the exit codes of the `affine` binary.
 */
typedef enum AffineStatus {
  AFFINE_STATUS_OK = 0,
  AFFINE_STATUS_INADMISSIBLE = 1,
  AFFINE_STATUS_PARSE = 2,
  AFFINE_STATUS_NUMERICAL = 3,
  AFFINE_STATUS_NOT_ERGODIC = 4,
  AFFINE_STATUS_UNSUPPORTED = 5,
  AFFINE_STATUS_NULL_POINTER = 6,
  AFFINE_STATUS_PANIC = 7,
} AffineStatus;

/**
 * Opaque model handle.
 */
typedef struct AffineModel AffineModel;

/**
 * Complex number with C layout.
 */
typedef struct AffineComplex {
  double re;
  double im;
} AffineComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *affine_last_error_message(void);

/**
 * Parses a model file, checks admissibility and returns a new handle in `out`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum AffineStatus affine_model_from_json(const char *json, struct AffineModel **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `model` must come from [`affine_model_from_json`] and not be used again.
 */
void affine_model_free(struct AffineModel *model);

/**
 * Writes 1 to `admissible` if the model file passes every admissibility
 * condition and 0 otherwise; the failing conditions go to the error message.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `admissible` a valid pointer.
 */
enum AffineStatus affine_validate_json(const char *json, int *admissible);

/**
 * State dimensions `m` (nonnegative block) and `n` (real block).
 *
 * # Safety
 * All pointers must be valid.
 */
enum AffineStatus affine_model_dims(const struct AffineModel *model, size_t *m, size_t *n);

/**
 * `E_x[exp(<u, X_t>)]` with `x` of length `x_len` and `u` of length `u_len`.
 *
 * # Safety
 * `x` and `u` must point to `x_len` and `u_len` elements, `out` must be valid.
 */
enum AffineStatus affine_char_fn(const struct AffineModel *model,
                                 const double *x,
                                 size_t x_len,
                                 double t,
                                 const struct AffineComplex *u,
                                 size_t u_len,
                                 double tol,
                                 struct AffineComplex *out);

/**
 * Characteristic function of the limiting distribution at `u`.
 * Fails with [`AffineStatus::NotErgodic`] when the model is not ergodic.
 *
 * # Safety
 * `u` must point to `u_len` elements, `out` must be valid.
 */
enum AffineStatus affine_stationary_cf(const struct AffineModel *model,
                                       const struct AffineComplex *u,
                                       size_t u_len,
                                       double tol,
                                       struct AffineComplex *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AFFINE_FFI_H */
