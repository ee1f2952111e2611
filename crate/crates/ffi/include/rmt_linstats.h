#ifndef RMT_LINSTATS_H
#define RMT_LINSTATS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RmtStatus {
  RMT_STATUS_OK = 0,
  RMT_STATUS_NULL_POINTER = 1,
  RMT_STATUS_DOMAIN = 2,
  RMT_STATUS_INVALID = 3,
  RMT_STATUS_UNSUPPORTED = 4,
  RMT_STATUS_NUMERICAL = 5,
  RMT_STATUS_PANIC = 6,
} RmtStatus;

typedef enum RmtFamily {
  RMT_FAMILY_GAUSSIAN = 0,
  RMT_FAMILY_LAGUERRE = 1,
} RmtFamily;

typedef enum RmtStatFamily {
  RMT_STAT_FAMILY_GAUSSIAN = 0,
  RMT_STAT_FAMILY_LORENTZIAN = 1,
  RMT_STAT_FAMILY_HALF_BUMP = 2,
} RmtStatFamily;

typedef enum RmtMethod {
  RMT_METHOD_TRIDIAGONAL = 0,
  RMT_METHOD_MCMC = 1,
} RmtMethod;

/**
 * Opaque ensemble handle.
 */
typedef struct RmtEnsemble RmtEnsemble;

/**
 * Opaque statistic handle.
 */
typedef struct RmtStatistic RmtStatistic;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *rmt_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into the library from the same thread.
 */
const char *rmt_last_error(void);

/**
 * Create an ensemble. `alpha` is ignored for the Gaussian family.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum RmtStatus rmt_ensemble_new(enum RmtFamily family,
                                uint8_t beta,
                                uintptr_t n,
                                double alpha,
                                struct RmtEnsemble **out);

/**
 * # Safety
 * `ens` must be NULL or a handle from [`rmt_ensemble_new`] not yet freed.
 */
void rmt_ensemble_free(struct RmtEnsemble *ens);

/**
 * Create a statistic `F` of the given shape.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum RmtStatus rmt_statistic_new(enum RmtStatFamily family,
                                 double amplitude,
                                 double center,
                                 double width,
                                 struct RmtStatistic **out);

/**
 * # Safety
 * `stat` must be NULL or a handle from [`rmt_statistic_new`] not yet freed.
 */
void rmt_statistic_free(struct RmtStatistic *stat);

/**
 * `E exp(−λ Σ F(scaled x_j))` from the determinant formulas, with its
 * discretization discrepancy.
 *
 * # Safety
 * Handles must be live; `value` and `discrepancy` must be writable
 * (`discrepancy` may be NULL).
 */
enum RmtStatus rmt_mgf(const struct RmtEnsemble *ens,
                       const struct RmtStatistic *stat,
                       double lambda,
                       double *value,
                       double *discrepancy);

/**
 * Exact finite-N mean and variance of the scaled statistic.
 *
 * # Safety
 * Handles must be live; `mean` and `variance` must be writable.
 */
enum RmtStatus rmt_finite_moments(const struct RmtEnsemble *ens,
                                  const struct RmtStatistic *stat,
                                  double *mean,
                                  double *variance);

/**
 * Large-N mean and variance through order `1/N`.
 *
 * # Safety
 * Handles must be live; `mean` and `variance` must be writable.
 */
enum RmtStatus rmt_expansion(const struct RmtEnsemble *ens,
                             const struct RmtStatistic *stat,
                             double *mean,
                             double *variance);

/**
 * Draw `count` eigenvalue vectors into `out`, row-major, which must hold
 * `count · N` doubles (`out_len`). Eigenvalues are on the unscaled axis.
 *
 * # Safety
 * `ens` must be live and `out` must point to `out_len` writable doubles.
 */
enum RmtStatus rmt_sample(const struct RmtEnsemble *ens,
                          enum RmtMethod method,
                          uintptr_t count,
                          uint64_t seed,
                          double *out,
                          uintptr_t out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RMT_LINSTATS_H */
