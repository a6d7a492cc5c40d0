#ifndef MTS_H
#define MTS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  MTS_STATUS_OK = 0,
  MTS_STATUS_NULL_POINTER = 1,
  MTS_STATUS_INVALID_ARGUMENT = 2,
  MTS_STATUS_TOO_FEW_INLIERS = 3,
  MTS_STATUS_SOLVER_DEGENERATE = 4,
  MTS_STATUS_INDEX_OUT_OF_RANGE = 5,
  MTS_STATUS_PROBLEM_TOO_SMALL = 6,
  MTS_STATUS_NON_FINITE = 7,
  MTS_STATUS_INTERNAL = 99,
} MtsStatus;

typedef enum {
  MTS_TERMINATION_MIN_MEASUREMENTS = 0,
  MTS_TERMINATION_CONVERGED = 1,
  MTS_TERMINATION_CALL_CAP_REACHED = 2,
} MtsTermination;

typedef struct MtsAdaptResult MtsAdaptResult;

typedef struct MtsLinearProblem MtsLinearProblem;

typedef struct MtsRegistrationProblem MtsRegistrationProblem;

/*
 ADAPT parameters. Zero in `min_measurements` or `max_solver_calls` selects
 the library default (the solver minimum and `4 |M|`).
 */
typedef struct {
  double gamma;
  double delta;
  size_t t_conv;
  size_t g_step;
  size_t min_measurements;
  size_t max_solver_calls;
} MtsAdaptConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Description of the last error on this thread. The pointer stays valid
 until the next failing call on the same thread.
 */
const char *mts_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *mts_version(void);

/*
 Fills `out` with the default ADAPT parameters (`gamma = 0.99`,
 `delta = 1e-4`, `t_conv = 2`, `g_step = 1`).

 # Safety
 `out` must be null or writable.
 */
MtsStatus mts_adapt_config_default(MtsAdaptConfig *out);

/*
 Linear problem `y_i = a_i^T x` from a row-major `m x n` design matrix and
 `m` observations.

 # Safety
 `design` must hold `m * n` doubles, `observations` `m` doubles, and `out`
 must be writable.
 */
MtsStatus mts_linear_problem_new(const double *design,
                                 const double *observations,
                                 size_t m,
                                 size_t n,
                                 MtsLinearProblem **out);

/*
 # Safety
 `problem` must be null or a handle from `mts_linear_problem_new` that has
 not been freed.
 */
void mts_linear_problem_free(MtsLinearProblem *problem);

/*
 Registration problem from `count` index-aligned correspondences, each a
 packed `x, y, z` triple.

 # Safety
 `source` and `target` must hold `3 * count` doubles; `out` must be
 writable.
 */
MtsStatus mts_registration_problem_new(const double *source,
                                       const double *target,
                                       size_t count,
                                       MtsRegistrationProblem **out);

/*
 # Safety
 `problem` must be null or a handle from `mts_registration_problem_new`
 that has not been freed.
 */
void mts_registration_problem_free(MtsRegistrationProblem *problem);

/*
 Runs ADAPT. A null `config` selects the defaults.

 # Safety
 `problem` must be a live handle, `config` null or readable, `out` writable.
 */
MtsStatus mts_linear_adapt(const MtsLinearProblem *problem,
                           const MtsAdaptConfig *config,
                           MtsAdaptResult **out);

/*
 Runs ADAPT. A null `config` selects the defaults.

 # Safety
 `problem` must be a live handle, `config` null or readable, `out` writable.
 */
MtsStatus mts_registration_adapt(const MtsRegistrationProblem *problem,
                                 const MtsAdaptConfig *config,
                                 MtsAdaptResult **out);

/*
 # Safety
 `result` must be null or a live result handle.
 */
void mts_adapt_result_free(MtsAdaptResult *result);

/*
 Copies up to `capacity` rejected indices (ascending) into `buf` and
 returns how many there are. Pass a null `buf` to query the count.

 # Safety
 `result` must be a live handle; `buf` null or valid for `capacity` writes.
 */
size_t mts_adapt_result_outliers(const MtsAdaptResult *result, size_t *buf, size_t capacity);

/*
 Copies up to `capacity` estimate components into `buf` and returns the
 estimate's length (`n` for linear problems, 12 for registration).

 # Safety
 `result` must be a live handle; `buf` null or valid for `capacity` writes.
 */
size_t mts_adapt_result_estimate(const MtsAdaptResult *result, double *buf, size_t capacity);

/*
 `r(O)` of the returned rejection; NaN for a null handle.

 # Safety
 `result` must be null or a live handle.
 */
double mts_adapt_result_residual(const MtsAdaptResult *result);

/*
 # Safety
 `result` must be null or a live handle.
 */
size_t mts_adapt_result_solver_calls(const MtsAdaptResult *result);

/*
 # Safety
 `result` must be null or a live handle.
 */
size_t mts_adapt_result_iterations(const MtsAdaptResult *result);

/*
 # Safety
 `result` must be a live handle; `out` writable.
 */
MtsStatus mts_adapt_result_termination(const MtsAdaptResult *result, MtsTermination *out);

/*
 `chi = r_outliers / (r_empty - r_outliers)`; infinity when the rejection
 bought no reduction.

 # Safety
 `out` must be writable.
 */
MtsStatus mts_chi_bound(double r_empty, double r_outliers, double *out);

/*
 Certificate of an arbitrary rejection on a linear problem.

 # Safety
 `problem` must be a live handle, `outliers` valid for `count` reads, `out`
 writable.
 */
MtsStatus mts_linear_chi(const MtsLinearProblem *problem,
                         const size_t *outliers,
                         size_t count,
                         double *out);

/*
 Certificate of an arbitrary rejection on a registration problem.

 # Safety
 `problem` must be a live handle, `outliers` valid for `count` reads, `out`
 writable.
 */
MtsStatus mts_registration_chi(const MtsRegistrationProblem *problem,
                               const size_t *outliers,
                               size_t count,
                               double *out);

/*
 The `p`-quantile of the chi-square distribution with `dof` degrees of
 freedom.

 # Safety
 `out` must be writable.
 */
MtsStatus mts_chi2_quantile(double p, uint32_t dof, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MTS_H */
