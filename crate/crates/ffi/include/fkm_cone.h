#ifndef FKM_CONE_H
#define FKM_CONE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FkmStatus {
  FKM_STATUS_OK = 0,
  FKM_STATUS_INVALID_ARGUMENT = 1,
  FKM_STATUS_NULL_POINTER = 2,
  FKM_STATUS_FOCAL_POINT = 3,
  FKM_STATUS_SOLVER_FAILURE = 4,
  FKM_STATUS_INTERNAL = 5,
} FkmStatus;

typedef enum FkmProfile {
  FKM_PROFILE_BOUND_F = 0,
  FKM_PROFILE_LIMIT = 1,
} FkmProfile;

typedef enum FkmVerdict {
  FKM_VERDICT_CERTIFIED = 0,
  FKM_VERDICT_INCONCLUSIVE = 1,
  FKM_VERDICT_INVALID = 2,
} FkmVerdict;

/*
 Opaque Clifford system handle.
 */
typedef struct FkmSystem FkmSystem;

/*
 Plain-data view of an FKM certificate. Absent values are NaN (or 0 for `n`).
 */
typedef struct FkmCertificate {
  enum FkmVerdict verdict;
  size_t n;
  double alpha_sq;
  double theta_rad;
  double normal_radius;
  double margin;
} FkmCertificate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the last error message of this thread into `buf` (NUL-terminated,
 truncated to `len`) and returns the full message length in bytes.

 # Safety
 `buf` must be null or valid for `len` bytes.
 */
size_t fkm_last_error(char *buf, size_t len);

/*
 Builds the Clifford system for `(m, k)`.

 # Safety
 `out` must be valid for writes.
 */
enum FkmStatus fkm_system_new(size_t m, size_t k, struct FkmSystem **out);

/*
 Parses a system from its JSON form.

 # Safety
 `json` must point to `len` readable bytes; `out` must be valid for writes.
 */
enum FkmStatus fkm_system_from_json(const char *json, size_t len, struct FkmSystem **out);

/*
 Releases a handle. Null is ignored.

 # Safety
 `sys` must be null or a handle from this library not yet freed.
 */
void fkm_system_free(struct FkmSystem *sys);

/*
 Matrix size `kδ(m)`, or 0 for a null handle.

 # Safety
 `sys` must be null or a live handle.
 */
size_t fkm_system_dim(const struct FkmSystem *sys);

/*
 Number of generators `m - 1`, or 0 for a null handle.

 # Safety
 `sys` must be null or a live handle.
 */
size_t fkm_system_num_generators(const struct FkmSystem *sys);

/*
 Copies generator `q` (zero-based) in row-major order into `out`, which
 must hold `dim * dim` entries.

 # Safety
 `sys` must be a live handle and `out` valid for `len` writes.
 */
enum FkmStatus fkm_system_generator(const struct FkmSystem *sys, size_t q, int8_t *out, size_t len);

/*
 Checks the Clifford relations exactly.

 # Safety
 `sys` must be a live handle and `ok` valid for writes.
 */
enum FkmStatus fkm_system_verify(const struct FkmSystem *sys, bool *ok);

/*
 `F(x, y)` for vectors of length `len = dim`.

 # Safety
 `x`, `y` must be valid for `len` reads and `out` for a write.
 */
enum FkmStatus fkm_eval_f(const struct FkmSystem *sys,
                          const double *x,
                          const double *y,
                          size_t len,
                          double *out);

/*
 Lawlor vanishing angle for cone dimension `dim` and curvature bound
 `alpha_sq`. `theta` receives NaN when the angle does not exist.

 # Safety
 `exists` and `theta` must be valid for writes.
 */
enum FkmStatus fkm_vanishing_angle(size_t dim,
                                   double alpha_sq,
                                   enum FkmProfile profile,
                                   bool *exists,
                                   double *theta);

/*
 Closed-form normal radius for `(m, n)`.

 # Safety
 `out` must be valid for writes.
 */
enum FkmStatus fkm_normal_radius(size_t m, size_t n, double *out);

/*
 Area-minimization certificate for the `(m, k)` FKM cone.

 # Safety
 `out` must be valid for writes.
 */
enum FkmStatus fkm_certify(size_t m, size_t k, struct FkmCertificate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FKM_CONE_H */
