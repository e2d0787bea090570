#ifndef RELPOW_H
#define RELPOW_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RelpowStatus {
  RELPOW_STATUS_OK = 0,
  RELPOW_STATUS_NULL_POINTER = 1,
  RELPOW_STATUS_DIMENSION_MISMATCH = 2,
  RELPOW_STATUS_NOT_IN_RESOLVENT_SET = 3,
  RELPOW_STATUS_TOLERANCE_NOT_MET = 4,
  RELPOW_STATUS_INVALID_PARAMS = 5,
  RELPOW_STATUS_ROUTE_DOMAIN = 6,
  RELPOW_STATUS_OUT_OF_SECTOR = 7,
  RELPOW_STATUS_PARSE = 8,
  RELPOW_STATUS_IO = 9,
  RELPOW_STATUS_UNKNOWN_IDENTITY = 10,
  RELPOW_STATUS_PANIC = 11,
} RelpowStatus;

typedef enum RelpowRoute {
  RELPOW_ROUTE_CONTOUR = 0,
  RELPOW_ROUTE_BALAKRISHNAN = 1,
  RELPOW_ROUTE_MOMENT = 2,
} RelpowRoute;

/**
 * Opaque problem instance: relation, regularizer and region.
 */
typedef struct RelpowInstance RelpowInstance;

/**
 * Opaque linear relation.
 */
typedef struct RelpowRelation RelpowRelation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the next call.
 */
const char *relpow_last_error(void);

/**
 * Relation given by the graph of an `n x n` matrix.
 *
 * # Safety
 * `a` must hold `2 n n` doubles; `out` must be writable.
 */
enum RelpowStatus relpow_relation_from_matrix(size_t n,
                                              const double *a,
                                              struct RelpowRelation **out);

/**
 * Relation `{(B x, L x)}`.
 *
 * # Safety
 * `b` and `l` must each hold `2 n n` doubles; `out` must be writable.
 */
enum RelpowStatus relpow_relation_from_pencil(size_t n,
                                              const double *b,
                                              const double *l,
                                              struct RelpowRelation **out);

/**
 * # Safety
 * `rel` must come from this library; `out` must be writable.
 */
enum RelpowStatus relpow_relation_dim(const struct RelpowRelation *rel, size_t *out);

/**
 * # Safety
 * `rel` must come from this library and not be used afterwards. Null is ignored.
 */
void relpow_relation_free(struct RelpowRelation *rel);

/**
 * `(λ - A)^{-1} C`; a null `c` means the identity.
 *
 * # Safety
 * `c`, when given, and `out` must hold `2 n n` doubles.
 */
enum RelpowStatus relpow_c_resolvent(const struct RelpowRelation *rel,
                                     const double *c_mat,
                                     double lambda_re,
                                     double lambda_im,
                                     double *out);

/**
 * Instance from a JSON problem file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum RelpowStatus relpow_instance_load(const char *path, struct RelpowInstance **out);

/**
 * Instance from JSON text in the problem file format.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum RelpowStatus relpow_instance_from_json(const char *json, struct RelpowInstance **out);

/**
 * # Safety
 * `inst` must come from this library; `out` must be writable.
 */
enum RelpowStatus relpow_instance_dim(const struct RelpowInstance *inst, size_t *out);

/**
 * # Safety
 * `inst` must come from this library and not be used afterwards. Null is ignored.
 */
void relpow_instance_free(struct RelpowInstance *inst);

/**
 * `(-A)^{-b}_{C1}` by `route`, a [`RelpowRoute`] value; `n_moment` is only read by the moment route.
 *
 * # Safety
 * `out` must hold `2 n n` doubles.
 */
enum RelpowStatus relpow_neg_power(const struct RelpowInstance *inst,
                                   double b_re,
                                   double b_im,
                                   uint32_t route,
                                   size_t n_moment,
                                   double tol,
                                   double *out);

/**
 * `S_γ(t)` for `0 < γ <= 1/2`.
 *
 * # Safety
 * `out` must hold `2 n n` doubles.
 */
enum RelpowStatus relpow_semigroup(const struct RelpowInstance *inst,
                                   double gamma,
                                   double t_re,
                                   double t_im,
                                   double tol,
                                   double *out);

/**
 * Checks one catalogued identity with the instance defaults.
 *
 * # Safety
 * `id` must be a NUL-terminated string; the outputs must be writable.
 */
enum RelpowStatus relpow_verify(const struct RelpowInstance *inst,
                                const char *id,
                                uint64_t seed,
                                bool control,
                                double *max_residual,
                                bool *pass);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RELPOW_H */
