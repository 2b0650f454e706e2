#ifndef BCO_H
#define BCO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum {
  BCO_STATUS_OK = 0,
  BCO_STATUS_NULL_POINTER = 1,
  BCO_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A point lies outside the domain or a round outside the horizon.
   */
  BCO_STATUS_OUT_OF_DOMAIN = 3,
  /**
   * Calls made in the wrong order, such as two queries without feedback.
   */
  BCO_STATUS_INVALID_STATE = 4,
  BCO_STATUS_IO = 5,
  BCO_STATUS_PARSE = 6,
  /**
   * A panic was caught at the boundary.
   */
  BCO_STATUS_INTERNAL = 7,
} BcoStatus;

/**
 * Domain shape selector for [`bco_tewa_new`].
 */
typedef enum {
  /**
   * Euclidean ball of the given radius about the origin.
   */
  BCO_DOMAIN_BALL = 0,
  /**
   * Cube `[−w, w]^d` with the given half-width.
   */
  BCO_DOMAIN_CUBE = 1,
} BcoDomain;

/**
 * A loss sequence loaded from a file.
 */
typedef struct BcoEnv BcoEnv;

/**
 * A TEWA learner together with its private random stream.
 */
typedef struct BcoTewa BcoTewa;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`) and returns the full length including
 * the terminator. Pass a null `buf` to query the length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t bco_last_error_message(char *buf, size_t len);

/**
 * Static description of a status code.
 */
const char *bco_status_string(BcoStatus status);

/**
 * Creates a learner on a ball or cube centered at the origin.
 *
 * # Safety
 * `out` must be a valid pointer; on success it receives a handle owned by
 * the caller.
 */
BcoStatus bco_tewa_new(size_t dim,
                       uint64_t horizon,
                       uint64_t interval_len,
                       double sigma,
                       BcoDomain domain,
                       double size,
                       uint64_t seed,
                       BcoTewa **out);

/**
 * Writes the next query point into `out` (`len` = dimension).
 *
 * # Safety
 * `tewa` must come from [`bco_tewa_new`]; `out` must hold `len` doubles.
 */
BcoStatus bco_tewa_next_query(BcoTewa *tewa, double *out, size_t len);

/**
 * Reports the observed loss at the pending query.
 *
 * # Safety
 * `tewa` must come from [`bco_tewa_new`].
 */
BcoStatus bco_tewa_feed(BcoTewa *tewa, double loss);

/**
 * Writes the most recent aggregate action into `out`.
 *
 * # Safety
 * `tewa` must come from [`bco_tewa_new`]; `out` must hold `len` doubles.
 */
BcoStatus bco_tewa_meta_action(const BcoTewa *tewa, double *out, size_t len);

/**
 * Number of completed rounds.
 *
 * # Safety
 * `tewa` must come from [`bco_tewa_new`]; `out` must be valid.
 */
BcoStatus bco_tewa_rounds(const BcoTewa *tewa, uint64_t *out);

/**
 * Releases a learner. Null is ignored.
 *
 * # Safety
 * `tewa` must be null or come from [`bco_tewa_new`] and not be used again.
 */
void bco_tewa_free(BcoTewa *tewa);

/**
 * Loads and validates an environment file written by `bco env export`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be valid.
 */
BcoStatus bco_env_load(const char *path, BcoEnv **out);

/**
 * Horizon and dimension of an environment; either output may be null.
 *
 * # Safety
 * `env` must come from [`bco_env_load`].
 */
BcoStatus bco_env_shape(const BcoEnv *env, uint64_t *horizon, size_t *dim);

/**
 * Noise-free loss `f_t(x)`; fails with `OutOfDomain` outside the domain.
 *
 * # Safety
 * `env` must come from [`bco_env_load`]; `x` must hold `len` doubles and
 * `out` must be valid.
 */
BcoStatus bco_env_eval(const BcoEnv *env, uint64_t t, const double *x, size_t len, double *out);

/**
 * Minimizer of `f_t` over the domain.
 *
 * # Safety
 * `env` must come from [`bco_env_load`]; `out` must hold `len` doubles.
 */
BcoStatus bco_env_minimizer(const BcoEnv *env, uint64_t t, double *out, size_t len);

/**
 * Releases an environment. Null is ignored.
 *
 * # Safety
 * `env` must be null or come from [`bco_env_load`] and not be used again.
 */
void bco_env_free(BcoEnv *env);

/**
 * Runs a complete experiment described by `key = value` text (the same
 * format as `bco run --config`). When `csv_path` is non-null the trace and
 * its JSON summary are written next to each other. `final_regret` may be
 * null.
 *
 * # Safety
 * `config` must be a NUL-terminated string; `csv_path` must be null or
 * NUL-terminated.
 */
BcoStatus bco_run_config(const char *config, const char *csv_path, double *final_regret);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BCO_H */
