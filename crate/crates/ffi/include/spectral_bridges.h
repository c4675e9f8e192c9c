#ifndef SPECTRAL_BRIDGES_H
#define SPECTRAL_BRIDGES_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum SbStatus {
  SB_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  SB_STATUS_NULL_POINTER = 1,
  /**
   * Inconsistent parameters.
   */
  SB_STATUS_CONFIG = 2,
  /**
   * Malformed or mis-shaped input data.
   */
  SB_STATUS_DATA = 3,
  /**
   * A numerical stage failed.
   */
  SB_STATUS_NUMERIC = 4,
  /**
   * Output buffer length does not match.
   */
  SB_STATUS_BUFFER_SIZE = 5,
  /**
   * A string argument was not valid UTF-8.
   */
  SB_STATUS_UTF8 = 6,
  /**
   * The library panicked; this is a bug.
   */
  SB_STATUS_INTERNAL = 7,
} SbStatus;

/**
 * Opaque fitted model.
 */
typedef struct SbModel SbModel;

/**
 * Fit parameters. Obtain defaults with `sb_config_default`.
 */
typedef struct SbConfig {
  size_t n_clusters;
  size_t n_regions;
  double m_factor;
  uint64_t seed;
  size_t kmeans_restarts;
  size_t lloyd_max_iter;
  double lloyd_tol;
} SbConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *sb_last_error_message(void);

/**
 * Default parameters for `n_clusters` clusters over `n_regions` regions.
 */
struct SbConfig sb_config_default(size_t n_clusters, size_t n_regions);

/**
 * Fits a model to `rows x cols` points. On success `*out` owns a new model
 * that must be released with `sb_model_free`.
 *
 * # Safety
 * `data` must point to `rows * cols` doubles, `config` to a valid
 * `SbConfig` and `out` to writable storage for one pointer.
 */
enum SbStatus sb_fit(const double *data,
                     size_t rows,
                     size_t cols,
                     const struct SbConfig *config,
                     struct SbModel **out);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must be null or a handle from this library not yet freed.
 */
void sb_model_free(struct SbModel *model);

/**
 * Number of regions `m` of the model.
 *
 * # Safety
 * `model` must be a live handle or null (returns 0).
 */
size_t sb_model_n_regions(const struct SbModel *model);

/**
 * Number of training points with stored labels; 0 for a model loaded from
 * JSON.
 *
 * # Safety
 * `model` must be a live handle or null (returns 0).
 */
size_t sb_model_n_points(const struct SbModel *model);

/**
 * Copies the training labels into `out`, which must hold exactly
 * `sb_model_n_points(model)` entries.
 *
 * # Safety
 * `model` must be a live handle and `out` must point to `len` writable
 * `size_t`.
 */
enum SbStatus sb_model_labels(const struct SbModel *model, size_t *out, size_t len);

/**
 * Labels `rows` new points of dimension `cols` into `out` (`rows` entries).
 *
 * # Safety
 * `model` must be a live handle, `data` must point to `rows * cols`
 * doubles and `out` to `rows` writable `size_t`.
 */
enum SbStatus sb_model_predict(const struct SbModel *model,
                               const double *data,
                               size_t rows,
                               size_t cols,
                               size_t *out);

/**
 * Serializes the model. `*out` receives a string to release with
 * `sb_string_free`.
 *
 * # Safety
 * `model` must be a live handle and `out` writable storage for one pointer.
 */
enum SbStatus sb_model_to_json(const struct SbModel *model, char **out);

/**
 * Loads a model from its JSON form. The result has no training labels.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` writable storage for
 * one pointer.
 */
enum SbStatus sb_model_from_json(const char *json, struct SbModel **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void sb_string_free(char *s);

/**
 * Adjusted Rand index of two labelings of length `n`.
 *
 * # Safety
 * `a` and `b` must point to `n` `size_t`, `out` to one writable double.
 */
enum SbStatus sb_ari(const size_t *a, const size_t *b, size_t n, double *out);

/**
 * Normalized mutual information of two labelings of length `n`.
 *
 * # Safety
 * `a` and `b` must point to `n` `size_t`, `out` to one writable double.
 */
enum SbStatus sb_nmi(const size_t *a, const size_t *b, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPECTRAL_BRIDGES_H */
