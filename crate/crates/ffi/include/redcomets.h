#ifndef REDCOMETS_H
#define REDCOMETS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum RcStatus {
  RC_STATUS_OK = 0,
  RC_STATUS_NULL_POINTER = 1,
  RC_STATUS_INVALID_UTF8 = 2,
  RC_STATUS_INVALID_INPUT = 3,
  RC_STATUS_INVALID_LENS = 4,
  RC_STATUS_DEGENERATE_TRAINING = 5,
  RC_STATUS_PARSE = 6,
  RC_STATUS_IO = 7,
  RC_STATUS_BUFFER_TOO_SMALL = 8,
  RC_STATUS_PANIC = 9,
} RcStatus;

/**
 * Opaque dataset handle.
 */
typedef struct RcDataset RcDataset;

/**
 * Pipeline settings. Start from [`rc_config_default`].
 */
typedef struct RcConfig {
  /**
   * Lenses per representation as a proportion of the series length.
   */
  double p;
  size_t alpha_min;
  size_t alpha_max;
  size_t trees;
  size_t folds;
  uint64_t seed;
  /**
   * Worker threads, 0 for all cores.
   */
  size_t threads;
} RcConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library defaults: p 0.05, alphabet 3..=10, 100 trees, 5 folds, seed 0,
 * all cores.
 */
struct RcConfig rc_config_default(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rc_version(void);

/**
 * Message of the last failed call on this thread, or NULL when the last call
 * succeeded. Valid until the next `rc_*` call on the same thread.
 */
const char *rc_last_error_message(void);

/**
 * Reads a `.ts` archive file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RcStatus rc_dataset_from_ts_file(const char *path, struct RcDataset **out);

/**
 * Parses `.ts` text; `name` is used when the text has no `@problemName`.
 *
 * # Safety
 * `text` and `name` must be NUL-terminated strings and `out` a valid pointer.
 */
enum RcStatus rc_dataset_from_ts_text(const char *text, const char *name, struct RcDataset **out);

/**
 * Builds a dataset from `instances * dims * length` values laid out
 * instance-major, then dimension, then time. `labels[i] < class_count`;
 * class `c` is named by its decimal index, zero-padded so that name order
 * matches index order.
 *
 * # Safety
 * `values` must point to `instances * dims * length` doubles, `labels` to
 * `instances` entries and `out` must be valid.
 */
enum RcStatus rc_dataset_from_arrays(const double *values,
                                     size_t instances,
                                     size_t dims,
                                     size_t length,
                                     const size_t *labels,
                                     size_t class_count,
                                     struct RcDataset **out);

/**
 * Releases a dataset. NULL is ignored.
 *
 * # Safety
 * `ds` must come from an `rc_dataset_*` constructor and not be used again.
 */
void rc_dataset_free(struct RcDataset *ds);

/**
 * Instance count, dimensions, series length and class count. Any output
 * pointer may be NULL.
 *
 * # Safety
 * `ds` must be a live handle; non-NULL outputs must be valid.
 */
enum RcStatus rc_dataset_shape(const struct RcDataset *ds,
                               size_t *instances,
                               size_t *dims,
                               size_t *length,
                               size_t *classes);

/**
 * Writes class `index`'s name, NUL-terminated, into `buf`. With a NULL or
 * short buffer the call fails with `BufferTooSmall` and `needed` (if
 * non-NULL) receives the required size including the terminator.
 *
 * # Safety
 * `ds` must be a live handle; `buf` must hold `len` bytes.
 */
enum RcStatus rc_dataset_class_name(const struct RcDataset *ds,
                                    size_t index,
                                    char *buf,
                                    size_t len,
                                    size_t *needed);

/**
 * Fits `variant` (1..=9) on `train` and labels `test`. `labels_out` receives
 * `test`'s instance count of class indices over the sorted union of both
 * datasets' class names, which is `train`'s own indexing whenever `test`
 * adds no new classes. `accuracy_out` may be NULL.
 *
 * # Safety
 * Handles must be live, `config` valid, `labels_out` must hold `labels_len`
 * entries.
 */
enum RcStatus rc_classify(const struct RcDataset *train,
                          const struct RcDataset *test,
                          uint8_t variant,
                          const struct RcConfig *config,
                          size_t *labels_out,
                          size_t labels_len,
                          double *accuracy_out);

/**
 * Evaluates `variant` on `resamples` seeded stratified resamples of the
 * pooled data. `accuracies_out` receives one accuracy per resample;
 * `mean_out` may be NULL.
 *
 * # Safety
 * Handles must be live, `config` valid, `accuracies_out` must hold
 * `accuracies_len` entries.
 */
enum RcStatus rc_benchmark(const struct RcDataset *train,
                           const struct RcDataset *test,
                           uint8_t variant,
                           size_t resamples,
                           const struct RcConfig *config,
                           double *accuracies_out,
                           size_t accuracies_len,
                           double *mean_out);

/**
 * Two-sided Wilcoxon signed-rank p-value of the paired samples `a` and `b`.
 *
 * # Safety
 * `a` and `b` must each hold `n` doubles; `p_out` must be valid.
 */
enum RcStatus rc_wilcoxon(const double *a, const double *b, size_t n, double *p_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REDCOMETS_H */
