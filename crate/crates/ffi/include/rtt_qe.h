/* C interface to the rtt-qe quality-estimation toolkit. */

#ifndef RTT_QE_H
#define RTT_QE_H

/* Generated by cbindgen from the rtt-qe-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Call succeeded.
 */
#define RTTQE_OK 0

/**
 * A pointer was null or an argument was out of range.
 */
#define RTTQE_ERR_ARG 1

/**
 * A string argument was not valid UTF-8.
 */
#define RTTQE_ERR_UTF8 2

/**
 * A file could not be read.
 */
#define RTTQE_ERR_IO 3

/**
 * The inputs were structurally valid but the computation rejected them.
 */
#define RTTQE_ERR_COMPUTE 4

/**
 * An internal invariant failed; the library state is still consistent.
 */
#define RTTQE_ERR_PANIC 5

/**
 * Loaded quality predictor. Opaque; create with `rttqe_predictor_load` and
 * release with `rttqe_predictor_free`.
 */
typedef struct RttqePredictor RttqePredictor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Toolkit version as a static NUL-terminated string. Never null; do not
 * free.
 */
const char *rttqe_version(void);

/**
 * Message for the most recent failure on this thread, or null if the last
 * call succeeded. The pointer stays valid until the next toolkit call on
 * the same thread; do not free.
 */
const char *rttqe_last_error_message(void);

/**
 * Corpus BLEU over word 1..4-grams with standard international
 * tokenization, on a 0..100 scale.
 *
 * `smoothing` is one of "none", "floor", "floor(F)", "add-k", "add-k(K)",
 * or null for "none". When `sentence_average` is true the score is the
 * mean of per-segment scores instead of the corpus-level aggregate.
 *
 * # Safety
 * `hyps` and `refs` must point to `len` valid NUL-terminated strings each,
 * and `out_score` must be a valid writable pointer.
 */
int rttqe_bleu_corpus(const char *const *hyps,
                      const char *const *refs,
                      size_t len,
                      const char *smoothing,
                      bool sentence_average,
                      double *out_score);

/**
 * Corpus chrF over character 1..6-grams, on a 0..100 scale. `beta` weights
 * recall against precision; pass a non-positive value for the default 2.
 *
 * # Safety
 * `hyps` and `refs` must point to `len` valid NUL-terminated strings each,
 * and `out_score` must be a valid writable pointer.
 */
int rttqe_chrf_corpus(const char *const *hyps,
                      const char *const *refs,
                      size_t len,
                      double beta,
                      bool sentence_average,
                      double *out_score);

/**
 * Tokenize with the standard international scheme (Unicode NFC, then
 * punctuation and symbol splitting). On success `*out_tokens` receives an
 * array of `*out_len` NUL-terminated strings; release it with
 * `rttqe_string_array_free`.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string; `out_tokens` and `out_len`
 * must be valid writable pointers.
 */
int rttqe_tokenize_13a(const char *text, char ***out_tokens, size_t *out_len);

/**
 * Release an array produced by `rttqe_tokenize_13a`. Null is ignored; `len`
 * must be the value the producing call wrote.
 *
 * # Safety
 * `tokens` must be null or an array previously returned by this library,
 * released at most once.
 */
void rttqe_string_array_free(char **tokens, size_t len);

/**
 * Pearson correlation coefficient of two aligned samples.
 *
 * # Safety
 * `x` and `y` must point to `len` doubles each; `out_r` must be a valid
 * writable pointer.
 */
int rttqe_pearson_r(const double *x, const double *y, size_t len, double *out_r);

/**
 * Kendall rank correlation (tau-b, tie-adjusted) of two aligned samples.
 *
 * # Safety
 * `x` and `y` must point to `len` doubles each; `out_tau` must be a valid
 * writable pointer.
 */
int rttqe_kendall_tau(const double *x, const double *y, size_t len, double *out_tau);

/**
 * Mean absolute error and root-mean-square error of predictions against
 * true values.
 *
 * # Safety
 * `pred` and `truth` must point to `len` doubles each; `out_mae` and
 * `out_rmse` must be valid writable pointers.
 */
int rttqe_error_stats(const double *pred,
                      const double *truth,
                      size_t len,
                      double *out_mae,
                      double *out_rmse);

/**
 * Load a predictor from a model file saved by the toolkit. On success
 * writes a handle to `*out`; the caller owns it.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid writable
 * pointer.
 */
int rttqe_predictor_load(const char *path, struct RttqePredictor **out);

/**
 * Number of features the predictor expects, or 0 for a null handle.
 *
 * # Safety
 * `predictor` must be null or a live handle from `rttqe_predictor_load`.
 */
size_t rttqe_predictor_feature_count(const struct RttqePredictor *predictor);

/**
 * Name of the metric the predictor was trained to estimate, as a static
 * string. Null for a null handle; do not free.
 *
 * # Safety
 * `predictor` must be null or a live handle from `rttqe_predictor_load`.
 */
const char *rttqe_predictor_target_metric(const struct RttqePredictor *predictor);

/**
 * Estimate the target metric from a feature vector. The vector length must
 * equal `rttqe_predictor_feature_count`; when `clamp` is true the estimate
 * is limited to the 0..100 score scale.
 *
 * # Safety
 * `predictor` must be a live handle, `features` must point to `len`
 * doubles, and `out_score` must be a valid writable pointer.
 */
int rttqe_predictor_predict(const struct RttqePredictor *predictor,
                            const double *features,
                            size_t len,
                            bool clamp,
                            double *out_score);

/**
 * Release a predictor handle. Null is ignored.
 *
 * # Safety
 * `predictor` must be null or a handle from `rttqe_predictor_load`,
 * released at most once.
 */
void rttqe_predictor_free(struct RttqePredictor *predictor);

/**
 * Partition the directed pairs of a benchmark with `train_test` languages
 * usable for training and `test_only` held-out languages into the three
 * evaluation classes (both sides seen, one side seen, neither side seen).
 * Each count must be at most 2048.
 *
 * # Safety
 * The three out pointers must be valid writable pointers.
 */
int rttqe_partition_counts(size_t train_test,
                           size_t test_only,
                           size_t *out_type_i,
                           size_t *out_type_ii,
                           size_t *out_type_iii);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RTT_QE_H */
