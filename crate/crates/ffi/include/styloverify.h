#ifndef STYLOVERIFY_H
#define STYLOVERIFY_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum SvStatus {
  SV_STATUS_OK = 0,
  SV_STATUS_NULL_POINTER = 1,
  SV_STATUS_INVALID_UTF8 = 2,
  SV_STATUS_INVALID_CONFIG = 3,
  SV_STATUS_INVALID_DATA = 4,
  SV_STATUS_CORRUPT_STORE = 5,
  SV_STATUS_VERSION_MISMATCH = 6,
  SV_STATUS_IO = 7,
  SV_STATUS_PANIC = 8,
} SvStatus;

// A loaded distance store.
typedef struct SvStore SvStore;

// A loaded n-gram vocabulary.
typedef struct SvVocab SvVocab;

typedef struct SvVerdict {
  bool same_author;
  double s_prob;
  double d_prob;
  double confidence;
  double distance;
} SvVerdict;

typedef struct SvMcNemar {
  double chi2;
  bool significant_at_05;
} SvMcNemar;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *sv_version(void);

// Message of the last failed call on this thread, or NULL. Valid until the
// next failing call on the same thread.
const char *sv_last_error(void);

// Loads a store file. The checksum and version are verified.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum SvStatus sv_store_load(const char *path, struct SvStore **out);

// Parses a store from an in-memory buffer.
//
// # Safety
// `data` must point to `len` readable bytes and `out` must be valid.
enum SvStatus sv_store_from_bytes(const uint8_t *data, size_t len, struct SvStore **out);

// Releases a store. NULL is ignored.
//
// # Safety
// `store` must come from `sv_store_load`/`sv_store_from_bytes` and not be
// used afterwards.
void sv_store_free(struct SvStore *store);

// Sizes of the same-author and different-author lists.
//
// # Safety
// All pointers must be valid.
enum SvStatus sv_store_counts(const struct SvStore *store, size_t *n_same, size_t *n_diff);

// Scores an already computed distance against the store.
//
// # Safety
// `store` and `out` must be valid.
enum SvStatus sv_classify_distance(const struct SvStore *store,
                                   double distance,
                                   struct SvVerdict *out);

// Loads a vocabulary file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum SvStatus sv_vocab_load(const char *path, struct SvVocab **out);

// Releases a vocabulary. NULL is ignored.
//
// # Safety
// `vocab` must come from `sv_vocab_load` and not be used afterwards.
void sv_vocab_free(struct SvVocab *vocab);

// Classifies two raw texts with TF-IDF features. The store must have been
// built without the embedding block (alpha 0).
//
// # Safety
// Handles and `out` must be valid; `a` and `b` NUL-terminated.
enum SvStatus sv_verify_texts(const struct SvStore *store,
                              const struct SvVocab *vocab,
                              const char *a,
                              const char *b,
                              struct SvVerdict *out);

// `exp(−mean(logprobs))` over natural-log token probabilities.
//
// # Safety
// `logprobs` must point to `len` doubles and `out` must be valid.
enum SvStatus sv_perplexity(const double *logprobs, size_t len, double *out);

// Mann–Whitney ROC AUC of positive against negative scores.
//
// # Safety
// Arrays must hold the stated number of doubles and `out` must be valid.
enum SvStatus sv_roc_auc(const double *pos,
                         size_t n_pos,
                         const double *neg,
                         size_t n_neg,
                         double *out);

// McNemar's statistic from the discordant counts.
//
// # Safety
// `out` must be valid.
enum SvStatus sv_mcnemar(uint64_t n01, uint64_t n10, struct SvMcNemar *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STYLOVERIFY_H */
