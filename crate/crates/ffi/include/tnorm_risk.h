#ifndef TNORM_RISK_H
#define TNORM_RISK_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Status code returned by every fallible function.
typedef enum TnrStatus {
  TNR_STATUS_OK = 0,
  TNR_STATUS_NULL_POINTER = 1,
  TNR_STATUS_INVALID_UTF8 = 2,
  TNR_STATUS_INVALID_ARGUMENT = 3,
  TNR_STATUS_PARSE = 4,
  TNR_STATUS_VALIDATION = 5,
  TNR_STATUS_IO = 6,
  TNR_STATUS_PANIC = 7,
} TnrStatus;

// Opaque dataset handle.
typedef struct TnrDataset TnrDataset;

// Opaque rule set handle.
typedef struct TnrRuleSet TnrRuleSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *tnr_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void tnr_string_free(char *s);

// The built-in rule set. Never returns null.
struct TnrRuleSet *tnr_ruleset_default(void);

// Loads and validates a JSON rule file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum TnrStatus tnr_ruleset_load(const char *path, struct TnrRuleSet **out);

// Number of rules in the set, or 0 for null.
//
// # Safety
// `rules` must be null or a live handle.
size_t tnr_ruleset_len(const struct TnrRuleSet *rules);

// # Safety
// `rules` must be null or a handle from this library, freed at most once.
void tnr_ruleset_free(struct TnrRuleSet *rules);

// Binary t-norm `T(a, b)`. `kind` is one of `lukasiewicz`, `product`,
// `goedel`, `logproduct`.
//
// # Safety
// `kind` must be a NUL-terminated string; `out` must be writable.
enum TnrStatus tnr_tnorm_apply(const char *kind, double a, double b, double *out);

// Left fold of `len` scores.
//
// # Safety
// `scores` must point to `len` readable doubles; `out` must be writable.
enum TnrStatus tnr_fold_chain(const char *kind, const double *scores, size_t len, double *out);

// Classifies one case given as JSON (`{"case_id": ..., "scores": {...}}`)
// and returns the outcome with its proof trail as JSON. A null `kind`
// selects mixed semantics; a NaN `theta` keeps each rule's own threshold.
//
// # Safety
// `rules` must be a live handle, `case_json` a NUL-terminated string, `kind`
// null or NUL-terminated, and `out_json` writable.
enum TnrStatus tnr_classify_json(const struct TnrRuleSet *rules,
                                 const char *case_json,
                                 const char *kind,
                                 double theta,
                                 char **out_json);

// Loads a JSONL benchmark, validating conditions against `rules`.
//
// # Safety
// `path` must be NUL-terminated, `rules` a live handle, `out` writable.
enum TnrStatus tnr_dataset_load(const char *path,
                                const struct TnrRuleSet *rules,
                                struct TnrDataset **out);

// Deterministic synthetic benchmark of `n` cases.
//
// # Safety
// `rules` must be a live handle and `out` writable.
enum TnrStatus tnr_dataset_generate(size_t n,
                                    uint64_t seed,
                                    const struct TnrRuleSet *rules,
                                    struct TnrDataset **out);

// Number of cases, or 0 for null.
//
// # Safety
// `dataset` must be null or a live handle.
size_t tnr_dataset_len(const struct TnrDataset *dataset);

// Writes the dataset as JSONL.
//
// # Safety
// `dataset` must be a live handle and `out_jsonl` writable.
enum TnrStatus tnr_dataset_to_jsonl(const struct TnrDataset *dataset, char **out_jsonl);

// # Safety
// `dataset` must be null or a handle from this library, freed at most once.
void tnr_dataset_free(struct TnrDataset *dataset);

// Evaluation report (accuracy, directional errors, confusion matrix) as
// JSON. `kind` and `theta` behave as in [`tnr_classify_json`].
//
// # Safety
// `dataset` and `rules` must be live handles, `kind` null or NUL-terminated,
// `out_json` writable.
enum TnrStatus tnr_evaluate_json(const struct TnrDataset *dataset,
                                 const struct TnrRuleSet *rules,
                                 const char *kind,
                                 double theta,
                                 char **out_json);

// Exact McNemar test from discordant counts `b` (A right, B wrong) and `c`.
//
// # Safety
// `p_one_sided` and `p_two_sided` must be writable.
enum TnrStatus tnr_mcnemar(size_t b, size_t c, double *p_one_sided, double *p_two_sided);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TNORM_RISK_H */
