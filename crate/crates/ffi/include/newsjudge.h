/* C interface to the newsjudge evaluation primitives. */

#ifndef NEWSJUDGE_H
#define NEWSJUDGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. Values above `NjStatusParseNoList` mirror the parser's
// failure reasons.
typedef enum NjStatus {
  NJ_STATUS_OK = 0,
  NJ_STATUS_NULL_ARGUMENT = 1,
  NJ_STATUS_INVALID_UTF8 = 2,
  NJ_STATUS_INDEX_OUT_OF_RANGE = 3,
  NJ_STATUS_NOT_ANSWERED = 4,
  NJ_STATUS_INVALID_ARGUMENT = 5,
  NJ_STATUS_PARSE_NO_LIST = 10,
  NJ_STATUS_PARSE_WRONG_ARITY = 11,
  NJ_STATUS_PARSE_OUT_OF_RANGE = 12,
  NJ_STATUS_PARSE_MALFORMED_ELEMENT = 13,
} NjStatus;

// Confidence levels as stated by the model.
typedef enum NjConfidence {
  NJ_CONFIDENCE_HIGH = 0,
  NJ_CONFIDENCE_MEDIUM = 1,
  NJ_CONFIDENCE_LOW = 2,
  NJ_CONFIDENCE_UNSTATED = 3,
} NjConfidence;

// Threshold orientation: scale-consistent calls q6 >= threshold Fake.
typedef enum NjOrientation {
  NJ_ORIENTATION_SCALE_CONSISTENT = 0,
  NJ_ORIENTATION_PAPER_LITERAL = 1,
} NjOrientation;

// Verdicts produced by the threshold rule.
typedef enum NjVerdict {
  NJ_VERDICT_REAL = 0,
  NJ_VERDICT_FAKE = 1,
  NJ_VERDICT_REJECTED = 2,
} NjVerdict;

// Opaque parsed evaluation handle.
typedef struct NjEvaluation NjEvaluation;

// Headline rates computed from confusion counts. Undefined rates (0/0)
// are NaN.
typedef struct NjMetrics {
  uint64_t total;
  double recall;
  double specificity;
  double precision;
  double f1;
  double accuracy;
  double rejection_rate;
} NjMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static string; do not free.
const char *nj_version(void);

// SHA-256 hex digest of the shipped rubric prompt. Free with
// [`nj_string_free`].
char *nj_prompt_digest(void);

// Parses a model reply. On success writes a handle to `out_eval`; on a
// parse failure returns the matching `NjStatusParse*` code and writes NULL.
//
// # Safety
// `text` must be a valid NUL-terminated string and `out_eval` a valid
// pointer; the returned handle must be freed with [`nj_evaluation_free`].
enum NjStatus nj_parse_response(const char *text, struct NjEvaluation **out_eval);

// Reads rating `index` (0..=5, question order). Unanswered ratings return
// `NjStatusNotAnswered` and leave `out_value` untouched.
//
// # Safety
// `eval` must be a live handle from [`nj_parse_response`]; `out_value`
// must be a valid pointer.
enum NjStatus nj_evaluation_rating(const struct NjEvaluation *eval,
                                   size_t index,
                                   double *out_value);

// Stated confidence of a parsed evaluation.
//
// # Safety
// `eval` must be a live handle or NULL (NULL reads as Unstated).
enum NjConfidence nj_evaluation_confidence(const struct NjEvaluation *eval);

// Explanation text; empty string when the reply had none. Free with
// [`nj_string_free`]. NULL on a NULL handle or interior NUL.
//
// # Safety
// `eval` must be a live handle or NULL.
char *nj_evaluation_explanation(const struct NjEvaluation *eval);

// Applies the threshold rule to the parsed scores. `fake_threshold` must
// lie in (0, 9]. An unanswered q6 yields `NjVerdictRejected`.
//
// # Safety
// `eval` must be a live handle; `out_verdict` a valid pointer.
enum NjStatus nj_evaluation_classify(const struct NjEvaluation *eval,
                                     double fake_threshold,
                                     enum NjOrientation orientation,
                                     enum NjVerdict *out_verdict);

// Frees a handle from [`nj_parse_response`]. NULL is a no-op.
//
// # Safety
// `eval` must be a handle previously returned by this library and not yet
// freed.
void nj_evaluation_free(struct NjEvaluation *eval);

// Confidence extraction over arbitrary reply text.
//
// # Safety
// `text` must be a valid NUL-terminated string (NULL reads as Unstated).
enum NjConfidence nj_extract_confidence(const char *text);

// Computes the headline rates from confusion counts. Real news is the
// positive class; rejected items stay in the accuracy and rejection-rate
// denominators only. Undefined rates come back as NaN.
//
// # Safety
// `out_metrics` must be a valid pointer.
enum NjStatus nj_metrics_compute(uint64_t tp,
                                 uint64_t tn,
                                 uint64_t fp,
                                 uint64_t fn_,
                                 uint64_t rejected,
                                 struct NjMetrics *out_metrics);

// Variability over a row-major verdict grid (`reps` rows of `items` cells,
// cell values are `NjVerdict` as i32). All rejections compare equal. Writes
// the disagreement rate to `out_rate` and, when `out_indicators` is not
// NULL, one 0/1 flag per item.
//
// # Safety
// `verdicts` must point to `reps * items` readable i32 values;
// `out_indicators`, when non-NULL, to `items` writable bytes.
enum NjStatus nj_variability_rate(const int32_t *verdicts,
                                  size_t reps,
                                  size_t items,
                                  double *out_rate,
                                  uint8_t *out_indicators);

// Frees a string returned by this library. NULL is a no-op.
//
// # Safety
// `s` must come from this library and not be freed twice.
void nj_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NEWSJUDGE_H */
