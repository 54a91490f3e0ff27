#ifndef STRATTEST_H
#define STRATTEST_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum StStatus {
  ST_STATUS_OK = 0,
  ST_STATUS_NULL_POINTER = 1,
  ST_STATUS_INVALID_ARGUMENT = 2,
  ST_STATUS_SEQUENCE_TOO_SHORT = 3,
  ST_STATUS_NO_OBSERVATIONS = 4,
  ST_STATUS_ALPHABET_MISMATCH = 5,
  ST_STATUS_NUMERICAL = 6,
  ST_STATUS_PANIC = 7,
} StStatus;

typedef enum StDecision {
  /*
   Fail to reject: play is consistent with the target.
   */
  ST_DECISION_ACCEPT_H0 = 0,
  ST_DECISION_REJECT_H0 = 1,
} StDecision;

/*
 Opaque observed play sequence over actions `0..k`.
 */
typedef struct StSequence StSequence;

/*
 Opaque target mixed strategy over actions `0..k`.
 */
typedef struct StStrategy StStrategy;

typedef struct StRunsResult {
  uint64_t n;
  uint64_t r;
  /*
   Sum of squared counts, saturated at `UINT64_MAX`.
   */
  uint64_t q;
  /*
   Sum of cubed counts, saturated at `UINT64_MAX`.
   */
  uint64_t c;
  double mu;
  double sigma;
  double z;
  double p_value;
  bool degenerate;
} StRunsResult;

typedef struct StGofResult {
  double statistic;
  uint32_t df;
  double p_value;
  bool small_expected;
  bool zero_probability_violation;
  bool degenerate;
} StGofResult;

typedef struct StStrategyReport {
  struct StRunsResult runs;
  struct StGofResult gof;
  double alpha;
  enum StDecision decision;
  bool rejected_by_runs;
  bool rejected_by_chi2;
} StStrategyReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call into this library on the same thread.
 */
const char *st_last_error(void);

/*
 Static description of a status code.
 */
const char *st_status_message(enum StStatus status);

/*
 Creates a sequence of `len` action indices, each in `[0, k)`.

 # Safety
 `items` must point to `len` readable values (or be null when `len` is 0);
 `out` must be valid for writes.
 */
enum StStatus st_sequence_new(const uint32_t *items,
                              size_t len,
                              uint32_t k,
                              struct StSequence **out);

/*
 # Safety
 `seq` must be null or a handle from [`st_sequence_new`] not yet freed.
 */
void st_sequence_free(struct StSequence *seq);

/*
 Number of plays, or 0 for a null handle.

 # Safety
 `seq` must be null or a live handle.
 */
size_t st_sequence_len(const struct StSequence *seq);

/*
 Writes the count of each action into `counts[0..k]`.

 # Safety
 `seq` must be a live handle; `counts` must be valid for `k` writes.
 */
enum StStatus st_sequence_counts(const struct StSequence *seq, uint64_t *counts, size_t k);

/*
 Creates a mixed strategy from `k` probabilities summing to 1.

 # Safety
 `probs` must point to `k` readable values; `out` must be valid for writes.
 */
enum StStatus st_strategy_new(const double *probs, size_t k, struct StStrategy **out);

/*
 # Safety
 `strategy` must be null or a handle from [`st_strategy_new`] not yet freed.
 */
void st_strategy_free(struct StStrategy *strategy);

/*
 # Safety
 `seq` must be a live handle; `out` valid for writes.
 */
enum StStatus st_count_runs(const struct StSequence *seq, uint64_t *out);

/*
 # Safety
 `seq` must be a live handle; `out` valid for writes.
 */
enum StStatus st_runs_test(const struct StSequence *seq, struct StRunsResult *out);

/*
 # Safety
 `target` and `seq` must be live handles; `out` valid for writes.
 */
enum StStatus st_chi_squared_gof(const struct StStrategy *target,
                                 const struct StSequence *seq,
                                 struct StGofResult *out);

/*
 Combined test: rejects when either subtest has `p <= alpha / 2`.

 # Safety
 `target` and `seq` must be live handles; `out` valid for writes.
 */
enum StStatus st_strategy_test(const struct StStrategy *target,
                               const struct StSequence *seq,
                               double alpha,
                               struct StStrategyReport *out);

/*
 # Safety
 `out` must be valid for writes.
 */
enum StStatus st_std_normal_cdf(double z, double *out);

/*
 # Safety
 `out` must be valid for writes.
 */
enum StStatus st_chi_squared_sf(double t, uint32_t df, double *out);

/*
 Library version as a static NUL-terminated string.
 */
const char *st_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STRATTEST_H */
