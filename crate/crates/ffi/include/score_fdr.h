#ifndef SCORE_FDR_H
#define SCORE_FDR_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ScoreProcedureId {
  SCORE_PROCEDURE_ID_E_LOND = 0,
  SCORE_PROCEDURE_ID_SCORE_LOND = 1,
  SCORE_PROCEDURE_ID_E_LORD = 2,
  SCORE_PROCEDURE_ID_SCORE_LORD = 3,
  SCORE_PROCEDURE_ID_SCORE_PLUS_LORD = 4,
  SCORE_PROCEDURE_ID_E_SAFFRON = 5,
  SCORE_PROCEDURE_ID_SCORE_SAFFRON = 6,
  SCORE_PROCEDURE_ID_SCORE_PLUS_SAFFRON = 7,
  SCORE_PROCEDURE_ID_P_LOND = 8,
  SCORE_PROCEDURE_ID_P_LORD = 9,
  SCORE_PROCEDURE_ID_P_SAFFRON = 10,
} ScoreProcedureId;

typedef enum ScoreScheduleKind {
  // Use the procedure's default (or leave unset when it takes none).
  SCORE_SCHEDULE_KIND_DEFAULT = 0,
  // `a` is the constant.
  SCORE_SCHEDULE_KIND_CONSTANT = 1,
  // `a` is the ratio q.
  SCORE_SCHEDULE_KIND_GEOMETRIC = 2,
  // `a, b, c` are omega1, phi, psi.
  SCORE_SCHEDULE_KIND_RAI = 3,
} ScoreScheduleKind;

// Result codes. Zero is success.
typedef enum ScoreStatus {
  SCORE_STATUS_OK = 0,
  SCORE_STATUS_NULL_POINTER = 1,
  SCORE_STATUS_INVALID_PARAMETER = 2,
  SCORE_STATUS_EVIDENCE_KIND_MISMATCH = 3,
  SCORE_STATUS_NON_FINITE_EVIDENCE = 4,
  SCORE_STATUS_INDEX_ORDER = 5,
  SCORE_STATUS_WEALTH_UNDERFLOW = 6,
  SCORE_STATUS_DEGENERATE_CALIBRATION = 7,
  SCORE_STATUS_PANIC = 98,
  SCORE_STATUS_OTHER = 99,
} ScoreStatus;

// Opaque procedure handle.
typedef struct ScoreProcedure ScoreProcedure;

typedef struct ScoreSchedule {
  enum ScoreScheduleKind kind;
  double a;
  double b;
  double c;
} ScoreSchedule;

typedef struct ScoreProcedureConfig {
  enum ScoreProcedureId procedure;
  double alpha;
  struct ScoreSchedule gamma;
  struct ScoreSchedule omega;
  struct ScoreSchedule lambda;
} ScoreProcedureConfig;

// What one step recorded, plus the state after it.
typedef struct ScoreStepResult {
  uint64_t index;
  double alpha_t;
  // 1 when the hypothesis was rejected.
  uint8_t decision;
  double overshoot;
  double cost;
  uint64_t rejections;
  double fdp_hat;
  double wealth;
} ScoreStepResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Config for `procedure` at level `alpha` with default schedules.
struct ScoreProcedureConfig score_procedure_config_default(enum ScoreProcedureId procedure,
                                                           double alpha);

// Static, NUL-terminated name such as `"score-plus-lord"`.
const char *score_procedure_name(enum ScoreProcedureId procedure);

// 1 when the procedure consumes p-values, 0 for e-values.
uint8_t score_procedure_takes_pvalues(enum ScoreProcedureId procedure);

// Creates a procedure. On success `*out` owns a handle to release with
// [`score_procedure_free`].
//
// # Safety
// `config` must point to a valid config and `out` to writable storage.
enum ScoreStatus score_procedure_new(const struct ScoreProcedureConfig *config,
                                     struct ScoreProcedure **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `handle` must come from [`score_procedure_new`] and not be used again.
void score_procedure_free(struct ScoreProcedure *handle);

// The level the next step will test at.
//
// # Safety
// `handle` must be live and `out` writable.
enum ScoreStatus score_procedure_next_alpha(const struct ScoreProcedure *handle, double *out);

// Feeds one observation with an explicit, strictly increasing index.
// `value` is an e-value or a p-value according to the procedure. `out` may
// be null. On error the state is unchanged.
//
// # Safety
// `handle` must be live; `out` null or writable.
enum ScoreStatus score_procedure_step(struct ScoreProcedure *handle,
                                      uint64_t index,
                                      double value,
                                      struct ScoreStepResult *out);

// Rejections so far; 0 for a null handle.
//
// # Safety
// `handle` must be live or null.
uint64_t score_procedure_rejections(const struct ScoreProcedure *handle);

// Steps taken so far; 0 for a null handle.
//
// # Safety
// `handle` must be live or null.
uint64_t score_procedure_steps(const struct ScoreProcedure *handle);

// Remaining wealth `alpha - fdp_hat`; NaN for a null handle.
//
// # Safety
// `handle` must be live or null.
double score_procedure_wealth(const struct ScoreProcedure *handle);

// Vovk-Wang calibrator `e = (1 - p + p ln p) / (p (ln p)^2)`, p in (0, 1].
//
// # Safety
// `out` must be writable.
enum ScoreStatus score_vovk_p_to_e(double p, double *out);

// Conformal e-value of `test_score` against `n` calibration scores.
//
// # Safety
// `scores` must point to `n` readable doubles and `out` be writable.
enum ScoreStatus score_conformal_evalue(double test_score,
                                        const double *scores,
                                        size_t n,
                                        double *out);

// Message of the last failure on this thread; empty when none. The pointer
// stays valid until the next failing call on the same thread.
const char *score_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCORE_FDR_H */
