#ifndef CLEANERS_H
#define CLEANERS_H

/* Generated from the cleaners-ffi crate by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible call.
typedef enum {
  CC_STATUS_OK = 0,
  // A required pointer argument was null.
  CC_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  CC_STATUS_UTF8 = 2,
  // A parameter was outside its documented domain.
  CC_STATUS_INVALID_PARAM = 3,
  // The area bound needs more tiles than agents (s > k fails).
  CC_STATUS_BOUND_DOMAIN = 4,
  // Spread outpaces the team for these parameters, so no finite
  // cleaning-time bound exists.
  CC_STATUS_GROWTH_REGIME = 5,
  // The trajectory from s0 to the target crosses between shrinking and
  // growing regimes, so the closed form does not apply.
  CC_STATUS_MIXED_REGIME = 6,
  // The initial size sits at or below the impossibility threshold.
  CC_STATUS_BELOW_THRESHOLD = 7,
  // No point of the requested sweep was feasible.
  CC_STATUS_ALL_INFEASIBLE = 8,
  // The config text failed to parse.
  CC_STATUS_CONFIG_PARSE = 9,
  // The config parsed but its values are inconsistent.
  CC_STATUS_CONFIG_VALIDATION = 10,
  // An internal invariant was violated; treat results as unusable.
  CC_STATUS_INVARIANT_BREACH = 11,
  // The addressed tile is not contaminated.
  CC_STATUS_NOT_CONTAMINATED = 12,
  // The operation needs a non-empty region.
  CC_STATUS_EMPTY_REGION = 13,
  // An index argument was past the end of the collection.
  CC_STATUS_OUT_OF_RANGE = 14,
  CC_STATUS_IO = 15,
  // A panic was caught at the boundary.
  CC_STATUS_PANIC = 16,
} CcStatus;

// Finished simulation batch handle.
typedef struct CcBatch CcBatch;

// Recursion curve handle.
typedef struct CcCurve CcCurve;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread. The pointer stays
// valid until the next failing call on the same thread; never free it.
const char *cc_last_error(void);

// Library version as a static NUL-terminated string; never free it.
const char *cc_version(void);

// Frees a string returned by this library. Accepts null.
//
// # Safety
// `s` must have been returned by a `cc_*_csv` function and not freed yet.
void cc_string_free(char *s);

// Least possible potential boundary of a region of `s` tiles with `k`
// agents already subtracted: floor(2 sqrt(2(s - k) - 1)).
CcStatus cc_sphere_potential_size(uint64_t s, uint64_t k, uint64_t *out);

// Probability that one spread step stays at or above its floor:
// 1 - exp(-delta^2 p sqrt(2(s - k) - 1)).
CcStatus cc_step_probability(uint64_t s, uint64_t k, double p, double delta, double *out);

// Largest initial size with no persistence guarantee at zero slack.
CcStatus cc_impossibility_threshold(uint64_t k, double p, uint64_t *out);

// Impossibility threshold at slack `delta` in [0, 1).
CcStatus cc_delta_threshold(uint64_t k, double p, double delta, uint64_t *out);

// Probability that a region starting above the slack-adjusted threshold is
// still at or above its initial size after `t` steps.
CcStatus cc_impossibility_probability(uint64_t s0,
                                      uint64_t k,
                                      double p,
                                      double delta,
                                      uint64_t t,
                                      double *out);

// Closed-form bound on the steps to shrink from `s0` to `s_hat`, with the
// probability the guarantee holds.
CcStatus cc_closed_form_time(uint64_t s0,
                             uint64_t k,
                             double p,
                             double delta,
                             uint64_t s_hat,
                             double *out_tau,
                             uint64_t *out_t_ceil,
                             double *out_q_bound);

// Smallest reachable target area whose guarantee still meets `q_target`,
// or `found = false` when no target is feasible at this slack.
CcStatus cc_minimal_s_hat(uint64_t s0,
                          uint64_t k,
                          double p,
                          double q_target,
                          double delta,
                          uint64_t *out_s_hat,
                          bool *out_found);

// Builds the area lower-bound recursion curve from `s0` down to `s_hat`
// (at most `max_steps` points past the start). Free with
// `cc_bound_curve_free`.
CcStatus cc_bound_curve_new(uint64_t s0,
                            uint64_t k,
                            double p,
                            double delta,
                            uint64_t s_hat,
                            uint64_t max_steps,
                            CcCurve **out);

// Number of points on the curve (the start point included).
CcStatus cc_bound_curve_len(const CcCurve *curve, uint64_t *out);

// Reads one curve point: time, area floor, per-step probability, and the
// cumulative guarantee up to that step.
CcStatus cc_bound_curve_point(const CcCurve *curve,
                              uint64_t index,
                              uint64_t *out_t,
                              uint64_t *out_s_lower,
                              double *out_q_step,
                              double *out_q_cum);

// First step whose area floor is at or below `s_hat`; `found = false`
// when the curve never reaches it.
CcStatus cc_bound_curve_first_passage(const CcCurve *curve,
                                      uint64_t s_hat,
                                      uint64_t *out_t,
                                      bool *out_found);

// Frees a curve handle. Accepts null.
//
// # Safety
// `curve` must come from `cc_bound_curve_new` and not be freed twice.
void cc_bound_curve_free(CcCurve *curve);

// Parses a run config from its key-value text form and runs the full
// seeded batch. Free the handle with `cc_batch_free`.
CcStatus cc_simulate(const char *config_text, CcBatch **out);

// Replications in the batch.
CcStatus cc_batch_n_runs(const CcBatch *batch, uint64_t *out);

// Runs that cleaned everything before the cutoff.
CcStatus cc_batch_n_success(const CcBatch *batch, uint64_t *out);

// Runs that stopped on an internal error; their streams are excluded from
// the statistics.
CcStatus cc_batch_n_aborted(const CcBatch *batch, uint64_t *out);

// Success fraction in [0, 1].
CcStatus cc_batch_success_pct(const CcBatch *batch, double *out);

// 95% score interval for the success fraction.
CcStatus cc_batch_success_interval(const CcBatch *batch, double *out_low, double *out_high);

// Mean steps to success, or NaN when no run succeeded.
CcStatus cc_batch_mean_t_success(const CcBatch *batch, double *out);

// Reads one run record: its RNG stream, whether it succeeded, the success
// step (0 on failure), the final area (0 on success), and the holes the
// spread opened along the way.
CcStatus cc_batch_run(const CcBatch *batch,
                      uint64_t index,
                      uint64_t *out_stream,
                      bool *out_success,
                      uint64_t *out_t_success,
                      uint64_t *out_final_s,
                      uint64_t *out_holes);

// Per-run table in CSV form. Free with `cc_string_free`.
CcStatus cc_batch_runs_csv(const CcBatch *batch, char **out);

// Aggregate statistics table in CSV form. Free with `cc_string_free`.
CcStatus cc_batch_aggregate_csv(const CcBatch *batch, char **out);

// Frees a batch handle. Accepts null.
//
// # Safety
// `batch` must come from `cc_simulate` and not be freed twice.
void cc_batch_free(CcBatch *batch);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CLEANERS_H */
