#ifndef SPARSE_AL_H
#define SPARSE_AL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum SaStatus {
  SA_STATUS_OK = 0,
  SA_STATUS_NULL_POINTER = 1,
  SA_STATUS_INVALID_ARGUMENT = 2,
  SA_STATUS_DIMENSION_MISMATCH = 3,
  SA_STATUS_BUDGET_EXCEEDS_POOL = 4,
  SA_STATUS_PROBLEM_TOO_LARGE = 5,
  SA_STATUS_DEGENERATE_DIRECTION = 6,
  SA_STATUS_INTERNAL = 7,
} SaStatus;

/**
 * An acquisition problem `(v, Φ, σ², α, β, b)`.
 */
typedef struct SaProblem SaProblem;

/**
 * A solver outcome: weights, objective and selected batch.
 */
typedef struct SaResult SaResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or null if none.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *sa_last_error_message(void);

/**
 * Builds a problem from explicit data.
 *
 * `v` has `m` entries, `phi` has `m * n` entries in column-major order and
 * `sigma2` has `n` entries.
 *
 * # Safety
 * Every pointer must be valid for the stated number of reads, and `out`
 * must be writable.
 */
enum SaStatus sa_problem_new(size_t m,
                             size_t n,
                             const double *v,
                             const double *phi,
                             const double *sigma2,
                             double alpha,
                             double beta,
                             size_t b,
                             struct SaProblem **out);

/**
 * Assembles a problem from per-label embeddings and label probabilities.
 *
 * `embeddings` holds `n * k * d` doubles in row-major `[candidate][label][dim]`
 * order and `probs` holds `n * k` row-stochastic doubles.
 *
 * # Safety
 * Every pointer must be valid for the stated number of reads, and `out`
 * must be writable.
 */
enum SaStatus sa_problem_assemble(size_t n,
                                  size_t k,
                                  size_t d,
                                  const double *embeddings,
                                  const double *probs,
                                  double alpha,
                                  double beta,
                                  size_t b,
                                  struct SaProblem **out);

/**
 * Embedding dimension `m` of a problem, or 0 for a null handle.
 *
 * # Safety
 * `problem` must be null or a live handle from this library.
 */
size_t sa_problem_m(const struct SaProblem *problem);

/**
 * Pool size `n` of a problem, or 0 for a null handle.
 *
 * # Safety
 * `problem` must be null or a live handle from this library.
 */
size_t sa_problem_n(const struct SaProblem *problem);

/**
 * Releases a problem. Null is ignored.
 *
 * # Safety
 * `problem` must be null or a live handle that is not used afterwards.
 */
void sa_problem_free(struct SaProblem *problem);

/**
 * Greedy forward selection with scoring step `tau`.
 *
 * # Safety
 * `problem` must be a live handle and `out` writable.
 */
enum SaStatus sa_solve_greedy(const struct SaProblem *problem, double tau, struct SaResult **out);

/**
 * Proximal iterative hard thresholding.
 *
 * `stall_tolerance` of 0 runs the full `iterations`. Setting
 * `paper_literal_prox` ranks thresholding candidates without the cost of
 * leaving them out.
 *
 * # Safety
 * `problem` must be a live handle and `out` writable.
 */
enum SaStatus sa_solve_iht(const struct SaProblem *problem,
                           size_t iterations,
                           double stall_tolerance,
                           bool paper_literal_prox,
                           struct SaResult **out);

/**
 * Exhaustive search over supports; refuses large instances.
 *
 * # Safety
 * `problem` must be a live handle and `out` writable.
 */
enum SaStatus sa_solve_oracle(const struct SaProblem *problem, struct SaResult **out);

/**
 * Objective value `f1 + f2` at the returned weights, NaN for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double sa_result_objective(const struct SaResult *result);

/**
 * Length of the weight vector, 0 for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t sa_result_len(const struct SaResult *result);

/**
 * Number of selected indices, 0 for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t sa_result_selected_len(const struct SaResult *result);

/**
 * Copies the weights into `buf`, which must hold `sa_result_len` doubles.
 *
 * # Safety
 * `result` must be a live handle and `buf` valid for `capacity` writes.
 */
enum SaStatus sa_result_weights(const struct SaResult *result, double *buf, size_t capacity);

/**
 * Copies the selected indices into `buf`, which must hold
 * `sa_result_selected_len` entries.
 *
 * # Safety
 * `result` must be a live handle and `buf` valid for `capacity` writes.
 */
enum SaStatus sa_result_selected(const struct SaResult *result, size_t *buf, size_t capacity);

/**
 * Releases a result. Null is ignored.
 *
 * # Safety
 * `result` must be null or a live handle that is not used afterwards.
 */
void sa_result_free(struct SaResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPARSE_AL_H */
