#ifndef TWOCENTER_H
#define TWOCENTER_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TcAlgorithm {
  TC_ALGORITHM_AUTO = 0,
  TC_ALGORITHM_CUBIC = 1,
  TC_ALGORITHM_IMPROVED = 2,
  TC_ALGORITHM_BRUTEFORCE = 3,
} TcAlgorithm;

typedef enum TcOutcome {
  TC_OUTCOME_STRICTLY_COVERABLE = 0,
  TC_OUTCOME_EXACTLY_CRITICAL = 1,
  TC_OUTCOME_NOT_COVERABLE = 2,
} TcOutcome;

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum TcStatus {
  TC_STATUS_OK = 0,
  TC_STATUS_NULL_POINTER = 1,
  TC_STATUS_INVALID_ARGUMENT = 2,
  TC_STATUS_EMPTY_INPUT = 3,
  TC_STATUS_DEGENERATE = 4,
  TC_STATUS_BOUND_VIOLATED = 5,
  TC_STATUS_INTERNAL = 6,
  TC_STATUS_PANIC = 7,
} TcStatus;

/**
 * Opaque point set.
 */
typedef struct TcInstance TcInstance;

/**
 * Opaque solve result.
 */
typedef struct TcSolution TcSolution;

/**
 * Solver options; obtain defaults from [`tc_config_default`].
 */
typedef struct TcConfig {
  enum TcAlgorithm algorithm;
  double epsilon;
  uint32_t rho;
  uint64_t seed;
  double eps_abs;
  double eps_rel;
} TcConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default solver options.
 */
struct TcConfig tc_config_default(void);

/**
 * Static description of a status code.
 */
const char *tc_status_message(enum TcStatus status);

/**
 * Creates an instance from `n` points stored as `xyz[3i..3i+3]`.
 *
 * # Safety
 * `xyz` must point to `3 * n` readable doubles and `out` must be writable.
 */
enum TcStatus tc_instance_new(const double *xyz, size_t n, struct TcInstance **out);

/**
 * Releases an instance; null is ignored.
 *
 * # Safety
 * `inst` must come from [`tc_instance_new`] and not be used afterwards.
 */
void tc_instance_free(struct TcInstance *inst);

/**
 * Number of points, or 0 for null.
 *
 * # Safety
 * `inst` must be null or a live instance.
 */
size_t tc_instance_len(const struct TcInstance *inst);

/**
 * Decides whether two balls of radius `r` cover the instance.
 *
 * # Safety
 * `inst` must be a live instance, `config` null or readable, and `out`
 * writable.
 */
enum TcStatus tc_decide(const struct TcInstance *inst,
                        double r,
                        const struct TcConfig *config,
                        enum TcOutcome *out);

/**
 * Solves the instance; on success `*out` owns a new solution handle.
 *
 * # Safety
 * `inst` must be a live instance, `config` null or readable, and `out`
 * writable.
 */
enum TcStatus tc_solve(const struct TcInstance *inst,
                       const struct TcConfig *config,
                       struct TcSolution **out);

/**
 * Optimal (or, when approximate, enclosing) radius; NaN for null.
 *
 * # Safety
 * `sol` must be null or a live solution.
 */
double tc_solution_radius(const struct TcSolution *sol);

/**
 * Whether the solution is the enclosing-ball approximation.
 *
 * # Safety
 * `sol` must be null or a live solution.
 */
bool tc_solution_is_approximate(const struct TcSolution *sol);

/**
 * Writes both centers as six doubles `c1.xyz, c2.xyz`.
 *
 * # Safety
 * `sol` must be a live solution and `out` must hold six doubles.
 */
enum TcStatus tc_solution_centers(const struct TcSolution *sol, double *out);

/**
 * Writes the ball index (0 or 1) of every point into `out[0..len]`;
 * `len` must equal the instance size.
 *
 * # Safety
 * `sol` must be a live solution and `out` must hold `len` bytes.
 */
enum TcStatus tc_solution_partition(const struct TcSolution *sol, uint8_t *out, size_t len);

/**
 * Releases a solution; null is ignored.
 *
 * # Safety
 * `sol` must come from [`tc_solve`] and not be used afterwards.
 */
void tc_solution_free(struct TcSolution *sol);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TWOCENTER_H */
