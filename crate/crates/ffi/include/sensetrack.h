#ifndef SENSETRACK_H
#define SENSETRACK_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum StStatus {
  ST_STATUS_OK = 0,
  ST_STATUS_NULL_POINTER = 1,
  ST_STATUS_INVALID_STRING = 2,
  ST_STATUS_VALIDATION = 3,
  ST_STATUS_NUMERIC = 4,
  ST_STATUS_PANIC = 5,
} StStatus;

/**
 * Opaque dynamic-programming solution handle.
 */
typedef struct StDpSolution StDpSolution;

/**
 * Opaque scenario handle.
 */
typedef struct StScenario StScenario;

/**
 * Monte Carlo summary.
 */
typedef struct StMetrics {
  double lambda;
  double amse;
  double amse_ci;
  double adp;
  double adp_ci;
  double aec;
  double aec_ci;
  size_t runs;
  size_t horizon;
} StMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Valid until the next failing call.
 */
const char *st_last_error(void);

/**
 * Parse a TOML scenario document.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum StStatus st_scenario_from_toml(const char *text, struct StScenario **out);

/**
 * Built-in scenario: `two_state_scalar`, `crossing`, `two_sensor` or `body_sensing_like`.
 *
 * # Safety
 * `kind` must be a NUL-terminated string and `out` a valid pointer.
 */
enum StStatus st_scenario_builtin(const char *kind, struct StScenario **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. NULL is ignored.
 */
void st_scenario_free(struct StScenario *s);

/**
 * # Safety
 * Pointers must be valid.
 */
enum StStatus st_scenario_num_states(const struct StScenario *s, size_t *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum StStatus st_scenario_num_controls(const struct StScenario *s, size_t *out);

/**
 * Replace the trade-off weight.
 *
 * # Safety
 * `s` must be a valid handle.
 */
enum StStatus st_scenario_set_lambda(struct StScenario *s, double lambda);

/**
 * Current cost of `control` at predicted belief `p[0..n]`.
 *
 * # Safety
 * `p` must point to `n` doubles; other pointers must be valid.
 */
enum StStatus st_current_cost(const struct StScenario *s,
                              const double *p,
                              size_t n,
                              size_t control,
                              double *out);

/**
 * One Kalman-like correction: `posterior[0..n]` from prediction `p[0..n]` and observation `y[0..d]`.
 *
 * # Safety
 * Arrays must have the stated lengths.
 */
enum StStatus st_kalman_update(const struct StScenario *s,
                               const double *p,
                               size_t n,
                               size_t control,
                               const double *y,
                               size_t d,
                               double *posterior);

/**
 * Myopic control at predicted belief `p[0..n]` for `stage ∈ [1, L]`.
 *
 * # Safety
 * `p` must point to `n` doubles; other pointers must be valid.
 */
enum StStatus st_myopic_decide(const struct StScenario *s,
                               const double *p,
                               size_t n,
                               size_t stage,
                               size_t *out);

/**
 * Backward induction on a grid of the given resolution with default quadrature.
 *
 * # Safety
 * Pointers must be valid.
 */
enum StStatus st_dp_solve(const struct StScenario *s, size_t resolution, struct StDpSolution **out);

/**
 * # Safety
 * `sol` must come from [`st_dp_solve`] and not be used afterwards. NULL is ignored.
 */
void st_dp_free(struct StDpSolution *sol);

/**
 * Policy (nearest grid point) at `p[0..n]` for `stage ∈ [1, L]`.
 *
 * # Safety
 * `p` must point to `n` doubles; other pointers must be valid.
 */
enum StStatus st_dp_policy(const struct StDpSolution *sol,
                           size_t stage,
                           const double *p,
                           size_t n,
                           size_t *out);

/**
 * Interpolated cost-to-go at `p[0..n]` for `stage ∈ [1, L]`.
 *
 * # Safety
 * `p` must point to `n` doubles; other pointers must be valid.
 */
enum StStatus st_dp_value(const struct StDpSolution *sol,
                          size_t stage,
                          const double *p,
                          size_t n,
                          double *out);

/**
 * Monte Carlo metrics of a strategy (`dp`, `myopic`, `ce-wwlb`, `ea:<count>`, `fixed:<id>`).
 *
 * # Safety
 * `strategy` must be a NUL-terminated string; other pointers must be valid.
 */
enum StStatus st_monte_carlo(const struct StScenario *s,
                             const char *strategy,
                             size_t runs,
                             uint64_t seed,
                             struct StMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SENSETRACK_H */
