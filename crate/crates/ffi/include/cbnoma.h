#ifndef CBNOMA_H
#define CBNOMA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CbnomaStatus {
  CBNOMA_STATUS_OK = 0,
  CBNOMA_STATUS_NULL_POINTER = 1,
  CBNOMA_STATUS_INVALID_PARAMS = 2,
  CBNOMA_STATUS_DOMAIN = 3,
  CBNOMA_STATUS_NON_CONVERGENCE = 4,
  CBNOMA_STATUS_UNREACHABLE = 5,
  CBNOMA_STATUS_DEGENERATE_CHANNEL = 6,
  CBNOMA_STATUS_UNSUPPORTED_CONFIDENCE = 7,
  CBNOMA_STATUS_PANIC = 8,
} CbnomaStatus;

typedef enum CbnomaRegime {
  CBNOMA_REGIME_POWER_DIVERGES = 0,
  CBNOMA_REGIME_OUTAGE_SATURATES = 1,
  CBNOMA_REGIME_BALANCED = 2,
} CbnomaRegime;

/**
 * Opaque scenario handle.
 */
typedef struct CbnomaParams CbnomaParams;

/**
 * Optional values are NaN when absent.
 */
typedef struct CbnomaBoundReport {
  double p_tilde_lo;
  double p_upper;
  double p_asymptotic;
  bool asymptotic_valid;
  double p_out;
  double headline;
} CbnomaBoundReport;

typedef struct CbnomaChannelStats {
  double g1_sq;
  double g2_sq;
  double rho_sq;
} CbnomaChannelStats;

typedef struct CbnomaPowerSplit {
  double p_min;
  double p1;
  double p2;
  double sinr_user1_s1;
  double sinr_user1_s2;
  double sinr_user2_s2;
} CbnomaPowerSplit;

typedef struct CbnomaSimConfig {
  uint64_t trials;
  uint64_t seed;
  /**
   * Sample full channel vectors instead of their statistics.
   */
  bool vector_path;
  /**
   * 0.95 or 0.99.
   */
  double confidence;
  /**
   * Worker cap, 0 for the default pool.
   */
  uint32_t threads;
} CbnomaSimConfig;

typedef struct CbnomaSimResult {
  uint64_t trials;
  double mean_p_min;
  double ci_half_width;
  double empirical_outage;
  uint64_t n_transmit;
  uint64_t n_silent;
  uint64_t n_unreachable;
  bool diverged;
} CbnomaSimResult;

typedef struct CbnomaLimit {
  enum CbnomaRegime regime;
  double p_out_limit;
  double p_limit;
} CbnomaLimit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string. Do not free.
 */
const char *cbnoma_version(void);

/**
 * Message of the last failed call on this thread, or null if none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *cbnoma_last_error_message(void);

/**
 * Creates a scenario. All inputs are linear; `rho_th_sq` is the squared
 * correlation threshold.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum CbnomaStatus cbnoma_params_new(uint32_t m,
                                    double beta1,
                                    double beta2,
                                    double gamma1,
                                    double gamma2,
                                    double rho_th_sq,
                                    struct CbnomaParams **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `p` must be null or a handle from [`cbnoma_params_new`] not yet freed.
 */
void cbnoma_params_free(struct CbnomaParams *p);

/**
 * # Safety
 * `p` must be a live handle.
 */
enum CbnomaStatus cbnoma_params_set_rho_th_sq(struct CbnomaParams *p, double rho_th_sq);

/**
 * # Safety
 * `p` must be a live handle.
 */
enum CbnomaStatus cbnoma_params_set_m(struct CbnomaParams *p, uint32_t m);

/**
 * Lower bound on the average minimal power.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum CbnomaStatus cbnoma_p_tilde_lo(const struct CbnomaParams *p, double *out);

/**
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum CbnomaStatus cbnoma_p_upper(const struct CbnomaParams *p, double *out);

/**
 * Small-threshold expansion and its validity flag.
 *
 * # Safety
 * `p` must be a live handle; `out` and `valid` writable.
 */
enum CbnomaStatus cbnoma_p_asymptotic(const struct CbnomaParams *p, double *out, bool *valid);

/**
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum CbnomaStatus cbnoma_bound_report(const struct CbnomaParams *p, struct CbnomaBoundReport *out);

/**
 * Outage probability `1 - (1 - rho_th_sq)^(m-1)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum CbnomaStatus cbnoma_outage_probability(uint32_t m, double rho_th_sq, double *out);

/**
 * Density-quadrature value of the lower bound.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum CbnomaStatus cbnoma_lower_bound_oracle(const struct CbnomaParams *p, double *out);

/**
 * Minimal power for one realization; `CBNOMA_STATUS_UNREACHABLE` if no
 * finite power serves the weak user.
 *
 * # Safety
 * `p` must be a live handle, `stats` readable and `out` writable.
 */
enum CbnomaStatus cbnoma_p_min(const struct CbnomaParams *p,
                               const struct CbnomaChannelStats *stats,
                               double *out);

/**
 * # Safety
 * `p` must be a live handle, `stats` readable and `out` writable.
 */
enum CbnomaStatus cbnoma_optimal_split(const struct CbnomaParams *p,
                                       const struct CbnomaChannelStats *stats,
                                       struct CbnomaPowerSplit *out);

/**
 * Monte Carlo estimate. Results depend only on the scenario, `trials`,
 * `seed` and the sampling path.
 *
 * # Safety
 * `p` must be a live handle, `config` readable and `out` writable.
 */
enum CbnomaStatus cbnoma_simulate(const struct CbnomaParams *p,
                                  const struct CbnomaSimConfig *config,
                                  struct CbnomaSimResult *out);

/**
 * Large-array limits under the schedule `rho_th_sq = lambda / M^tau`.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum CbnomaStatus cbnoma_limit(const struct CbnomaParams *p,
                               double tau,
                               double lambda,
                               struct CbnomaLimit *out);

/**
 * `∫_x^1 (1-t)^(m-2) / t dt` for `0 < x <= 1`.
 *
 * # Safety
 * `out` must be writable.
 */
enum CbnomaStatus cbnoma_threshold_integral(double x, uint32_t m, double *out);

/**
 * `2F1(1, 1; m; z)` for `z <= 0`.
 *
 * # Safety
 * `out` must be writable.
 */
enum CbnomaStatus cbnoma_hyp2f1_11m(uint32_t m, double z, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum CbnomaStatus cbnoma_digamma(double x, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum CbnomaStatus cbnoma_exp_integral_e1(double x, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CBNOMA_H */
