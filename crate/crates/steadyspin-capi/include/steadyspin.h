#ifndef STEADYSPIN_H
#define STEADYSPIN_H

/* generated by cbindgen from steadyspin-capi; do not edit by hand */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every ABI call.
 */
typedef enum ss_status {
  SS_OK = 0,
  SS_ERR_NULL_ARGUMENT = 1,
  SS_ERR_INVALID_ARGUMENT = 2,
  SS_ERR_NUMERIC = 3,
  SS_ERR_IO = 4,
} ss_status;

/**
 * Opaque steady-state handle.
 */
typedef struct ss_state ss_state;

/**
 * Scalar observables of a steady state.
 */
typedef struct ss_observables {
  double sx;
  double sy;
  double sz;
  double sx2;
  double var_x;
  double purity;
  double contrast;
  /**
   * squeezing parameter; meaningful only when `xi2_defined` is true
   */
  double xi2;
  bool xi2_defined;
} ss_observables;

/**
 * Location and depth of the optimal-squeezing minimum: exact Lambert-W
 * form plus the large-N logarithmic expansion.
 */
typedef struct ss_optimum {
  /**
   * zeta_min (SDM) or |eta|_min (CRF)
   */
  double parameter;
  double xi2_min;
  double parameter_expanded;
  double xi2_min_expanded;
} ss_optimum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing ABI call on the same thread.
 */
const char *ss_last_error(void);

/**
 * Exact squeezed-decay steady state (dark state for even N, mixed
 * resolvent for odd N). The handle must be released with `ss_state_free`.
 */
enum ss_status ss_state_new_sdm(uint32_t n, double zeta, struct ss_state **out);

/**
 * Exact driven-superradiance steady state.
 */
enum ss_status ss_state_new_crf(uint32_t n, double upsilon, struct ss_state **out);

/**
 * Releases a steady-state handle. Null is a no-op.
 *
 * # Safety
 * `state` must come from one of the `ss_state_new_*` constructors and not
 * have been freed yet.
 */
void ss_state_free(struct ss_state *state);

/**
 * Spin moments, purity and squeezing of the state.
 *
 * # Safety
 * `state` must be a live handle; `out` must point to writable memory.
 */
enum ss_status ss_state_observables(const struct ss_state *state, struct ss_observables *out);

/**
 * Tr(rho^2).
 *
 * # Safety
 * `state` must be a live handle; `out` must point to writable memory.
 */
enum ss_status ss_state_purity(const struct ss_state *state, double *out);

/**
 * Weight of the dominant eigenstate of the steady state.
 *
 * # Safety
 * `state` must be a live handle; `out` must point to writable memory.
 */
enum ss_status ss_state_dominant_weight(const struct ss_state *state, double *out);

/**
 * ln of the raw dominant resolvent eigenvalue; fails for states that do
 * not come from a resolvent factorization (even-N dark states).
 *
 * # Safety
 * `state` must be a live handle; `out` must point to writable memory.
 */
enum ss_status ss_state_log_lambda0(const struct ss_state *state, double *out);

/**
 * Writes the Husimi distribution of the state to `path` as CSV
 * (columns theta, phi, q; row-major in theta).
 *
 * # Safety
 * `state` must be a live handle; `path` must be a NUL-terminated string.
 */
enum ss_status ss_state_husimi_csv(const struct ss_state *state,
                                   uint32_t n_theta,
                                   uint32_t n_phi,
                                   const char *path);

/**
 * Observables straight from the fast linear-solve route, without keeping
 * a state handle around.
 *
 * # Safety
 * `out` must point to writable memory.
 */
enum ss_status ss_observables_sdm(uint32_t n, double zeta, struct ss_observables *out);

/**
 * CRF counterpart of `ss_observables_sdm`.
 *
 * # Safety
 * `out` must point to writable memory.
 */
enum ss_status ss_observables_crf(uint32_t n, double upsilon, struct ss_observables *out);

/**
 * Modified Bessel function I_order(x); `scaled` returns e^{-x} I_order(x).
 *
 * # Safety
 * `out` must point to writable memory.
 */
enum ss_status ss_bessel_i(uint32_t order, double x, bool scaled, double *out);

/**
 * W_{-1} branch of the Lambert function on (-1/e, 0).
 *
 * # Safety
 * `out` must point to writable memory.
 */
enum ss_status ss_lambert_w_minus1(double x, double *out);

/**
 * Squeezed-decay optimum (odd N >= 11).
 *
 * # Safety
 * `out` must point to writable memory.
 */
enum ss_status ss_sdm_optimum(uint32_t n, struct ss_optimum *out);

/**
 * Driven-superradiance optimum (N >= 10); `parameter` is |eta|_min.
 *
 * # Safety
 * `out` must point to writable memory.
 */
enum ss_status ss_crf_optimum(uint32_t n, struct ss_optimum *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STEADYSPIN_H */
