#ifndef BSRELAY_H
#define BSRELAY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BsrStatus {
  BSR_STATUS_OK = 0,
  BSR_STATUS_NULL_POINTER = 1,
  BSR_STATUS_INVALID_ARGUMENT = 2,
  BSR_STATUS_CONFIG = 3,
  BSR_STATUS_DOMAIN = 4,
  BSR_STATUS_NO_CROSSING = 5,
  BSR_STATUS_BRACKET_FAILURE = 6,
  BSR_STATUS_IO = 7,
  BSR_STATUS_PANIC = 8,
} BsrStatus;

typedef enum BsrPreset {
  BSR_PRESET_PERFECT_OOK = 0,
  BSR_PRESET_BISTATIC = 1,
} BsrPreset;

typedef enum BsrScheme {
  BSR_SCHEME_DF = 0,
  BSR_SCHEME_AF = 1,
} BsrScheme;

typedef enum BsrThresholdKind {
  BSR_THRESHOLD_KIND_OPTIMAL = 0,
  BSR_THRESHOLD_KIND_GAUSSIAN = 1,
  BSR_THRESHOLD_KIND_SIMPLE = 2,
} BsrThresholdKind;

/**
 * Receiver whose thresholds are requested.
 */
typedef enum BsrLink {
  BSR_LINK_DF_RELAY = 0,
  BSR_LINK_DF_DEST = 1,
  BSR_LINK_AF = 2,
} BsrLink;

/**
 * Opaque system parameter set.
 */
typedef struct BsrParams BsrParams;

/**
 * Thresholds of one receiver. `t_optimal` is NaN when the two hypotheses
 * cannot be told apart.
 */
typedef struct BsrThresholds {
  double t_optimal;
  double t_gaussian;
  double t_simple;
  uint8_t bit_of_high_energy;
} BsrThresholds;

typedef struct BsrAllocation {
  double p_slot1_w;
  double p_slot2_w;
  double ber;
  double ber_relay;
  double ber_dest;
} BsrAllocation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. The pointer stays valid
 * until the next failing call on the same thread.
 */
const char *bsr_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *bsr_version(void);

/**
 * New parameter set with default values.
 */
struct BsrParams *bsr_params_new(void);

/**
 * # Safety
 * `params` must come from this library and not be used afterwards. Null is
 * ignored.
 */
void bsr_params_free(struct BsrParams *params);

/**
 * Parses a TOML parameter document into a new handle.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a writable pointer.
 */
enum BsrStatus bsr_params_from_toml(const char *toml, struct BsrParams **out);

/**
 * Sets one real-valued field by its configuration name, e.g.
 * `"power_budget_dbm"`, `"gamma0_re"`. The resulting set must validate.
 *
 * # Safety
 * `params` must be a live handle and `key` a NUL-terminated string.
 */
enum BsrStatus bsr_params_set(struct BsrParams *params, const char *key, double value);

/**
 * # Safety
 * `params` must be a live handle.
 */
enum BsrStatus bsr_params_set_preset(struct BsrParams *params, enum BsrPreset preset);

/**
 * Reads one real-valued top-level field by its configuration name.
 *
 * # Safety
 * `params` must be a live handle, `key` a NUL-terminated string and `out`
 * writable.
 */
enum BsrStatus bsr_params_get(const struct BsrParams *params, const char *key, double *out);

/**
 * BER at unit channel gains. For DF, `optimize_allocation` selects the
 * optimal split; otherwise the configured `power_slot1_dbm` is used.
 *
 * # Safety
 * `params` must be a live handle and `out` writable.
 */
enum BsrStatus bsr_analytic_ber(const struct BsrParams *params,
                                enum BsrScheme scheme,
                                enum BsrThresholdKind threshold,
                                bool optimize_allocation,
                                double *out);

/**
 * Thresholds of one receiver at unit channel gains.
 *
 * # Safety
 * `params` must be a live handle and `out` writable.
 */
enum BsrStatus bsr_thresholds(const struct BsrParams *params,
                              enum BsrLink link,
                              struct BsrThresholds *out);

/**
 * Optimal DF split at unit channel gains.
 *
 * # Safety
 * `params` must be a live handle and `out` writable.
 */
enum BsrStatus bsr_optimize_power(const struct BsrParams *params,
                                  enum BsrThresholdKind threshold,
                                  struct BsrAllocation *out);

/**
 * Outage probability over `n_periods` Rician draws.
 *
 * # Safety
 * `params` must be a live handle and `out` writable.
 */
enum BsrStatus bsr_outage(const struct BsrParams *params,
                          enum BsrScheme scheme,
                          enum BsrThresholdKind threshold,
                          uint64_t master_seed,
                          uint64_t n_periods,
                          double ber_threshold,
                          bool reoptimize_allocation,
                          double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum BsrStatus bsr_marcum_q(uint32_t order, double a, double b, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum BsrStatus bsr_log_bessel_i(uint32_t order, double x, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum BsrStatus bsr_reg_gamma_lower(double shape, double x, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BSRELAY_H */
