#ifndef TAVIS_H
#define TAVIS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Field-amplitude pairing: physically exact (default).
 */
#define TAVIS_PAIRING_CONSISTENT 0

/**
 * Field-amplitude pairing reproducing published resonant closed forms.
 */
#define TAVIS_PAIRING_PRINTED 1

/**
 * Result codes shared by every entry point.
 */
typedef enum TavisStatus {
  TAVIS_OK = 0,
  /**
   * An argument is out of range or inconsistent.
   */
  TAVIS_ERR_PARAM = 1,
  /**
   * The eigensolver failed.
   */
  TAVIS_ERR_NUMERICAL = 2,
  /**
   * A density could not be truncated within tolerance.
   */
  TAVIS_ERR_TRUNCATION = 3,
  /**
   * A required pointer was NULL.
   */
  TAVIS_ERR_NULL = 4,
  /**
   * An internal panic was caught.
   */
  TAVIS_ERR_PANIC = 5,
} TavisStatus;

/**
 * Opaque truncated photon density.
 */
typedef struct TavisDensity TavisDensity;

/**
 * Opaque time series (real or complex).
 */
typedef struct TavisSeries TavisSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates the number state `|n0⟩`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum TavisStatus tavis_density_fock(uint64_t n0, struct TavisDensity **out);

/**
 * Creates a coherent state with mean `nbar`. `tail_tol <= 0` selects the default (1e-12).
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum TavisStatus tavis_density_coherent(double nbar, double tail_tol, struct TavisDensity **out);

/**
 * Creates a thermal state with mean `nbar`. `tail_tol <= 0` selects the default (1e-12).
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum TavisStatus tavis_density_thermal(double nbar, double tail_tol, struct TavisDensity **out);

/**
 * Reports the truncation point and the discarded probability mass.
 *
 * # Safety
 * `density` must be a live handle; the out-pointers must be valid or NULL.
 */
enum TavisStatus tavis_density_info(const struct TavisDensity *density,
                                    uint64_t *n_trunc,
                                    double *tail_mass);

/**
 * Releases a density. NULL is ignored.
 *
 * # Safety
 * `density` must be NULL or a handle not yet freed.
 */
void tavis_density_free(struct TavisDensity *density);

/**
 * Photon gain `S1(τ)` with every molecule initially up.
 *
 * # Safety
 * `density` must be a live handle, `taus` must point to `len` doubles and
 * `out` to writable storage for one handle.
 */
enum TavisStatus tavis_s1_all_up(uint32_t n_tlm,
                                 double beta,
                                 const struct TavisDensity *density,
                                 const double *taus,
                                 uintptr_t len,
                                 struct TavisSeries **out);

/**
 * Photon loss `S4(τ)` with every molecule initially down.
 *
 * # Safety
 * As for [`tavis_s1_all_up`].
 */
enum TavisStatus tavis_s4_all_down(uint32_t n_tlm,
                                   double beta,
                                   const struct TavisDensity *density,
                                   const double *taus,
                                   uintptr_t len,
                                   struct TavisSeries **out);

/**
 * Complex field amplitude `S2(τ)` with every molecule initially up.
 * `pairing` is one of the `TAVIS_PAIRING_*` constants.
 *
 * # Safety
 * As for [`tavis_s1_all_up`].
 */
enum TavisStatus tavis_s2_all_up(uint32_t n_tlm,
                                 double beta,
                                 const struct TavisDensity *density,
                                 uint32_t pairing,
                                 const double *taus,
                                 uintptr_t len,
                                 struct TavisSeries **out);

/**
 * `⟨E⁻E⁺⟩(τ)` for a named molecular scenario (`"all_up"`, `"half_up"`,
 * `"dicke:-1.5"`, ...).
 *
 * # Safety
 * As for [`tavis_s1_all_up`]; `scenario` must be a NUL-terminated string.
 */
enum TavisStatus tavis_ee(uint32_t n_tlm,
                          double beta,
                          const struct TavisDensity *density,
                          const char *scenario,
                          const double *taus,
                          uintptr_t len,
                          struct TavisSeries **out);

/**
 * Average-field approximation of `S1(τ)`.
 *
 * # Safety
 * As for [`tavis_s1_all_up`].
 */
enum TavisStatus tavis_s1_afa(uint32_t n_tlm,
                              double beta,
                              const struct TavisDensity *density,
                              const double *taus,
                              uintptr_t len,
                              struct TavisSeries **out);

/**
 * Number of samples in a series.
 *
 * # Safety
 * `series` must be a live handle and `len` valid.
 */
enum TavisStatus tavis_series_len(const struct TavisSeries *series, uintptr_t *len);

/**
 * Copies the real parts (and, if `im` is non-NULL, the imaginary parts;
 * zero for real series) into caller buffers of exactly `len` doubles.
 *
 * # Safety
 * `series` must be a live handle; `re` (and `im` if non-NULL) must point to
 * `len` writable doubles.
 */
enum TavisStatus tavis_series_copy(const struct TavisSeries *series,
                                   double *re,
                                   double *im,
                                   uintptr_t len);

/**
 * Releases a series. NULL is ignored.
 *
 * # Safety
 * `series` must be NULL or a handle not yet freed.
 */
void tavis_series_free(struct TavisSeries *series);

/**
 * Infinite-time average of `S1`.
 *
 * # Safety
 * `density` must be a live handle and `out` valid.
 */
enum TavisStatus tavis_s1_stationary_mean(uint32_t n_tlm,
                                          double beta,
                                          const struct TavisDensity *density,
                                          double *out);

/**
 * Number of multiplets with cooperation number `r` among `n_tlm` molecules.
 * `r` must be a non-negative integer or half-integer.
 *
 * # Safety
 * `out` must be valid.
 */
enum TavisStatus tavis_degeneracy_weight(uint32_t n_tlm, double r, double *out);

/**
 * Message for the last failure on this thread ("" after success). The
 * pointer stays valid until the next call into this library on the same thread.
 */
const char *tavis_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TAVIS_H */
