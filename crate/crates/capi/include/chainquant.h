#ifndef CHAINQUANT_H
#define CHAINQUANT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Iteration scheme selector; `Auto` picks the default for the symmetry
 * order (A for L=3, C for L=6).
 */
typedef enum CqScheme {
  CqScheme_Auto = 0,
  CqScheme_A = 1,
  CqScheme_B = 2,
  CqScheme_C = 3,
} CqScheme;

/**
 * Boundary sector selector.
 */
typedef enum CqSector {
  CqSector_Neumann = 0,
  CqSector_Dirichlet = 1,
} CqSector;

/**
 * Status codes returned by every fallible call.
 */
typedef enum CqStatus {
  CqStatus_Ok = 0,
  CqStatus_NullPointer = 1,
  CqStatus_InvalidArgument = 2,
  CqStatus_ParseError = 3,
  CqStatus_NotConverged = 4,
  CqStatus_NumericalError = 5,
} CqStatus;

/**
 * Opaque polynomial potential handle.
 */
typedef struct CqPotential CqPotential;

/**
 * Opaque converged chain-system handle (system plus convergence report).
 */
typedef struct CqSystem CqSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread; valid until
 * the next failing call.
 */
const char *cq_last_error_message(void);

/**
 * Library version string (static storage).
 */
const char *cq_version(void);

/**
 * Parse a potential from term syntax such as `q4+2*q2-0.5*q1`.
 *
 * # Safety
 * `spec` must be a valid NUL-terminated string; `out` must be a valid
 * pointer to a handle slot.
 */
enum CqStatus cq_potential_parse(const char *spec, struct CqPotential **out);

/**
 * Build a potential from raw coefficients v1..v_{N-1} (length degree-1).
 *
 * # Safety
 * `re`/`im` must point to `len` readable doubles (`im` may be NULL for a
 * real potential); `out` must be valid.
 */
enum CqStatus cq_potential_new(uint32_t degree,
                               const double *re,
                               const double *im,
                               size_t len,
                               struct CqPotential **out);

/**
 * # Safety
 * `p` must be a handle from this library, not yet freed.
 */
void cq_potential_free(struct CqPotential *p);

/**
 * Polynomial degree N, or 0 for a null handle.
 *
 * # Safety
 * `p` must be valid or NULL.
 */
uint32_t cq_potential_degree(const struct CqPotential *p);

/**
 * Effective symmetry-group order L, or 0 for a null handle.
 *
 * # Safety
 * `p` must be valid or NULL.
 */
uint32_t cq_potential_group_order(const struct CqPotential *p);

/**
 * Solve the exact quantization conditions for one sector. `tol <= 0` and
 * `max_cycles == 0` select the defaults (1e-10, 200).
 *
 * # Safety
 * `p` and `out` must be valid pointers.
 */
enum CqStatus cq_solve_spectrum(const struct CqPotential *p,
                                enum CqSector sector,
                                enum CqScheme scheme,
                                uint32_t k_max,
                                uint32_t k_eval,
                                double tol,
                                uint32_t max_cycles,
                                struct CqSystem **out);

/**
 * # Safety
 * `s` must be a handle from this library, not yet freed.
 */
void cq_system_free(struct CqSystem *s);

/**
 * Number of chains L.
 *
 * # Safety
 * `s` must be valid or NULL.
 */
size_t cq_system_chain_count(const struct CqSystem *s);

/**
 * Number of explicit levels in chain ℓ.
 *
 * # Safety
 * `s` must be valid or NULL.
 */
size_t cq_system_level_count(const struct CqSystem *s, size_t ell);

/**
 * Copy chain ℓ's explicit levels into the caller's buffers; `written`
 * receives the number of levels copied (at most `cap`).
 *
 * # Safety
 * `out_re`/`out_im` must hold at least `cap` doubles; `written` must be
 * valid.
 */
enum CqStatus cq_system_levels(const struct CqSystem *s,
                               size_t ell,
                               double *out_re,
                               double *out_im,
                               size_t cap,
                               size_t *written);

/**
 * Fitted contraction ratio of the run (NaN when unavailable).
 *
 * # Safety
 * `s` must be valid or NULL.
 */
double cq_system_contraction_ratio(const struct CqSystem *s);

/**
 * 1 when the run converged, 0 otherwise (or for a null handle).
 *
 * # Safety
 * `s` must be valid or NULL.
 */
int cq_system_converged(const struct CqSystem *s);

/**
 * Absolute-normalized ψ at endpoint `a` for the state of energy `energy`
 * (real potential). `converged` receives 1/0.
 *
 * # Safety
 * All output pointers must be valid.
 */
enum CqStatus cq_wave_at(const struct CqPotential *p,
                         double energy,
                         double a,
                         uint32_t k_max,
                         double *psi_re,
                         double *psi_im,
                         int *converged);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CHAINQUANT_H */
