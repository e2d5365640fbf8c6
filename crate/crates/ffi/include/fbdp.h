#ifndef FBDP_H
#define FBDP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FbdpStatus {
  FBDP_STATUS_OK = 0,
  FBDP_STATUS_NULL_POINTER = 1,
  FBDP_STATUS_INVALID_PARAMETER = 2,
  FBDP_STATUS_ALPHA_OUT_OF_RANGE = 3,
  FBDP_STATUS_NON_FINITE = 4,
  FBDP_STATUS_TABLE_EXTENT = 5,
  FBDP_STATUS_K_BEYOND_TABLE = 6,
  FBDP_STATUS_QUADRATURE = 7,
  FBDP_STATUS_TRUNCATION = 8,
  FBDP_STATUS_REGIME = 9,
  FBDP_STATUS_OVERFLOW = 10,
  FBDP_STATUS_OTHER = 11,
  FBDP_STATUS_PANIC = 12,
  // value written, but the series terms kept growing
  FBDP_STATUS_DIVERGENT = 13,
  // value written, but the tolerance was not met within k_max
  FBDP_STATUS_UNCONVERGED = 14,
} FbdpStatus;

// Rate model handle.
typedef struct FbdpModel FbdpModel;

// ψ table handle.
typedef struct FbdpPsi FbdpPsi;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *fbdp_last_error(void);

// Linear rates λₙ = nλ, μₙ = nμ.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum FbdpStatus fbdp_model_linear(double lambda, double mu, struct FbdpModel **out);

// Tabulated rates on states 0..len-1.
//
// # Safety
// `lambdas` and `mus` must each point to `len` readable doubles and `out`
// to writable storage for one handle.
enum FbdpStatus fbdp_model_table(const double *lambdas,
                                 const double *mus,
                                 size_t len,
                                 struct FbdpModel **out);

// # Safety
// `model` must be NULL or a handle from a `fbdp_model_*` constructor that
// has not been freed.
void fbdp_model_free(struct FbdpModel *model);

// ψ_{n,k} for 0 ≤ k ≤ k_max.
//
// # Safety
// `model` must be a live model handle and `out` writable.
enum FbdpStatus fbdp_psi_build(const struct FbdpModel *model, size_t k_max, struct FbdpPsi **out);

// # Safety
// `psi` must be a live table handle and `out` writable.
enum FbdpStatus fbdp_psi_get(const struct FbdpPsi *psi, size_t n, size_t k, double *out);

// # Safety
// `psi` must be NULL or a handle from [`fbdp_psi_build`] not yet freed.
void fbdp_psi_free(struct FbdpPsi *psi);

// Pr{N(t) = n} from the decomposition series on a built table, stopped at
// relative tolerance `tol`. The partial sum is written even when the status
// is `Divergent` or `Unconverged`.
//
// # Safety
// `psi` must be a live table handle and `out` writable.
enum FbdpStatus fbdp_pmf_adm(const struct FbdpPsi *psi,
                             double alpha,
                             size_t n,
                             double t,
                             double tol,
                             double *out);

// Classical law on states 0..=n_max at time t. `probs` receives n_max + 1
// values and `leak` the mass pushed past n_max.
//
// # Safety
// `model` must be a live handle, `probs` must point to n_max + 1 writable
// doubles and `leak` to one.
enum FbdpStatus fbdp_uniformization_pmf(const struct FbdpModel *model,
                                        size_t n_max,
                                        double t,
                                        double *probs,
                                        double *leak);

// Two-parameter Mittag-Leffler function E_{α,β}(x).
//
// # Safety
// `out` must be writable.
enum FbdpStatus fbdp_ml(double alpha, double beta, double x, double *out);

// Pr{N(t) = n} for linear rates.
//
// # Safety
// `out` must be writable.
enum FbdpStatus fbdp_pmf_linear(double lambda,
                                double mu,
                                double alpha,
                                size_t n,
                                double t,
                                double *out);

// E N(t) for linear rates.
//
// # Safety
// `out` must be writable.
enum FbdpStatus fbdp_mean_linear(double lambda, double mu, double alpha, double t, double *out);

// Pr{T ≤ t} for the extinction time under linear rates.
//
// # Safety
// `out` must be writable.
enum FbdpStatus fbdp_extinction_cdf(double lambda, double mu, double alpha, double t, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FBDP_H */
