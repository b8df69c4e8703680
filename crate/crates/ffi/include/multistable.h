#ifndef MULTISTABLE_H
#define MULTISTABLE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Opaque handle to a tabulated mollifier.
 */
typedef struct MsMollifier MsMollifier;

/*
 Opaque handle to a validated spec `(f, α)`.
 */
typedef struct MsSpec MsSpec;

typedef int32_t MsStatus;

/*
 A value with its absolute error bound.
 */
typedef struct MsEstimate {
  double value;
  double error;
} MsEstimate;

/*
 One point of `P(|I(f)| > λ) / T_f(λ)`.
 */
typedef struct MsRatio {
  double lambda;
  double asymptote;
  double probability;
  double probability_error;
  double ratio;
  double abs_err_bound;
} MsRatio;

#define MS_OK 0

/*
 A required pointer argument was null.
 */
#define MS_NULL_POINTER 1

/*
 An argument is outside the domain of the function.
 */
#define MS_DOMAIN 2

/*
 A quadrature stopped before reaching its tolerance.
 */
#define MS_ACCURACY 3

/*
 A spec document could not be parsed or validated.
 */
#define MS_PARSE 4

/*
 The library panicked; this is a bug.
 */
#define MS_PANIC 5

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failing call on this thread; empty after a success.
 The pointer stays valid until the next library call on the same thread.
 */
const char *ms_last_error_message(void);

/*
 Builds a spec from the step function (`n_breakpoints = n_coefficients + 1`)
 and the exponent (`n_alpha_values = n_alpha_breakpoints + 1`).

 # Safety
 Each array pointer must be valid for its stated length; `out` must be
 writable.
 */
MsStatus ms_spec_new(const double *breakpoints,
                     size_t n_breakpoints,
                     const double *coefficients,
                     size_t n_coefficients,
                     const double *alpha_breakpoints,
                     size_t n_alpha_breakpoints,
                     const double *alpha_values,
                     size_t n_alpha_values,
                     struct MsSpec **out);

/*
 Parses a JSON spec document.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
MsStatus ms_spec_from_json(const char *json, struct MsSpec **out);

/*
 # Safety
 `spec` must come from `ms_spec_new`/`ms_spec_from_json` and not be freed
 twice. Null is ignored.
 */
void ms_spec_free(struct MsSpec *spec);

/*
 Tabulates the mollifier for `q > 1`.

 # Safety
 `out` must be writable.
 */
MsStatus ms_mollifier_new(double q, struct MsMollifier **out);

/*
 # Safety
 `moll` must come from `ms_mollifier_new` and not be freed twice. Null is
 ignored.
 */
void ms_mollifier_free(struct MsMollifier *moll);

/*
 # Safety
 `spec` must be a live handle; `out` must be writable.
 */
MsStatus ms_quasinorm(const struct MsSpec *spec, double rel_tol, double *out);

/*
 # Safety
 `spec` must be a live handle; `out` must be writable.
 */
MsStatus ms_cf(const struct MsSpec *spec, double theta, double *out);

/*
 # Safety
 `spec` must be a live handle; `out` must be writable.
 */
MsStatus ms_density(const struct MsSpec *spec,
                    double x,
                    double abs_tol,
                    double rel_tol,
                    struct MsEstimate *out);

/*
 `P(|I(f)| > λ)`.

 # Safety
 `spec` must be a live handle; `out` must be writable.
 */
MsStatus ms_tail(const struct MsSpec *spec,
                 double lambda,
                 double abs_tol,
                 double rel_tol,
                 struct MsEstimate *out);

/*
 `T_f(λ)`.

 # Safety
 `spec` must be a live handle; `out` must be writable.
 */
MsStatus ms_tail_asymptote(const struct MsSpec *spec, double lambda, double *out);

/*
 `C(γ)` for `0 < γ < 2`.

 # Safety
 `out` must be writable.
 */
MsStatus ms_tail_constant(double gamma, double *out);

/*
 # Safety
 `spec` must be a live handle; `out` must be writable.
 */
MsStatus ms_ratio(const struct MsSpec *spec,
                  double lambda,
                  double abs_tol,
                  double rel_tol,
                  struct MsRatio *out);

/*
 Writes `n` draws of `I(f)` into `out`; deterministic given `seed`.

 # Safety
 `spec` must be a live handle; `out` must be writable for `n` doubles.
 */
MsStatus ms_sample(const struct MsSpec *spec, size_t n, uint64_t seed, double *out);

/*
 `h_q(γ) = ∫|θ|^γ φ_q(θ) dθ` for `0 ≤ γ < 2`.

 # Safety
 `moll` must be a live handle; `out` must be writable.
 */
MsStatus ms_h_q(const struct MsMollifier *moll, double gamma, struct MsEstimate *out);

/*
 # Safety
 Handles must be live; `out` must be writable.
 */
MsStatus ms_eta(const struct MsSpec *spec,
                const struct MsMollifier *moll,
                double xi,
                struct MsEstimate *out);

/*
 # Safety
 Handles must be live; `out` must be writable.
 */
MsStatus ms_tau(const struct MsSpec *spec,
                const struct MsMollifier *moll,
                double xi,
                struct MsEstimate *out);

/*
 # Safety
 Handles must be live; `out` must be writable.
 */
MsStatus ms_rho(const struct MsSpec *spec,
                const struct MsMollifier *moll,
                double xi,
                struct MsEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MULTISTABLE_H */
