#ifndef FERMAT_H
#define FERMAT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a library call.
 */
typedef enum FermatStatus {
  FERMAT_STATUS_OK = 0,
  /**
   * Malformed literal, expression or unknown variable.
   */
  FERMAT_STATUS_PARSE_ERROR = 1,
  /**
   * Evaluation outside a domain, non-invertible value, and similar.
   */
  FERMAT_STATUS_DOMAIN_ERROR = 2,
  /**
   * Quadrature did not reach the requested tolerance.
   */
  FERMAT_STATUS_TOLERANCE_ERROR = 3,
  FERMAT_STATUS_NULL_POINTER = 4,
  FERMAT_STATUS_INVALID_ARGUMENT = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  FERMAT_STATUS_PANIC = 6,
} FermatStatus;

/**
 * Opaque expression in named variables.
 */
typedef struct FermatExprHandle FermatExprHandle;

/**
 * Opaque Fermat real.
 */
typedef struct FermatRealHandle FermatRealHandle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failed call on this thread, or null. The
 * pointer stays valid until the next library call on the same thread.
 */
const char *fermat_last_error_message(void);

/**
 * Releases a string returned by this library. Null is ignored.
 */
void fermat_string_free(char *s);

/**
 * Parses a literal such as `1 + 2 eps(2) - eps(1)`.
 */
enum FermatStatus fermat_real_parse(const char *text, struct FermatRealHandle **out);

/**
 * Builds `std + Σ coeffs[i] dt_{nums[i]/dens[i]}` from `n` terms.
 */
enum FermatStatus fermat_real_from_parts(double std,
                                         const int64_t *nums,
                                         const int64_t *dens,
                                         const double *coeffs,
                                         size_t n,
                                         struct FermatRealHandle **out);

/**
 * Releases a handle. Null is ignored.
 */
void fermat_real_free(struct FermatRealHandle *x);

enum FermatStatus fermat_real_clone(const struct FermatRealHandle *x,
                                    struct FermatRealHandle **out);

enum FermatStatus fermat_real_add(const struct FermatRealHandle *a,
                                  const struct FermatRealHandle *b,
                                  struct FermatRealHandle **out);

enum FermatStatus fermat_real_sub(const struct FermatRealHandle *a,
                                  const struct FermatRealHandle *b,
                                  struct FermatRealHandle **out);

enum FermatStatus fermat_real_mul(const struct FermatRealHandle *a,
                                  const struct FermatRealHandle *b,
                                  struct FermatRealHandle **out);

/**
 * `a / b`; fails with `FERMAT_STATUS_DOMAIN_ERROR` when `st(b) = 0`.
 */
enum FermatStatus fermat_real_div(const struct FermatRealHandle *a,
                                  const struct FermatRealHandle *b,
                                  struct FermatRealHandle **out);

enum FermatStatus fermat_real_pow_int(const struct FermatRealHandle *x,
                                      uint32_t n,
                                      struct FermatRealHandle **out);

/**
 * `x^(num/den)` under the same rules as the `^` operator of the literal
 * grammar.
 */
enum FermatStatus fermat_real_pow_rational(const struct FermatRealHandle *x,
                                           int64_t num,
                                           int64_t den,
                                           struct FermatRealHandle **out);

enum FermatStatus fermat_real_invert(const struct FermatRealHandle *x,
                                     struct FermatRealHandle **out);

/**
 * Writes -1, 0 or 1 to `out` as `a` is below, equal to or above `b` in the
 * total order.
 */
enum FermatStatus fermat_real_compare(const struct FermatRealHandle *a,
                                      const struct FermatRealHandle *b,
                                      int *out);

/**
 * Standard part; NaN for a null handle.
 */
double fermat_real_std(const struct FermatRealHandle *x);

/**
 * Number of infinitesimal terms; 0 for a null handle.
 */
size_t fermat_real_term_count(const struct FermatRealHandle *x);

/**
 * Term `i` in decreasing order of `dt` order, as `coeff dt_{num/den}`.
 */
enum FermatStatus fermat_real_term(const struct FermatRealHandle *x,
                                   size_t i,
                                   int64_t *num,
                                   int64_t *den,
                                   double *coeff);

/**
 * Canonical text form; release with [`fermat_string_free`].
 */
enum FermatStatus fermat_real_to_string(const struct FermatRealHandle *x, char **out);

/**
 * Canonical JSON form; release with [`fermat_string_free`].
 */
enum FermatStatus fermat_real_to_json(const struct FermatRealHandle *x, char **out);

/**
 * Parses an expression over the `nvars` variable names in `vars`.
 */
enum FermatStatus fermat_expr_parse(const char *text,
                                    const char *const *vars,
                                    size_t nvars,
                                    struct FermatExprHandle **out);

void fermat_expr_free(struct FermatExprHandle *e);

/**
 * Symbolic partial derivative with respect to `var`.
 */
enum FermatStatus fermat_expr_diff(const struct FermatExprHandle *e,
                                   const char *var,
                                   struct FermatExprHandle **out);

enum FermatStatus fermat_expr_to_string(const struct FermatExprHandle *e, char **out);

/**
 * Evaluates the lift of `e` with `names[i]` bound to `values[i]`.
 */
enum FermatStatus fermat_expr_lift_eval(const struct FermatExprHandle *e,
                                        const char *const *names,
                                        const struct FermatRealHandle *const *values,
                                        size_t n,
                                        struct FermatRealHandle **out);

/**
 * `∫_from^to f(var) dvar` for `f` given as text over `var` and the `n`
 * named Fermat parameters. A non-positive `tol` uses the defaults.
 */
enum FermatStatus fermat_integrate(const char *text,
                                   const char *var,
                                   const char *const *param_names,
                                   const struct FermatRealHandle *const *param_values,
                                   size_t n,
                                   const struct FermatRealHandle *from,
                                   const struct FermatRealHandle *to,
                                   double tol,
                                   struct FermatRealHandle **out);

/**
 * Divergence at `at[0..3]` of the field whose three components are given as
 * text in `x`, `y`, `z`.
 */
enum FermatStatus fermat_divergence(const char *const *components,
                                    const double *at,
                                    double tol,
                                    double *out);

/**
 * Curl at `at[0..3]`, written to `out[0..3]`.
 */
enum FermatStatus fermat_curl(const char *const *components,
                              const double *at,
                              double tol,
                              double *out);

/**
 * Sets the global threshold below which coefficients are dropped.
 */
enum FermatStatus fermat_set_coeff_epsilon(double eps);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FERMAT_H */
