#ifndef CHAINCRAFT_H
#define CHAINCRAFT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum CcStatus {
  CC_STATUS_OK = 0,
  CC_STATUS_NULL_POINTER = 1,
  CC_STATUS_INVALID_UTF8 = 2,
  /**
   * Expression syntax error, unknown identifier or unbound parameter.
   */
  CC_STATUS_PARSE = 3,
  CC_STATUS_UNKNOWN_NAME = 4,
  /**
   * Invalid argument or configuration.
   */
  CC_STATUS_INVALID_ARGUMENT = 5,
  /**
   * Function domain error, pole or degenerate input.
   */
  CC_STATUS_DOMAIN = 6,
  /**
   * Non-finite state or singular metric during integration.
   */
  CC_STATUS_NUMERICAL = 7,
  /**
   * Output buffer too small.
   */
  CC_STATUS_BUFFER_TOO_SMALL = 8,
  CC_STATUS_PANIC = 9,
} CcStatus;

/**
 * How an integration ended.
 */
typedef enum CcCurveStatus {
  CC_CURVE_STATUS_REACHED_END = 0,
  CC_CURVE_STATUS_EVENT = 1,
  CC_CURVE_STATUS_MAX_STEPS = 2,
  CC_CURVE_STATUS_NON_FINITE = 3,
} CcCurveStatus;

/**
 * A sampled curve: an independent variable, states and diagnostics per row.
 */
typedef struct CcCurve CcCurve;

/**
 * A second-order ODE `y'' = f(x, y, y')`.
 */
typedef struct CcGeometry CcGeometry;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of the calling thread into `buf`
 * (NUL-terminated, truncated to `len`). Returns the full message length
 * in bytes, excluding the terminator.
 */
size_t cc_last_error(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cc_version(void);

/**
 * Creates a built-in geometry (`flat`, `hooke`, `poly-p`, ...).
 * `names`/`values` bind `n_params` parameters and may be null when zero.
 */
enum CcStatus cc_geometry_builtin(const char *name,
                                  const char *const *names,
                                  const double *values,
                                  size_t n_params,
                                  struct CcGeometry **out_geometry);

/**
 * Creates a geometry from an expression in `x`, `y`, `p` and parameters.
 */
enum CcStatus cc_geometry_from_expr(const char *source,
                                    const char *const *names,
                                    const double *values,
                                    size_t n_params,
                                    struct CcGeometry **out_geometry);

/**
 * Releases a geometry. Null is ignored.
 */
void cc_geometry_free(struct CcGeometry *geometry);

/**
 * Evaluates `f(x, y, p)`.
 */
enum CcStatus cc_geometry_eval(const struct CcGeometry *geometry,
                               double x,
                               double y,
                               double p,
                               double *out_value);

/**
 * Writes the 4x4 metric at `(x, y, p)` in row-major order into `out16`.
 * Coordinates are `(x, y, p, tau)`; the metric does not depend on `tau`.
 */
enum CcStatus cc_metric(const struct CcGeometry *geometry,
                        double x,
                        double y,
                        double p,
                        double *out16);

/**
 * Integrates the chain through `(x, y, p, yp, pp)` = `init5` up to `x_end`.
 *
 * Rows hold `x`, then `y, p, yp, pp`, then `delta, resid`. A positive
 * `slope_bound` stops the chain where it turns vertical; `tol <= 0` and
 * `max_steps == 0` select the defaults.
 */
enum CcStatus cc_chain_integrate(const struct CcGeometry *geometry,
                                 const double *init5,
                                 double x_end,
                                 double slope_bound,
                                 double tol,
                                 size_t max_steps,
                                 struct CcCurve **out_curve);

/**
 * Integrates the null geodesic through `(x, y, p)` with projected direction
 * `(xd, yd, pd)` = `dir3` over parameter time `[0, t_end]`.
 *
 * Rows hold `t`, then `x, y, p, tau, xd, yd, pd, td`, then `nullity,
 * delta, chain_dist`.
 */
enum CcStatus cc_geodesic_integrate(const struct CcGeometry *geometry,
                                    double x,
                                    double y,
                                    double p,
                                    const double *dir3,
                                    double t_end,
                                    double tol,
                                    size_t max_steps,
                                    struct CcCurve **out_curve);

/**
 * Releases a curve. Null is ignored.
 */
void cc_curve_free(struct CcCurve *curve);

/**
 * Number of rows; 0 for null.
 */
size_t cc_curve_len(const struct CcCurve *curve);

/**
 * Values per row: the independent variable, states and diagnostics; 0 for null.
 */
size_t cc_curve_width(const struct CcCurve *curve);

/**
 * How the integration ended.
 */
enum CcStatus cc_curve_status(const struct CcCurve *curve, enum CcCurveStatus *out_status);

/**
 * Copies row `index` into `buf`, which must hold `cc_curve_width` values.
 */
enum CcStatus cc_curve_row(const struct CcCurve *curve, size_t index, double *buf, size_t len);

/**
 * Copies the name of column `index` (NUL-terminated, truncated to `len`)
 * into `buf`. Returns the full name length, or 0 when out of range.
 */
size_t cc_curve_column_name(const struct CcCurve *curve, size_t index, char *buf, size_t len);

/**
 * Largest `|resid|` along a chain curve.
 */
enum CcStatus cc_chain_defect(const struct CcCurve *curve, double *out_defect);

/**
 * Evaluates the Euler-Arnold right-hand side of a named homogeneous model
 * (`flat-heisenberg`, `flat-se2`, `circles-se2`, `hooke-sl2`, `horocycle`).
 */
enum CcStatus cc_model_euler(const char *model, const double *momentum4, double *out4);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHAINCRAFT_H */
