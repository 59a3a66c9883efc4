#ifndef W2EPS_H
#define W2EPS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum W2epsStatus {
  W2EPS_STATUS_OK = 0,
  W2EPS_STATUS_NULL_POINTER = 1,
  W2EPS_STATUS_DOMAIN = 2,
  W2EPS_STATUS_OPTIMIZATION = 3,
  W2EPS_STATUS_DEGENERATE_DATA = 4,
  W2EPS_STATUS_ADMISSIBILITY = 5,
  W2EPS_STATUS_CONDITION = 6,
  W2EPS_STATUS_GEOMETRY = 7,
  W2EPS_STATUS_INVALID_GRID = 8,
  W2EPS_STATUS_IO = 9,
  W2EPS_STATUS_BUFFER_SIZE = 10,
  W2EPS_STATUS_PANIC = 11,
  W2EPS_STATUS_OTHER = 12,
} W2epsStatus;

/**
 * Opaque sampled function on a grid.
 */
typedef struct W2epsGrid W2epsGrid;

/**
 * Bounds for one parameter set. Absent optional bounds are NaN.
 */
typedef struct W2epsExponentReport {
  uint32_t n;
  uint32_t k;
  double ratio;
  double c;
  double c_star;
  uint32_t c_star_index;
  double gamma0;
  double epsilon_interior;
  double gamma_star;
  double f_at_gamma_star;
  double closed_form_lower;
  double tau_n;
  double refined_lower;
  double abstract_lower;
  double epsilon_upper;
  double ass_conjecture;
  double epsilon_global;
  double stationarity_residual;
} W2epsExponentReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message of this thread into `buf` (NUL terminated,
 * truncated to `len`). Returns the full message length plus one.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t w2eps_last_error_message(char *buf, size_t len);

/**
 * Build a cube grid `[-half_width, half_width]^dim` with `points` per axis
 * and domain radius `half_width`, taking `values` (row-major, length
 * `points^dim`).
 *
 * # Safety
 * `values` must point to `len` readable doubles; `out` must be writable.
 */
enum W2epsStatus w2eps_grid_new(uint32_t dim,
                                uint32_t points,
                                double half_width,
                                const double *values,
                                size_t len,
                                struct W2epsGrid **out);

/**
 * Load a grid from a JSON header file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum W2epsStatus w2eps_grid_load(const char *path, struct W2epsGrid **out);

/**
 * Number of grid points, or 0 for a null handle.
 *
 * # Safety
 * `grid` must be null or a live handle.
 */
size_t w2eps_grid_len(const struct W2epsGrid *grid);

/**
 * # Safety
 * `grid` must be null or a handle not yet freed.
 */
void w2eps_grid_free(struct W2epsGrid *grid);

/**
 * Principal branch `W₀(z)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum W2epsStatus w2eps_lambert_w0(double z, double *out);

/**
 * Lower branch `W₋₁(z)` for `z` in `[-1/e, 0)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum W2epsStatus w2eps_lambert_wm1(double z, double *out);

/**
 * Bounds `lower <= W₋₁(-e^{-u-1}) <= upper` for `u >= 0`.
 *
 * # Safety
 * `lower` and `upper` must be writable.
 */
enum W2epsStatus w2eps_wm1_envelope_bounds(double u, double *lower, double *upper);

/**
 * Every exponent bound for dimension `n`, ratio `ratio`, index `k`.
 *
 * # Safety
 * `out` must be writable.
 */
enum W2epsStatus w2eps_exponent_report(uint32_t n,
                                       double ratio,
                                       uint32_t k,
                                       struct W2epsExponentReport *out);

/**
 * Discrete `a`-convex envelope of `grid`. A negative or NaN `tol` selects
 * the default contact tolerance. `contact` receives 1 where the envelope
 * touches the data. Points outside the domain get NaN and 0.
 *
 * # Safety
 * `grid` must be live; `envelope` and `contact` must hold `len` elements.
 */
enum W2epsStatus w2eps_a_convex_envelope(const struct W2epsGrid *grid,
                                         double a,
                                         double tol,
                                         double *envelope,
                                         uint8_t *contact,
                                         size_t len);

/**
 * Opening field `Θ` of `grid` up to `a_max`. `converged` receives 0 where
 * `Θ` exceeds `a_max` (then `theta` holds `a_max`).
 *
 * # Safety
 * `grid` must be live; `theta` and `converged` must hold `len` elements.
 */
enum W2epsStatus w2eps_theta_field(const struct W2epsGrid *grid,
                                   double a_max,
                                   double *theta,
                                   uint8_t *converged,
                                   size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* W2EPS_H */
