#ifndef SPECTRAL_LAW_H
#define SPECTRAL_LAW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define SL_OK 0

// A required pointer argument was null.
#define SL_ERR_NULL 1

// Malformed input or out-of-range argument.
#define SL_ERR_INVALID 2

// Quadrature, root finding or overflow failure.
#define SL_ERR_NUMERICAL 3

// Request exceeds a size limit, including too-small output buffers.
#define SL_ERR_CAPACITY 4

// A Rust panic was caught at the boundary.
#define SL_ERR_PANIC 5

// Centered activation built from a JSON description.
typedef struct SlActivation SlActivation;

// Tabulated limiting density.
typedef struct SlDensity SlDensity;

// Pooled eigenvalues of a simulation, trial after trial.
typedef struct SlSpectrum SlSpectrum;

typedef struct {
  double theta1;
  double theta2;
  double theta3;
} SlThetas;

// Limit parameters of the spectral law.
typedef struct {
  double theta1;
  double theta2;
  double phi;
  double psi;
} SlParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or an empty string. The
// pointer stays valid until the next failing call on the same thread.
const char *sl_last_error_message(void);

// Schema tag written into every output file, as a static string.
const char *sl_schema_version(void);

// Builds an activation from JSON such as `{"kind": "tanh"}`, centered (and
// optionally normalized) at `sigma = sigma_w * sigma_x`.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
int32_t sl_activation_from_json(const char *json, double sigma, SlActivation **out);

// # Safety
// `handle` must come from `sl_activation_from_json` or be null.
void sl_activation_free(SlActivation *handle);

// # Safety
// `handle` must be a live activation; `out` must be writable.
int32_t sl_activation_thetas(const SlActivation *handle,
                             double sigma_w,
                             double sigma_x,
                             SlThetas *out);

// # Safety
// `handle` must be a live activation; `out` must be writable.
int32_t sl_activation_evaluate(const SlActivation *handle, double x, double *out);

// `q`-th limiting moment from the cactus enumeration.
//
// # Safety
// `out` must be writable.
int32_t sl_cactus_moment(uint32_t q, SlParams p, double *out);

// # Safety
// `out` must be writable.
int32_t sl_narayana(uint32_t q, uint32_t k, uint64_t *out);

// Stieltjes transform `G(z)` at `z = z_re + i z_im`, `z_im != 0`.
//
// # Safety
// `g_re` and `g_im` must be writable.
int32_t sl_solve_g(double z_re, double z_im, SlParams p, double *g_re, double *g_im);

// Density by Stieltjes inversion with default settings.
//
// # Safety
// `out` must be writable.
int32_t sl_density_compute(SlParams p, SlDensity **out);

// Number of grid points, 0 for a null handle.
//
// # Safety
// `handle` must be a live density or null.
size_t sl_density_len(const SlDensity *handle);

// Copies grid points and density values into caller buffers of length `len`.
//
// # Safety
// `grid` and `rho` must each hold `len` doubles.
int32_t sl_density_copy(const SlDensity *handle, double *grid, double *rho, size_t len);

// Mass of the atom at zero.
//
// # Safety
// `handle` must be a live density; `out` must be writable.
int32_t sl_density_atom(const SlDensity *handle, double *out);

// # Safety
// `handle` must come from `sl_density_compute` or be null.
void sl_density_free(SlDensity *handle);

// Limit of `(1/m) Tr (Y^T Y/m + gamma)^-1` and the scaled training loss.
//
// # Safety
// `trace` and `loss` must be writable.
int32_t sl_ridge_trace(SlParams p, double gamma, double *trace, double *loss);

// Runs the simulation described by a run-configuration JSON and keeps the
// final-layer eigenvalues of every trial.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
int32_t sl_simulate_json(const char *json, SlSpectrum **out);

// # Safety
// `handle` must be a live spectrum or null.
size_t sl_spectrum_len(const SlSpectrum *handle);

// # Safety
// `buf` must hold `len` doubles.
int32_t sl_spectrum_copy(const SlSpectrum *handle, double *buf, size_t len);

// # Safety
// `handle` must come from `sl_simulate_json` or be null.
void sl_spectrum_free(SlSpectrum *handle);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPECTRAL_LAW_H */
