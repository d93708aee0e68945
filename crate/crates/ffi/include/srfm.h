#ifndef SRFM_H
#define SRFM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum SrfmStatus {
  SRFM_STATUS_OK = 0,
  SRFM_STATUS_NULL_POINTER = 1,
  SRFM_STATUS_INVALID_UTF8 = 2,
  SRFM_STATUS_CONFIG = 3,
  SRFM_STATUS_MODEL = 4,
  SRFM_STATUS_NO_CONVERGENCE = 5,
  SRFM_STATUS_ANALYSIS = 6,
  SRFM_STATUS_IO = 7,
  SRFM_STATUS_BUFFER_TOO_SMALL = 8,
  SRFM_STATUS_PANIC = 9,
} SrfmStatus;

// Per-point channels of a computed spectrum.
typedef enum SrfmChannel {
  SRFM_CHANNEL_DETUNING_GHZ = 0,
  SRFM_CHANNEL_RE_CHI = 1,
  SRFM_CHANNEL_IM_CHI = 2,
  SRFM_CHANNEL_RE_N = 3,
  SRFM_CHANNEL_IM_N = 4,
  SRFM_CHANNEL_REFLECTIVITY = 5,
  SRFM_CHANNEL_FM_SIGNAL = 6,
} SrfmChannel;

// A resolved, validated scenario configuration.
typedef struct SrfmScenario SrfmScenario;

// A computed spectrum with its resolved populations.
typedef struct SrfmSpectrum SrfmSpectrum;

// Derived quantities of a spectrum, GHz and cm⁻³.
typedef struct SrfmDerived {
  double gamma_self_ghz;
  double lorentz_shift_ghz;
  double rabi_ghz;
  double generalized_rabi_ghz;
  double n_a;
  double n_b;
  double n_c;
  uint32_t iterations;
  double residual;
} SrfmDerived;

// Fitted derivative-Lorentzian doublet. `width_ghz` is the full width.
typedef struct SrfmDoubletFit {
  double splitting_ghz;
  double width_ghz;
  double center_ghz;
  double amplitude_1;
  double amplitude_2;
  // NaN when both amplitudes vanish.
  double asymmetry;
  double residual_rms;
  double gradient_norm;
  uint32_t iterations;
  bool converged;
  bool degenerate;
} SrfmDoubletFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// Valid until the next srfm call on the same thread.
const char *srfm_last_error(void);

// Library version, static storage.
const char *srfm_version(void);

// Parses and validates a flat TOML scenario. No environment overrides apply.
//
// # Safety
// `toml` must be a NUL-terminated string; `out` must be writable.
enum SrfmStatus srfm_scenario_from_toml(const char *toml, struct SrfmScenario **out);

// Loads a bundled preset by name (e.g. "fig2a").
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum SrfmStatus srfm_scenario_from_preset(const char *name, struct SrfmScenario **out);

// Number of probe grid points the scenario will compute.
//
// # Safety
// `scenario` must be a live handle or null (returns 0).
uintptr_t srfm_scenario_grid_points(const struct SrfmScenario *scenario);

// # Safety
// `scenario` must come from `srfm_scenario_from_*` and not be used afterwards.
void srfm_scenario_free(struct SrfmScenario *scenario);

// Solves populations and evaluates χ, n, R and the lock-in FM signal over
// the scenario grid.
//
// # Safety
// `scenario` must be a live handle; `out` must be writable.
enum SrfmStatus srfm_spectrum_compute(const struct SrfmScenario *scenario,
                                      struct SrfmSpectrum **out);

// # Safety
// `spectrum` must be a live handle or null (returns 0).
uintptr_t srfm_spectrum_len(const struct SrfmSpectrum *spectrum);

// Copies one channel into `buf`, which must hold `srfm_spectrum_len` values.
//
// # Safety
// `spectrum` must be a live handle; `buf` must be writable for `capacity` doubles.
enum SrfmStatus srfm_spectrum_copy(const struct SrfmSpectrum *spectrum,
                                   enum SrfmChannel channel,
                                   double *buf,
                                   uintptr_t capacity);

// # Safety
// `spectrum` must be a live handle; `out` must be writable.
enum SrfmStatus srfm_spectrum_derived(const struct SrfmSpectrum *spectrum, struct SrfmDerived *out);

// # Safety
// `spectrum` must come from `srfm_spectrum_compute` and not be used afterwards.
void srfm_spectrum_free(struct SrfmSpectrum *spectrum);

// Fits a derivative-Lorentzian doublet to `signal` sampled on `grid_ghz`.
// A fit that fails to converge or collapses is still returned (see the
// `converged`/`degenerate` flags); only unusable input is an error.
//
// # Safety
// `signal` and `grid_ghz` must be readable for `len` doubles; `out` writable.
enum SrfmStatus srfm_fit_doublet(const double *signal,
                                 const double *grid_ghz,
                                 uintptr_t len,
                                 struct SrfmDoubletFit *out);

// Γ_self/2π in GHz for ground-state density `n_b` (cm⁻³) with the default
// calibration.
double srfm_self_width_ghz(double n_b);

// √(Ω² + Δ²), any consistent unit.
double srfm_generalized_rabi(double rabi, double detuning);

// Width estimate 0.87·Δω_mm from the extrema separation.
//
// # Safety
// `out` must be writable.
enum SrfmStatus srfm_width_from_mm(double delta_mm_ghz, double *out);

// Angular frequency (rad/ns) for a frequency in GHz.
double srfm_ghz_to_angular(double ghz);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SRFM_H */
