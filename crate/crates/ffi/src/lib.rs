//! C ABI over `srfm`.
//!
//! Scenarios and spectra are opaque handles owned by the caller and released
//! with the matching `*_free`. Every fallible call returns an [`SrfmStatus`];
//! on failure [`srfm_last_error`] holds a message for the calling thread.
//! Frequencies are GHz, densities cm⁻³, as in the config files.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use srfm::analysis::{asymmetry, fit_doublet, width_from_mm};
use srfm::config::{self, ScenarioConfig};
use srfm::model::{generalized_rabi, self_width};
use srfm::scenario::{simulate, Simulation};
use srfm::units::{angular_to_ghz, ghz_to_angular};
use srfm::{Error, ModelError};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrfmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Model = 4,
    NoConvergence = 5,
    Analysis = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Per-point channels of a computed spectrum.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrfmChannel {
    DetuningGhz = 0,
    ReChi = 1,
    ImChi = 2,
    ReN = 3,
    ImN = 4,
    Reflectivity = 5,
    FmSignal = 6,
}

/// A resolved, validated scenario configuration.
pub struct SrfmScenario(ScenarioConfig);

/// A computed spectrum with its resolved populations.
pub struct SrfmSpectrum(Simulation);

/// Fitted derivative-Lorentzian doublet. `width_ghz` is the full width.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SrfmDoubletFit {
    pub splitting_ghz: f64,
    pub width_ghz: f64,
    pub center_ghz: f64,
    pub amplitude_1: f64,
    pub amplitude_2: f64,
    /// NaN when both amplitudes vanish.
    pub asymmetry: f64,
    pub residual_rms: f64,
    pub gradient_norm: f64,
    pub iterations: u32,
    pub converged: bool,
    pub degenerate: bool,
}

/// Derived quantities of a spectrum, GHz and cm⁻³.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SrfmDerived {
    pub gamma_self_ghz: f64,
    pub lorentz_shift_ghz: f64,
    pub rabi_ghz: f64,
    pub generalized_rabi_ghz: f64,
    pub n_a: f64,
    pub n_b: f64,
    pub n_c: f64,
    pub iterations: u32,
    pub residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn status_of(e: &Error) -> SrfmStatus {
    match e {
        Error::Config(_) => SrfmStatus::Config,
        Error::Model(ModelError::NoConvergence { .. }) => SrfmStatus::NoConvergence,
        Error::Model(_) => SrfmStatus::Model,
        Error::Analysis(_) => SrfmStatus::Analysis,
        Error::Parse { .. } | Error::Io { .. } | Error::Output(_) => SrfmStatus::Io,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (SrfmStatus, String)>) -> SrfmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SrfmStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("panic inside srfm");
            SrfmStatus::Panic
        }
    }
}

fn lift<T>(r: Result<T, impl Into<Error>>) -> Result<T, (SrfmStatus, String)> {
    r.map_err(|e| {
        let e = e.into();
        (status_of(&e), e.to_string())
    })
}

fn null(what: &str) -> (SrfmStatus, String) {
    (SrfmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (SrfmStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (SrfmStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (SrfmStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next srfm call on the same thread.
#[no_mangle]
pub extern "C" fn srfm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn srfm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses and validates a flat TOML scenario. No environment overrides apply.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn srfm_scenario_from_toml(
    toml: *const c_char,
    out: *mut *mut SrfmScenario,
) -> SrfmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let src = text(toml, "toml")?;
        let cfg = lift(config::load(src, std::iter::empty(), &BTreeMap::new()))?;
        *out = Box::into_raw(Box::new(SrfmScenario(cfg)));
        Ok(())
    })
}

/// Loads a bundled preset by name (e.g. "fig2a").
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn srfm_scenario_from_preset(
    name: *const c_char,
    out: *mut *mut SrfmScenario,
) -> SrfmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let name = text(name, "name")?;
        let src = srfm::presets::preset(name)
            .ok_or_else(|| (SrfmStatus::Config, format!("unknown preset {name:?}")))?;
        let cfg = lift(config::load(src, std::iter::empty(), &BTreeMap::new()))?;
        *out = Box::into_raw(Box::new(SrfmScenario(cfg)));
        Ok(())
    })
}

/// Number of probe grid points the scenario will compute.
///
/// # Safety
/// `scenario` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn srfm_scenario_grid_points(scenario: *const SrfmScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.0.grid_points)
}

/// # Safety
/// `scenario` must come from `srfm_scenario_from_*` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn srfm_scenario_free(scenario: *mut SrfmScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Solves populations and evaluates χ, n, R and the lock-in FM signal over
/// the scenario grid.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn srfm_spectrum_compute(
    scenario: *const SrfmScenario,
    out: *mut *mut SrfmSpectrum,
) -> SrfmStatus {
    guard(|| {
        let cfg = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let sim = lift(simulate(&cfg.0))?;
        *out = Box::into_raw(Box::new(SrfmSpectrum(sim)));
        Ok(())
    })
}

/// # Safety
/// `spectrum` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn srfm_spectrum_len(spectrum: *const SrfmSpectrum) -> usize {
    spectrum.as_ref().map_or(0, |s| s.0.spectrum.len())
}

/// Copies one channel into `buf`, which must hold `srfm_spectrum_len` values.
///
/// # Safety
/// `spectrum` must be a live handle; `buf` must be writable for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn srfm_spectrum_copy(
    spectrum: *const SrfmSpectrum,
    channel: SrfmChannel,
    buf: *mut f64,
    capacity: usize,
) -> SrfmStatus {
    guard(|| {
        let sim = &spectrum.as_ref().ok_or_else(|| null("spectrum"))?.0;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let s = &sim.spectrum;
        if capacity < s.len() {
            return Err((
                SrfmStatus::BufferTooSmall,
                format!("buffer holds {capacity} values, spectrum has {}", s.len()),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(buf, s.len());
        let fill = |dst: &mut [f64], values: &mut dyn Iterator<Item = f64>| {
            dst.iter_mut().zip(values).for_each(|(d, v)| *d = v);
        };
        match channel {
            SrfmChannel::DetuningGhz => dst.copy_from_slice(&s.grid),
            SrfmChannel::ReChi => fill(dst, &mut s.chi.iter().map(|c| c.re)),
            SrfmChannel::ImChi => fill(dst, &mut s.chi.iter().map(|c| c.im)),
            SrfmChannel::ReN => fill(dst, &mut s.n.iter().map(|c| c.re)),
            SrfmChannel::ImN => fill(dst, &mut s.n.iter().map(|c| c.im)),
            SrfmChannel::Reflectivity => dst.copy_from_slice(&s.reflectivity),
            SrfmChannel::FmSignal => dst.copy_from_slice(sim.fm_signal()),
        }
        Ok(())
    })
}

/// # Safety
/// `spectrum` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn srfm_spectrum_derived(
    spectrum: *const SrfmSpectrum,
    out: *mut SrfmDerived,
) -> SrfmStatus {
    guard(|| {
        let sim = &spectrum.as_ref().ok_or_else(|| null("spectrum"))?.0;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let v = &sim.vapor;
        let rabi = angular_to_ghz(sim.model.rabi);
        *out = SrfmDerived {
            gamma_self_ghz: angular_to_ghz(v.gamma_self),
            lorentz_shift_ghz: angular_to_ghz(v.lorentz_shift),
            rabi_ghz: rabi,
            generalized_rabi_ghz: generalized_rabi(rabi, angular_to_ghz(sim.model.pump_detuning)),
            n_a: v.n_a,
            n_b: v.n_b,
            n_c: v.n_c,
            iterations: v.iterations as u32,
            residual: v.residual,
        };
        Ok(())
    })
}

/// # Safety
/// `spectrum` must come from `srfm_spectrum_compute` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn srfm_spectrum_free(spectrum: *mut SrfmSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Fits a derivative-Lorentzian doublet to `signal` sampled on `grid_ghz`.
/// A fit that fails to converge or collapses is still returned (see the
/// `converged`/`degenerate` flags); only unusable input is an error.
///
/// # Safety
/// `signal` and `grid_ghz` must be readable for `len` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn srfm_fit_doublet(
    signal: *const f64,
    grid_ghz: *const f64,
    len: usize,
    out: *mut SrfmDoubletFit,
) -> SrfmStatus {
    guard(|| {
        let signal = slice(signal, len, "signal")?;
        let grid = slice(grid_ghz, len, "grid_ghz")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let fit = lift(fit_doublet(signal, grid, None))?;
        *out = SrfmDoubletFit {
            splitting_ghz: fit.splitting,
            width_ghz: fit.width,
            center_ghz: fit.center,
            amplitude_1: fit.amplitudes[0],
            amplitude_2: fit.amplitudes[1],
            asymmetry: asymmetry(&fit).unwrap_or(f64::NAN),
            residual_rms: fit.residual_rms,
            gradient_norm: fit.gradient_norm,
            iterations: fit.iterations as u32,
            converged: fit.converged,
            degenerate: fit.degenerate,
        };
        Ok(())
    })
}

/// Γ_self/2π in GHz for ground-state density `n_b` (cm⁻³) with the default
/// calibration.
#[no_mangle]
pub extern "C" fn srfm_self_width_ghz(n_b: f64) -> f64 {
    angular_to_ghz(self_width(&srfm::model::AtomSystem::potassium(), n_b))
}

/// √(Ω² + Δ²), any consistent unit.
#[no_mangle]
pub extern "C" fn srfm_generalized_rabi(rabi: f64, detuning: f64) -> f64 {
    generalized_rabi(rabi, detuning)
}

/// Width estimate 0.87·Δω_mm from the extrema separation.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn srfm_width_from_mm(delta_mm_ghz: f64, out: *mut f64) -> SrfmStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = lift(width_from_mm(delta_mm_ghz))?;
        Ok(())
    })
}

/// Angular frequency (rad/ns) for a frequency in GHz.
#[no_mangle]
pub extern "C" fn srfm_ghz_to_angular(ghz: f64) -> f64 {
    ghz_to_angular(ghz)
}
