//! Reflectivity of the vapor/window interface across a probe scan.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::fm::ReflectivityCurve;
use crate::model::{coherence_rates, refractive_index, susceptibility, AtomSystem, DriveField, VaporState};
use crate::units::{angular_to_ghz, ghz_to_angular};

/// Sapphire near 770 nm.
pub const SAPPHIRE_INDEX: f64 = 1.76;

/// Window material with a real refractive index n₀ > 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowMedium {
    pub n0: f64,
}

impl Default for WindowMedium {
    fn default() -> Self {
        Self { n0: SAPPHIRE_INDEX }
    }
}

impl WindowMedium {
    pub fn new(n0: f64) -> Result<Self, ModelError> {
        if !(n0 > 1.0 && n0.is_finite()) {
            return Err(ModelError::Domain {
                quantity: "window_index",
                value: n0,
            });
        }
        Ok(Self { n0 })
    }

    /// Reflectivity against vacuum (n = 1).
    pub fn baseline(&self) -> f64 {
        reflectivity(Complex64::new(1.0, 0.0), self)
    }
}

/// R = |(n − n₀)/(n + n₀)|² at normal incidence.
pub fn reflectivity(n_vapor: Complex64, window: &WindowMedium) -> f64 {
    let n0 = Complex64::from(window.n0);
    ((n_vapor - n0) / (n_vapor + n0)).norm_sqr()
}

/// Probe beam: a recorded Rabi frequency (the response is linear in the
/// probe) and the scan of bare detunings ω_ab − ω_p in rad/ns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeField {
    pub rabi_probe: f64,
    pub detuning_grid: Vec<f64>,
}

impl ProbeField {
    pub fn from_grid(rabi_probe: f64, detuning_grid: Vec<f64>) -> Result<Self, ModelError> {
        if detuning_grid.len() < 2 {
            return Err(ModelError::Grid(format!(
                "need at least 2 points, got {}",
                detuning_grid.len()
            )));
        }
        if let Some(i) = detuning_grid.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(ModelError::Grid(format!(
                "grid not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(Self {
            rabi_probe,
            detuning_grid,
        })
    }

    /// `points` equally spaced detunings covering `span_ghz` around `center_ghz`.
    pub fn uniform_ghz(center_ghz: f64, span_ghz: f64, points: usize) -> Result<Self, ModelError> {
        if !(span_ghz > 0.0) {
            return Err(ModelError::Grid(format!("span must be positive, got {span_ghz}")));
        }
        if points < 2 {
            return Err(ModelError::Grid(format!("need at least 2 points, got {points}")));
        }
        let step = span_ghz / (points - 1) as f64;
        let start = center_ghz - span_ghz / 2.0;
        let grid = (0..points)
            .map(|i| ghz_to_angular(start + step * i as f64))
            .collect();
        Self::from_grid(0.0, grid)
    }

    pub fn grid_ghz(&self) -> Vec<f64> {
        self.detuning_grid.iter().map(|&d| angular_to_ghz(d)).collect()
    }

    /// Largest spacing between neighbouring grid points, GHz.
    pub fn max_step_ghz(&self) -> f64 {
        self.detuning_grid
            .windows(2)
            .map(|w| angular_to_ghz(w[1] - w[0]))
            .fold(0.0, f64::max)
    }

    /// Requires the grid spacing to be at most a tenth of `feature_ghz`.
    pub fn check_resolution(&self, feature_ghz: f64) -> Result<(), ModelError> {
        let step = self.max_step_ghz();
        if step > feature_ghz / 10.0 {
            return Err(ModelError::Grid(format!(
                "grid step {step} GHz exceeds a tenth of the narrowest feature ({feature_ghz} GHz)"
            )));
        }
        Ok(())
    }
}

/// Optical response at one probe detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub chi: Complex64,
    pub n: Complex64,
    pub reflectivity: f64,
    pub floor_hit: bool,
}

/// Everything needed to evaluate the response at an arbitrary probe
/// detuning: the resolved vapor, drive and window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumModel {
    pub atom: AtomSystem,
    pub vapor: VaporState,
    /// Ω, rad/ns.
    pub rabi: f64,
    /// δ_cb, rad/ns.
    pub pump_detuning: f64,
    pub window: WindowMedium,
}

impl SpectrumModel {
    pub fn new(
        atom: &AtomSystem,
        vapor: &VaporState,
        drive: &DriveField,
        window: &WindowMedium,
    ) -> Result<Self, ModelError> {
        Ok(Self {
            atom: *atom,
            vapor: *vapor,
            rabi: drive.rabi(atom)?,
            pump_detuning: drive.pump_detuning(atom, vapor.n_b, vapor.collisional_shift),
            window: *window,
        })
    }

    /// Response at bare probe detuning `detuning` (rad/ns).
    pub fn point(&self, detuning: f64) -> SpectrumPoint {
        let rates = coherence_rates(&self.atom, &self.vapor, detuning, self.pump_detuning);
        let chi = susceptibility(&self.atom, &self.vapor, &rates, self.rabi);
        let n = refractive_index(chi.value);
        SpectrumPoint {
            chi: chi.value,
            n,
            reflectivity: reflectivity(n, &self.window),
            floor_hit: chi.floor_hit,
        }
    }

    /// Half-width γ̃_ab/2π of the probe line, GHz.
    pub fn narrowest_feature_ghz(&self) -> f64 {
        angular_to_ghz(self.atom.gamma_rad / 2.0 + self.vapor.gamma_self)
    }

    /// Probe detuning (GHz, bare axis) of the shifted line centre.
    pub fn line_center_ghz(&self) -> f64 {
        -angular_to_ghz(self.vapor.lorentz_shift + self.vapor.collisional_shift)
    }
}

impl ReflectivityCurve for SpectrumModel {
    fn reflectivity_at(&self, detuning_ghz: f64) -> f64 {
        self.point(ghz_to_angular(detuning_ghz)).reflectivity
    }

    fn feature_width_ghz(&self) -> Option<f64> {
        Some(self.narrowest_feature_ghz())
    }
}

/// Per-point channels over a probe scan. `grid` is in GHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexSpectrum {
    pub grid: Vec<f64>,
    pub chi: Vec<Complex64>,
    pub n: Vec<Complex64>,
    pub reflectivity: Vec<f64>,
    pub fm_signal: Option<Vec<f64>>,
    /// Points at which the susceptibility denominator floor was applied.
    pub floor_hits: usize,
}

impl ComplexSpectrum {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn set_fm_signal(&mut self, signal: Vec<f64>) {
        assert_eq!(signal.len(), self.grid.len(), "FM channel length");
        self.fm_signal = Some(signal);
    }
}

/// Evaluates χ, n and R at every grid point.
pub fn reflection_spectrum(
    atom: &AtomSystem,
    vapor: &VaporState,
    drive: &DriveField,
    probe: &ProbeField,
    window: &WindowMedium,
) -> Result<ComplexSpectrum, ModelError> {
    let model = SpectrumModel::new(atom, vapor, drive, window)?;
    Ok(spectrum_from_model(&model, probe))
}

pub fn spectrum_from_model(model: &SpectrumModel, probe: &ProbeField) -> ComplexSpectrum {
    let points: Vec<SpectrumPoint> = probe.detuning_grid.par_iter().map(|&d| model.point(d)).collect();
    ComplexSpectrum {
        grid: probe.grid_ghz(),
        chi: points.iter().map(|p| p.chi).collect(),
        n: points.iter().map(|p| p.n).collect(),
        reflectivity: points.iter().map(|p| p.reflectivity).collect(),
        fm_signal: None,
        floor_hits: points.iter().filter(|p| p.floor_hit).count(),
    }
}
