use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::units::{
    ghz_to_angular, nm_to_cm, ELEMENTARY_CHARGE_STATC, ERG_PER_S_PER_W, HBAR_ERG_S, SPEED_OF_LIGHT_CM_S,
};

/// Species constants for the probe (a↔b) and drive (c↔b) transitions.
///
/// Angular quantities are in rad/ns, lengths in cm, densities in cm⁻³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSystem {
    /// Probe (D1) wavelength, cm.
    pub lambda_probe: f64,
    /// Drive (D2) wavelength, cm.
    pub lambda_drive: f64,
    /// Radiative rate γ of a→b, rad/ns.
    pub gamma_rad: f64,
    /// ℘ₓ/℘.
    pub dipole_projection_factor: f64,
    /// Self-broadening coefficient k, rad·ns⁻¹·cm³.
    pub k_self: f64,
    /// Ω/2π per √(W/cm²), Hz.
    pub rabi_intensity_coefficient: f64,
}

/// Radiative lifetime of K 4p ²P₁/₂, ns.
pub const POTASSIUM_D1_LIFETIME_NS: f64 = 26.72;
/// Density at which the self-broadened width is calibrated, cm⁻³.
pub const CALIBRATION_DENSITY: f64 = 4.9e17;
/// Γ_self/2π at [`CALIBRATION_DENSITY`], GHz.
pub const CALIBRATION_WIDTH_GHZ: f64 = 28.4;

impl Default for AtomSystem {
    fn default() -> Self {
        Self::potassium()
    }
}

impl AtomSystem {
    /// Potassium D1 probe / D2 drive, self-broadening calibrated to
    /// 28.4 GHz at 4.9×10¹⁷ cm⁻³.
    pub fn potassium() -> Self {
        Self {
            lambda_probe: nm_to_cm(770.0),
            lambda_drive: nm_to_cm(766.0),
            gamma_rad: 1.0 / POTASSIUM_D1_LIFETIME_NS,
            dipole_projection_factor: 1.0 / 3.0,
            k_self: k_from_calibration(CALIBRATION_WIDTH_GHZ, CALIBRATION_DENSITY),
            rabi_intensity_coefficient: 8.0e7,
        }
    }

    /// Replaces k so that k·density/2π equals `width_ghz`.
    pub fn with_self_width_calibration(mut self, width_ghz: f64, density: f64) -> Self {
        self.k_self = k_from_calibration(width_ghz, density);
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("lambda_probe", self.lambda_probe),
            ("lambda_drive", self.lambda_drive),
            ("gamma_rad", self.gamma_rad),
            ("k_self", self.k_self),
            ("rabi_intensity_coefficient", self.rabi_intensity_coefficient),
        ];
        for (quantity, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::Domain { quantity, value });
            }
        }
        let f = self.dipole_projection_factor;
        if !(f > 0.0 && f <= 1.0) {
            return Err(ModelError::Domain {
                quantity: "dipole_projection_factor",
                value: f,
            });
        }
        Ok(())
    }

    /// Susceptibility prefactor C = 3λ³γ/(32π³) per unit density (cm³·rad/ns).
    ///
    /// With this normalisation the undriven peak Im χ equals C·n_b/γ̃_ab, which
    /// in the radiative limit reproduces the textbook resonant cross-section
    /// 3λ²/2π.
    pub fn susceptibility_prefactor(&self) -> f64 {
        3.0 * self.lambda_probe.powi(3) * self.gamma_rad / (32.0 * PI.powi(3))
    }

    /// Full dipole moment ℘ (in units of e·cm) for which Ω = E℘ₓ/ħ with
    /// E = √(8πI/c) reproduces the intensity coefficient exactly.
    pub fn dipole_matching_intensity_coefficient(&self) -> f64 {
        // Ω [rad/s] at I = 1 W/cm²
        let omega = 2.0 * PI * self.rabi_intensity_coefficient;
        let field = (8.0 * PI * ERG_PER_S_PER_W / SPEED_OF_LIGHT_CM_S).sqrt();
        let projected = omega * HBAR_ERG_S / field;
        projected / self.dipole_projection_factor / ELEMENTARY_CHARGE_STATC
    }
}

fn k_from_calibration(width_ghz: f64, density: f64) -> f64 {
    ghz_to_angular(width_ghz) / density
}
