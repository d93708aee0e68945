//! Pump intensity and Rabi frequencies.

use std::f64::consts::PI;

use crate::error::ModelError;
use crate::units::{ELEMENTARY_CHARGE_STATC, ERG_PER_S_PER_W, HBAR_ERG_S, SPEED_OF_LIGHT_CM_S};

use super::AtomSystem;

const NS_PER_S: f64 = 1.0e-9;

/// Beam intensity in W/cm² from power (W) and beam area (cm²).
pub fn intensity_from_power(power: f64, area: f64) -> Result<f64, ModelError> {
    if !(area > 0.0) {
        return Err(ModelError::Domain {
            quantity: "beam_area",
            value: area,
        });
    }
    if !(power >= 0.0) {
        return Err(ModelError::Domain {
            quantity: "power",
            value: power,
        });
    }
    Ok(power / area)
}

/// Ω (rad/ns) from intensity in W/cm², using Ω/2π = coefficient·√I.
pub fn rabi_from_intensity(atom: &AtomSystem, intensity: f64) -> Result<f64, ModelError> {
    if !(intensity >= 0.0) {
        return Err(ModelError::Domain {
            quantity: "intensity",
            value: intensity,
        });
    }
    Ok(2.0 * PI * atom.rabi_intensity_coefficient * intensity.sqrt() * NS_PER_S)
}

/// Optical field amplitude (statV/cm) for an intensity in W/cm², I = cE²/8π.
pub fn field_from_intensity(intensity: f64) -> Result<f64, ModelError> {
    if !(intensity >= 0.0) {
        return Err(ModelError::Domain {
            quantity: "intensity",
            value: intensity,
        });
    }
    Ok((8.0 * PI * intensity * ERG_PER_S_PER_W / SPEED_OF_LIGHT_CM_S).sqrt())
}

/// Ω = E℘ₓ/ħ in rad/ns, with ℘ₓ = `dipole_projection_factor`·℘ and the full
/// dipole ℘ given in e·cm.
pub fn rabi_from_field(atom: &AtomSystem, field_amplitude: f64, dipole: f64) -> Result<f64, ModelError> {
    if !(field_amplitude >= 0.0) {
        return Err(ModelError::Domain {
            quantity: "field_amplitude",
            value: field_amplitude,
        });
    }
    if !(dipole >= 0.0) {
        return Err(ModelError::Domain {
            quantity: "dipole",
            value: dipole,
        });
    }
    let projected = dipole * ELEMENTARY_CHARGE_STATC * atom.dipole_projection_factor;
    Ok(field_amplitude * projected / HBAR_ERG_S * NS_PER_S)
}

/// Ω̃ = √(Ω² + Δ²).
#[inline]
pub fn generalized_rabi(rabi: f64, detuning: f64) -> f64 {
    rabi.hypot(detuning)
}
