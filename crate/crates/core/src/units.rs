//! Unit conventions.
//!
//! Angular quantities are carried in rad/ns, so an ordinary frequency of
//! 1 GHz corresponds to 2π rad/ns. Number densities are in cm⁻³ and lengths
//! in cm.

use std::f64::consts::PI;

/// rad/ns per GHz.
pub const ANGULAR_PER_GHZ: f64 = 2.0 * PI;

/// Speed of light, cm/s.
pub const SPEED_OF_LIGHT_CM_S: f64 = 2.997_924_58e10;
/// Reduced Planck constant, erg·s.
pub const HBAR_ERG_S: f64 = 1.054_571_817e-27;
/// Elementary charge, statC.
pub const ELEMENTARY_CHARGE_STATC: f64 = 4.803_204_712_570_263e-10;
/// 1 W/cm² expressed in erg·s⁻¹·cm⁻².
pub const ERG_PER_S_PER_W: f64 = 1.0e7;

#[inline]
pub fn ghz_to_angular(ghz: f64) -> f64 {
    ghz * ANGULAR_PER_GHZ
}

#[inline]
pub fn angular_to_ghz(angular: f64) -> f64 {
    angular / ANGULAR_PER_GHZ
}

#[inline]
pub fn nm_to_cm(nm: f64) -> f64 {
    nm * 1.0e-7
}
