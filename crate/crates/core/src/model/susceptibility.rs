//! Complex probe susceptibility of the driven V system and the refractive
//! index that follows from it.
//!
//! Levels: b ground, a probe-excited (D1), c drive-excited (D2). The probe
//! coherence ρ_ab couples through the drive to the a–c coherence, whose
//! complex rate in the equation for ρ_ab is Γ_ca* when Γ_ca = γ̃_ca + iδ_ca
//! with δ_ca = δ_cb − δ. The drive coherence enters through Γ_cb*. With
//! g = Ω/2 the steady state is
//!
//! ```text
//! χ = i·C·[(n_b − n_a) + g²(n_c − n_b)/(Γ_cb*·Γ_ca*)] / [Γ_ab + g²/Γ_ca*]
//! ```
//!
//! so that the dressed components of a saturated vapor sit at δ ≈ ±Ω/2 and
//! Im χ > 0 for an absorbing (uninverted) vapor.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{AtomSystem, VaporState};

/// Smallest admissible |denominator| of χ, rad/ns.
pub const DENOMINATOR_FLOOR: f64 = 1e-30;

/// Generalised coherence decay rates at one probe detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceRates {
    pub gamma_ab_t: f64,
    pub gamma_cb_t: f64,
    pub gamma_ca_t: f64,
    /// δ = δ_bare + Δω_L + Δω_c.
    pub probe_detuning: f64,
    /// δ_cb.
    pub pump_detuning: f64,
    /// δ_ca = δ_cb − δ.
    pub two_photon_detuning: f64,
    pub big_gamma_ab: Complex64,
    pub big_gamma_cb: Complex64,
    pub big_gamma_ca: Complex64,
}

/// Builds Γ_ab, Γ_cb and Γ_ca for a probe at bare detuning
/// `probe_detuning_bare` = ω_ab − ω_p and pump detuning `pump_detuning` = δ_cb.
pub fn coherence_rates(
    atom: &AtomSystem,
    vapor: &VaporState,
    probe_detuning_bare: f64,
    pump_detuning: f64,
) -> CoherenceRates {
    let gamma = atom.gamma_rad;
    let gamma_ab_t = gamma / 2.0 + vapor.gamma_self;
    let gamma_cb_t = gamma / 2.0 + vapor.gamma_self;
    let gamma_ca_t = gamma + vapor.gamma_self;
    let probe_detuning = probe_detuning_bare + vapor.lorentz_shift + vapor.collisional_shift;
    let two_photon_detuning = pump_detuning - probe_detuning;
    CoherenceRates {
        gamma_ab_t,
        gamma_cb_t,
        gamma_ca_t,
        probe_detuning,
        pump_detuning,
        two_photon_detuning,
        big_gamma_ab: Complex64::new(gamma_ab_t, probe_detuning),
        big_gamma_cb: Complex64::new(gamma_cb_t, pump_detuning),
        big_gamma_ca: Complex64::new(gamma_ca_t, two_photon_detuning),
    }
}

/// χ together with a flag telling whether the denominator floor was hit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Susceptibility {
    pub value: Complex64,
    pub floor_hit: bool,
}

/// Probe susceptibility for drive Rabi frequency `rabi` (rad/ns).
pub fn susceptibility(
    atom: &AtomSystem,
    vapor: &VaporState,
    rates: &CoherenceRates,
    rabi: f64,
) -> Susceptibility {
    let prefactor = atom.susceptibility_prefactor();
    let coupling_sq = 0.25 * rabi * rabi;
    let ground_term = Complex64::from(vapor.n_b - vapor.n_a);
    let i = Complex64::i();

    if coupling_sq == 0.0 {
        let (denominator, floor_hit) = floored(rates.big_gamma_ab);
        return Susceptibility {
            value: i * prefactor * ground_term / denominator,
            floor_hit,
        };
    }

    let gamma_ac = rates.big_gamma_ca.conj();
    let gamma_bc = rates.big_gamma_cb.conj();
    let numerator = ground_term + coupling_sq * (vapor.n_c - vapor.n_b) / (gamma_bc * gamma_ac);
    let (denominator, floor_hit) = floored(rates.big_gamma_ab + coupling_sq / gamma_ac);
    Susceptibility {
        value: i * prefactor * numerator / denominator,
        floor_hit,
    }
}

fn floored(z: Complex64) -> (Complex64, bool) {
    let norm = z.norm();
    if norm >= DENOMINATOR_FLOOR {
        (z, false)
    } else if norm == 0.0 {
        (Complex64::new(DENOMINATOR_FLOOR, 0.0), true)
    } else {
        (z * (DENOMINATOR_FLOOR / norm), true)
    }
}

/// n = √(1 + 4πχ) on the branch Re n ≥ 0, Im n ≥ 0 whenever the medium is
/// passive (Im χ ≥ 0). For an amplifying point (Im χ < 0) the root with
/// Re n > 0 is kept, which has Im n < 0.
pub fn refractive_index(chi: Complex64) -> Complex64 {
    let epsilon = Complex64::new(1.0, 0.0) + 4.0 * PI * chi;
    let n = epsilon.sqrt();
    if n.re < 0.0 || (n.re == 0.0 && n.im < 0.0) {
        -n
    } else {
        n
    }
}
