//! Level populations and the excitation-dependent width and shift.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

use super::{intensity_from_power, rabi_from_intensity, AtomSystem};

/// Γ_self = k·n_b.
#[inline]
pub fn self_width(atom: &AtomSystem, n_b: f64) -> f64 {
    atom.k_self * n_b
}

/// Δω_L = (k/3)(n_b − n_a); positive for an unexcited vapor.
#[inline]
pub fn lorentz_shift(atom: &AtomSystem, n_b: f64, n_a: f64) -> f64 {
    atom.k_self / 3.0 * (n_b - n_a)
}

/// How the pump strength is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PumpStrength {
    /// Power in W and beam area in cm², converted through the intensity law.
    Power { power: f64, beam_area: f64 },
    /// Ω in rad/ns, set directly.
    Rabi(f64),
}

/// What the pump detuning is measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetuningReference {
    /// From the c↔b resonance including the local-field and collisional
    /// shifts: δ_cb = Δ.
    #[default]
    Shifted,
    /// From the unshifted resonance: δ_cb = Δ + Δω_L(n_b) + Δω_c.
    Bare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveField {
    pub strength: PumpStrength,
    /// Pump detuning Δ, rad/ns.
    pub detuning: f64,
    pub reference: DetuningReference,
    /// Effective excited-state population decay Γ₁, rad/ns.
    pub population_decay: f64,
    /// Forces n_c = f·N and bypasses the saturation model.
    pub excitation_override: Option<f64>,
}

impl DriveField {
    /// A pump of given Rabi frequency and detuning (both rad/ns).
    pub fn with_rabi(rabi: f64, detuning: f64, population_decay: f64) -> Self {
        Self {
            strength: PumpStrength::Rabi(rabi),
            detuning,
            reference: DetuningReference::Shifted,
            population_decay,
            excitation_override: None,
        }
    }

    /// Pump switched off.
    pub fn off(population_decay: f64) -> Self {
        Self::with_rabi(0.0, 0.0, population_decay)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match self.strength {
            PumpStrength::Power { power, beam_area } => {
                intensity_from_power(power, beam_area)?;
            }
            PumpStrength::Rabi(rabi) => {
                if !(rabi >= 0.0 && rabi.is_finite()) {
                    return Err(ModelError::Domain {
                        quantity: "rabi",
                        value: rabi,
                    });
                }
            }
        }
        if !self.detuning.is_finite() {
            return Err(ModelError::Domain {
                quantity: "detuning",
                value: self.detuning,
            });
        }
        if !(self.population_decay > 0.0 && self.population_decay.is_finite()) {
            return Err(ModelError::Domain {
                quantity: "population_decay",
                value: self.population_decay,
            });
        }
        if let Some(f) = self.excitation_override {
            if !(0.0..=1.0).contains(&f) {
                return Err(ModelError::Domain {
                    quantity: "excitation_override",
                    value: f,
                });
            }
        }
        Ok(())
    }

    /// Ω in rad/ns.
    pub fn rabi(&self, atom: &AtomSystem) -> Result<f64, ModelError> {
        match self.strength {
            PumpStrength::Power { power, beam_area } => {
                rabi_from_intensity(atom, intensity_from_power(power, beam_area)?)
            }
            PumpStrength::Rabi(rabi) => Ok(rabi),
        }
    }

    /// δ_cb for a vapor with ground population `n_b` (n_a = 0).
    pub fn pump_detuning(&self, atom: &AtomSystem, n_b: f64, collisional_shift: f64) -> f64 {
        match self.reference {
            DetuningReference::Shifted => self.detuning,
            DetuningReference::Bare => self.detuning + lorentz_shift(atom, n_b, 0.0) + collisional_shift,
        }
    }
}

/// Populations (cm⁻³) with the derived width and shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VaporState {
    pub density_total: f64,
    pub n_a: f64,
    pub n_b: f64,
    pub n_c: f64,
    /// Γ_self = k·n_b, rad/ns.
    pub gamma_self: f64,
    /// Δω_L, rad/ns.
    pub lorentz_shift: f64,
    /// Δω_c, rad/ns.
    pub collisional_shift: f64,
    /// Fixed-point iterations spent (0 when no solve was needed).
    pub iterations: usize,
    /// |n_c(n_b) − n_c| / N at the returned state.
    pub residual: f64,
}

impl VaporState {
    pub fn from_populations(atom: &AtomSystem, n_a: f64, n_b: f64, n_c: f64, collisional_shift: f64) -> Self {
        Self {
            density_total: n_a + n_b + n_c,
            n_a,
            n_b,
            n_c,
            gamma_self: self_width(atom, n_b),
            lorentz_shift: lorentz_shift(atom, n_b, n_a),
            collisional_shift,
            iterations: 0,
            residual: 0.0,
        }
    }

    pub fn unexcited(atom: &AtomSystem, density: f64, collisional_shift: f64) -> Self {
        Self::from_populations(atom, 0.0, density, 0.0, collisional_shift)
    }

    /// Recomputes the derived width and shift after a population change.
    pub fn with_populations(self, atom: &AtomSystem, n_a: f64, n_b: f64, n_c: f64) -> Self {
        Self {
            iterations: self.iterations,
            residual: self.residual,
            ..Self::from_populations(atom, n_a, n_b, n_c, self.collisional_shift)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 500,
            damping: 0.5,
        }
    }
}

/// Two-level saturation of b↔c: excited population for a given ground
/// population `n_b`, with γ̃_cb and (for a bare reference) δ_cb evaluated at
/// that n_b.
fn saturated_excitation(
    atom: &AtomSystem,
    drive: &DriveField,
    rabi: f64,
    density: f64,
    collisional_shift: f64,
    n_b: f64,
) -> f64 {
    if rabi == 0.0 {
        return 0.0;
    }
    let coherence = atom.gamma_rad / 2.0 + self_width(atom, n_b);
    let detuning = drive.pump_detuning(atom, n_b, collisional_shift);
    let drive_rate = rabi * rabi * coherence / drive.population_decay;
    density * (drive_rate / 2.0) / (detuning * detuning + coherence * coherence + drive_rate)
}

/// Self-consistent steady-state populations (n_a = 0, n_b, n_c).
///
/// The saturation of b↔c depends on n_b through Γ_self and, for a bare
/// detuning reference, through the local-field shift; the loop iterates
/// n_b ← (1 − d)·n_b + d·(N − n_c(n_b)) until |N − n_c(n_b) − n_b| ≤ tol·N.
pub fn steady_populations(
    atom: &AtomSystem,
    drive: &DriveField,
    density: f64,
    collisional_shift: f64,
    opts: &SolveOptions,
) -> Result<VaporState, ModelError> {
    atom.validate()?;
    drive.validate()?;
    if !(density > 0.0 && density.is_finite()) {
        return Err(ModelError::Domain {
            quantity: "density",
            value: density,
        });
    }
    if !(opts.tol > 0.0) {
        return Err(ModelError::Domain {
            quantity: "tol",
            value: opts.tol,
        });
    }
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(ModelError::Domain {
            quantity: "damping",
            value: opts.damping,
        });
    }

    if let Some(fraction) = drive.excitation_override {
        let n_c = fraction * density;
        return Ok(VaporState::from_populations(
            atom,
            0.0,
            density - n_c,
            n_c,
            collisional_shift,
        ));
    }

    let rabi = drive.rabi(atom)?;
    let mut n_b = density;
    let mut residual = f64::INFINITY;
    for iteration in 0..=opts.max_iter {
        let n_c = saturated_excitation(atom, drive, rabi, density, collisional_shift, n_b);
        let target = density - n_c;
        residual = (target - n_b).abs() / density;
        if residual <= opts.tol {
            let mut state = VaporState::from_populations(atom, 0.0, n_b, density - n_b, collisional_shift);
            state.iterations = iteration;
            state.residual = residual;
            return Ok(state);
        }
        if iteration == opts.max_iter {
            break;
        }
        n_b += opts.damping * (target - n_b);
    }
    Err(ModelError::NoConvergence {
        iterations: opts.max_iter,
        last_n_b: n_b,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CALIBRATION_DENSITY;
    use crate::units::{angular_to_ghz, ghz_to_angular};

    const N: f64 = CALIBRATION_DENSITY;

    fn atom() -> AtomSystem {
        AtomSystem::potassium()
    }

    #[test]
    fn self_width_examples() {
        let a = atom();
        assert!((angular_to_ghz(self_width(&a, N)) / 28.4 - 1.0).abs() < 1e-12);
        assert_eq!(self_width(&a, 0.0), 0.0);
        assert!((self_width(&a, N / 2.0) - self_width(&a, N) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn lorentz_shift_examples() {
        let a = atom();
        let shift = angular_to_ghz(lorentz_shift(&a, N, 0.0));
        assert!((shift - 28.4 / 3.0).abs() < 1e-9);
        assert_eq!(lorentz_shift(&a, 3e16, 3e16), 0.0);
        let full = lorentz_shift(&a, 4e17, 1e17);
        let half = lorentz_shift(&a, 2.5e17, 1e17);
        assert!((half / full - 0.5).abs() < 1e-12);
    }

    #[test]
    fn undriven_vapor_stays_in_ground_state() {
        let a = atom();
        let drive = DriveField::off(a.gamma_rad);
        let v = steady_populations(&a, &drive, N, 0.0, &SolveOptions::default()).unwrap();
        assert_eq!(v.n_c, 0.0);
        assert_eq!(v.n_b, N);
        assert_eq!(v.gamma_self, a.k_self * N);
        assert_eq!(v.iterations, 0);
    }

    #[test]
    fn strong_drive_saturates_to_half() {
        let a = atom();
        let mut last = 0.0;
        for rabi_ghz in [1.0, 10.0, 100.0, 1000.0] {
            let drive = DriveField::with_rabi(ghz_to_angular(rabi_ghz), ghz_to_angular(5.0), 1.0);
            let v = steady_populations(&a, &drive, N, 0.0, &SolveOptions::default()).unwrap();
            let frac = v.n_c / N;
            assert!(frac > last && frac <= 0.5);
            last = frac;
        }
        assert!((last - 0.5).abs() < 1e-3);
    }

    #[test]
    fn override_bypasses_saturation() {
        let a = atom();
        let mut drive = DriveField::off(a.gamma_rad);
        drive.excitation_override = Some(0.645);
        let v = steady_populations(&a, &drive, N, 0.0, &SolveOptions::default()).unwrap();
        assert!((v.n_b / N - 0.355).abs() < 1e-12);
        let unexcited = self_width(&a, N);
        assert!((v.gamma_self / unexcited - 0.355).abs() < 1e-12);
        assert!((0.355_f64 - 11.0 / 31.0).abs() < 1e-3);
        assert_eq!(v.iterations, 0);
    }

    #[test]
    fn override_out_of_range_is_rejected() {
        let a = atom();
        let mut drive = DriveField::off(a.gamma_rad);
        drive.excitation_override = Some(1.2);
        assert!(steady_populations(&a, &drive, N, 0.0, &SolveOptions::default()).is_err());
    }

    #[test]
    fn bare_reference_converges_and_satisfies_fixed_point() {
        let a = atom();
        let mut drive = DriveField::with_rabi(ghz_to_angular(12.0), 0.0, a.gamma_rad * 1e3);
        drive.reference = DetuningReference::Bare;
        let opts = SolveOptions::default();
        let v = steady_populations(&a, &drive, N, 0.0, &opts).unwrap();
        let rabi = drive.rabi(&a).unwrap();
        let recomputed = saturated_excitation(&a, &drive, rabi, N, 0.0, v.n_b);
        assert!((recomputed - v.n_c).abs() / N <= opts.tol);
        assert!(((v.n_a + v.n_b + v.n_c) / N - 1.0).abs() < 1e-9);
    }

    #[test]
    fn non_convergence_reports_last_iterate() {
        let a = atom();
        let mut drive = DriveField::with_rabi(ghz_to_angular(12.0), 0.0, 1.0);
        drive.reference = DetuningReference::Bare;
        let opts = SolveOptions {
            tol: 1e-15,
            max_iter: 1,
            damping: 0.5,
        };
        match steady_populations(&a, &drive, N, 0.0, &opts) {
            Err(ModelError::NoConvergence {
                iterations,
                last_n_b,
                residual,
            }) => {
                assert_eq!(iterations, 1);
                assert!(last_n_b > 0.0 && last_n_b < N);
                assert!(residual > 1e-15);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_density_and_tol() {
        let a = atom();
        let drive = DriveField::off(a.gamma_rad);
        assert!(steady_populations(&a, &drive, 0.0, 0.0, &SolveOptions::default()).is_err());
        let bad = SolveOptions {
            tol: 0.0,
            ..SolveOptions::default()
        };
        assert!(steady_populations(&a, &drive, N, 0.0, &bad).is_err());
    }
}
