//! Microscopic model of the driven dense vapor.

mod atom;
mod rabi;
mod susceptibility;
mod vapor;

pub use atom::{AtomSystem, CALIBRATION_DENSITY, CALIBRATION_WIDTH_GHZ, POTASSIUM_D1_LIFETIME_NS};
pub use rabi::{
    field_from_intensity, generalized_rabi, intensity_from_power, rabi_from_field, rabi_from_intensity,
};
pub use susceptibility::{
    coherence_rates, refractive_index, susceptibility, CoherenceRates, Susceptibility, DENOMINATOR_FLOOR,
};
pub use vapor::{
    lorentz_shift, self_width, steady_populations, DetuningReference, DriveField, PumpStrength, SolveOptions,
    VaporState,
};
