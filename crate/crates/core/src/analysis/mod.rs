//! Data reduction: width estimation from extrema, Autler-Townes doublet
//! fitting, doublet asymmetry and the splitting-vs-Rabi regression.

mod doublet;
mod extrema;
mod regression;

pub use doublet::{
    asymmetry, derivative_lorentzian, doublet_model, fit_doublet, fit_doublet_with, initial_guess,
    initial_guesses, DoubletFit, DoubletInit, FitOptions, ONE_LINE_RATIO,
};
pub use extrema::{find_extrema, ExtremaReport, Feature};
pub use regression::{fit_linear, LinearFit};

use crate::error::AnalysisError;

/// Ratio of the self-broadened width to the max–min interval of the D1
/// reflection spectrum.
pub const WIDTH_FROM_MM_FACTOR: f64 = 0.87;

/// Γ_self/2π estimated from the max–min interval Δω_mm/2π (both GHz).
pub fn width_from_mm(delta_mm: f64) -> Result<f64, AnalysisError> {
    if !(delta_mm > 0.0) {
        return Err(AnalysisError::NonPositive(delta_mm));
    }
    Ok(WIDTH_FROM_MM_FACTOR * delta_mm)
}
