//! Forward model and analysis toolkit for selective-reflection FM spectroscopy
//! of a dense, coherently driven V-type vapor.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: Rabi frequencies, self-consistent level populations,
//!   excitation-dependent self-broadening and Lorentz shift, and the complex
//!   probe susceptibility of the driven three-level system.
//! - [`reflection`] and [`fm`]: vapor/window reflectivity across a probe scan and
//!   the frequency-modulation lock-in measurement built on top of it.
//! - [`analysis`]: extrema and zero-crossing width estimation, Autler-Townes
//!   doublet fitting, asymmetry and splitting-vs-Rabi regression.
//! - [`config`] and [`scenario`]: flat key-value scenario files, presets and the
//!   orchestration used by the `srfm` binary.
//!
//! Spectroscopic inputs and outputs are ordinary frequencies in GHz; everything
//! inside the model runs in angular units (rad/ns), see [`units`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod error;
pub mod fm;
pub mod model;
pub mod presets;
pub mod reflection;
pub mod scenario;
pub mod units;

pub use error::{AnalysisError, ConfigError, Error, ModelError};
