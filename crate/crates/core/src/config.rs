//! Flat key–value scenario configuration with units in the key names.
//!
//! Sources are merged as file < `SRFM_<KEY>` environment variables < explicit
//! overrides (CLI flags). Every default is materialized by [`resolve`], so the
//! echoed config reproduces a run exactly.

#![allow(non_snake_case)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::ConfigError;
use crate::fm::FmParams;
use crate::model::{AtomSystem, DetuningReference, DriveField, PumpStrength};
use crate::reflection::{ProbeField, WindowMedium, SAPPHIRE_INDEX};
use crate::units::{ghz_to_angular, nm_to_cm};

pub const ENV_PREFIX: &str = "SRFM_";
pub const MIN_GRID_POINTS: usize = 200;
/// Required ratio of scan span to the expected full linewidth.
pub const SPAN_LINEWIDTHS: f64 = 6.0;
pub const DEFAULT_BEAM_AREA_CM2: f64 = 5e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DoubletFitMode {
    /// Fit when the FM signal shows a doublet signature.
    #[default]
    Auto,
    Always,
    Never,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario_id: String,

    pub lambda_probe_nm: f64,
    pub lambda_drive_nm: f64,
    pub radiative_lifetime_ns: f64,
    pub dipole_projection_factor: f64,
    pub self_width_calibration_GHz: f64,
    pub calibration_density_per_cm3: f64,
    pub rabi_coefficient_Hz_per_sqrt_W_cm2: f64,

    pub density_per_cm3: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pump_power_W: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beam_area_cm2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pump_rabi_GHz: Option<f64>,
    pub pump_detuning_GHz: f64,
    pub pump_detuning_reference: DetuningReference,
    /// Γ₁/2π; defaults to the radiative rate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub population_decay_GHz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub excitation_override: Option<f64>,
    pub collisional_shift_GHz: f64,
    pub probe_rabi_GHz: f64,

    pub grid_center_GHz: f64,
    pub grid_span_GHz: f64,
    pub grid_points: usize,

    pub fm_range_GHz: f64,
    pub fm_rate_Hz: f64,
    pub fm_harmonic: u32,
    pub fm_cycle_samples: usize,

    pub window_index: f64,
    pub doublet_fit: DoubletFitMode,
    pub output_format: OutputFormat,

    /// Sweep points as parallel lists of (Ω, Δ) pairs.
    pub sweep_rabi_GHz: Vec<f64>,
    pub sweep_detuning_GHz: Vec<f64>,
    pub sweep_through_origin: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let atom = AtomSystem::potassium();
        let fm = FmParams::default();
        Self {
            scenario_id: "custom".into(),
            lambda_probe_nm: 770.0,
            lambda_drive_nm: 766.0,
            radiative_lifetime_ns: 1.0 / atom.gamma_rad,
            dipole_projection_factor: atom.dipole_projection_factor,
            self_width_calibration_GHz: crate::model::CALIBRATION_WIDTH_GHZ,
            calibration_density_per_cm3: crate::model::CALIBRATION_DENSITY,
            rabi_coefficient_Hz_per_sqrt_W_cm2: atom.rabi_intensity_coefficient,
            density_per_cm3: crate::model::CALIBRATION_DENSITY,
            pump_power_W: None,
            beam_area_cm2: None,
            pump_rabi_GHz: None,
            pump_detuning_GHz: 0.0,
            pump_detuning_reference: DetuningReference::Shifted,
            population_decay_GHz: None,
            excitation_override: None,
            collisional_shift_GHz: 0.0,
            probe_rabi_GHz: 0.0,
            grid_center_GHz: 0.0,
            grid_span_GHz: 400.0,
            grid_points: 2000,
            fm_range_GHz: fm.mod_range,
            fm_rate_Hz: fm.mod_rate,
            fm_harmonic: fm.harmonic,
            fm_cycle_samples: fm.cycle_samples,
            window_index: SAPPHIRE_INDEX,
            doublet_fit: DoubletFitMode::Auto,
            output_format: OutputFormat::Csv,
            sweep_rabi_GHz: Vec::new(),
            sweep_detuning_GHz: Vec::new(),
            sweep_through_origin: true,
        }
    }
}

/// Every accepted key, in declaration order.
pub const KEYS: &[&str] = &[
    "scenario_id",
    "lambda_probe_nm",
    "lambda_drive_nm",
    "radiative_lifetime_ns",
    "dipole_projection_factor",
    "self_width_calibration_GHz",
    "calibration_density_per_cm3",
    "rabi_coefficient_Hz_per_sqrt_W_cm2",
    "density_per_cm3",
    "pump_power_W",
    "beam_area_cm2",
    "pump_rabi_GHz",
    "pump_detuning_GHz",
    "pump_detuning_reference",
    "population_decay_GHz",
    "excitation_override",
    "collisional_shift_GHz",
    "probe_rabi_GHz",
    "grid_center_GHz",
    "grid_span_GHz",
    "grid_points",
    "fm_range_GHz",
    "fm_rate_Hz",
    "fm_harmonic",
    "fm_cycle_samples",
    "window_index",
    "doublet_fit",
    "output_format",
    "sweep_rabi_GHz",
    "sweep_detuning_GHz",
    "sweep_through_origin",
];

fn canonical_key(name: &str) -> Option<&'static str> {
    KEYS.iter().copied().find(|k| k.eq_ignore_ascii_case(name))
}

/// Parses config text into a key table without applying defaults.
pub fn parse_table(text: &str) -> Result<Table, ConfigError> {
    text.parse::<Table>()
        .map_err(|e| ConfigError::new("<config>", e.message().to_string()))
}

/// Interprets a raw override string as a TOML value, falling back to a
/// bare string (so `SRFM_DOUBLET_FIT=never` works unquoted).
pub fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Applies `SRFM_<KEY>` variables from `vars` onto `table`.
pub fn apply_env<I>(table: &mut Table, vars: I) -> Result<(), ConfigError>
where
    I: IntoIterator<Item = (String, String)>,
{
    for (name, raw) in vars {
        let Some(rest) = name.strip_prefix(ENV_PREFIX) else {
            continue;
        };
        let key = canonical_key(rest).ok_or_else(|| ConfigError::new(name.clone(), "no such config key"))?;
        table.insert(key.to_string(), parse_value(&raw));
    }
    Ok(())
}

/// Sets explicit overrides (CLI flags), which take precedence over everything.
pub fn apply_overrides(table: &mut Table, overrides: &BTreeMap<String, Value>) -> Result<(), ConfigError> {
    for (name, value) in overrides {
        let key = canonical_key(name).ok_or_else(|| ConfigError::new(name.clone(), "no such config key"))?;
        table.insert(key.to_string(), value.clone());
    }
    Ok(())
}

/// Deserializes a merged table, reporting the offending key on failure.
pub fn from_table(table: Table) -> Result<ScenarioConfig, ConfigError> {
    ScenarioConfig::deserialize(Value::Table(table.clone())).map_err(|whole| {
        for (key, value) in &table {
            if canonical_key(key) != Some(key.as_str()) {
                return ConfigError::new(key.clone(), "no such config key");
            }
            let mut single = Table::new();
            single.insert(key.clone(), value.clone());
            if let Err(e) = ScenarioConfig::deserialize(Value::Table(single)) {
                return ConfigError::new(key.clone(), e.message().to_string());
            }
        }
        ConfigError::new("<config>", whole.message().to_string())
    })
}

/// Full pipeline: text → env → overrides → defaults → validation.
pub fn load(
    text: &str,
    env: impl IntoIterator<Item = (String, String)>,
    overrides: &BTreeMap<String, Value>,
) -> Result<ScenarioConfig, ConfigError> {
    let mut table = parse_table(text)?;
    apply_env(&mut table, env)?;
    apply_overrides(&mut table, overrides)?;
    resolve(from_table(table)?)
}

/// Materializes defaults that depend on other keys, then validates.
pub fn resolve(mut cfg: ScenarioConfig) -> Result<ScenarioConfig, ConfigError> {
    if cfg.pump_power_W.is_some() && cfg.beam_area_cm2.is_none() {
        cfg.beam_area_cm2 = Some(DEFAULT_BEAM_AREA_CM2);
    }
    if cfg.population_decay_GHz.is_none() && cfg.radiative_lifetime_ns > 0.0 {
        cfg.population_decay_GHz = Some(1.0 / cfg.radiative_lifetime_ns / (2.0 * PI));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(
            key,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

fn finite(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(key, format!("must be finite, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("lambda_probe_nm", self.lambda_probe_nm)?;
        positive("lambda_drive_nm", self.lambda_drive_nm)?;
        positive("radiative_lifetime_ns", self.radiative_lifetime_ns)?;
        positive("dipole_projection_factor", self.dipole_projection_factor)?;
        positive("self_width_calibration_GHz", self.self_width_calibration_GHz)?;
        positive("calibration_density_per_cm3", self.calibration_density_per_cm3)?;
        positive(
            "rabi_coefficient_Hz_per_sqrt_W_cm2",
            self.rabi_coefficient_Hz_per_sqrt_W_cm2,
        )?;
        positive("density_per_cm3", self.density_per_cm3)?;

        match (self.pump_power_W, self.pump_rabi_GHz) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::new(
                    "pump_rabi_GHz",
                    "specify either pump_power_W (+ beam_area_cm2) or pump_rabi_GHz, not both",
                ))
            }
            (None, None) => {
                return Err(ConfigError::new(
                    "pump_rabi_GHz",
                    "drive unspecified: set pump_power_W (+ beam_area_cm2) or pump_rabi_GHz (0 = pump off)",
                ))
            }
            (Some(p), None) => {
                positive("pump_power_W", p)?;
                positive(
                    "beam_area_cm2",
                    self.beam_area_cm2.unwrap_or(DEFAULT_BEAM_AREA_CM2),
                )?;
            }
            (None, Some(r)) => {
                if !(r >= 0.0 && r.is_finite()) {
                    return Err(ConfigError::new("pump_rabi_GHz", format!("must be ≥ 0, got {r}")));
                }
                if self.beam_area_cm2.is_some() {
                    return Err(ConfigError::new(
                        "beam_area_cm2",
                        "only meaningful with pump_power_W",
                    ));
                }
            }
        }
        finite("pump_detuning_GHz", self.pump_detuning_GHz)?;
        if let Some(g) = self.population_decay_GHz {
            positive("population_decay_GHz", g)?;
        }
        if let Some(f) = self.excitation_override {
            if !(0.0..=1.0).contains(&f) {
                return Err(ConfigError::new(
                    "excitation_override",
                    format!("must lie in [0, 1], got {f}"),
                ));
            }
        }
        finite("collisional_shift_GHz", self.collisional_shift_GHz)?;
        if !(self.probe_rabi_GHz >= 0.0 && self.probe_rabi_GHz.is_finite()) {
            return Err(ConfigError::new("probe_rabi_GHz", "must be ≥ 0"));
        }

        finite("grid_center_GHz", self.grid_center_GHz)?;
        positive("grid_span_GHz", self.grid_span_GHz)?;
        if self.grid_points < MIN_GRID_POINTS {
            return Err(ConfigError::new(
                "grid_points",
                format!("need at least {MIN_GRID_POINTS}, got {}", self.grid_points),
            ));
        }
        let linewidth = self.expected_linewidth_GHz();
        if self.grid_span_GHz < SPAN_LINEWIDTHS * linewidth {
            return Err(ConfigError::new(
                "grid_span_GHz",
                format!(
                    "span {} GHz must cover {SPAN_LINEWIDTHS}× the expected linewidth ({linewidth:.3} GHz)",
                    self.grid_span_GHz
                ),
            ));
        }

        self.fm_params()
            .validate()
            .map_err(|e| ConfigError::new("fm_range_GHz", e.to_string()))?;
        if self.window_index <= 1.0 || !self.window_index.is_finite() {
            return Err(ConfigError::new("window_index", "must exceed 1"));
        }
        if self.sweep_rabi_GHz.len() != self.sweep_detuning_GHz.len() {
            return Err(ConfigError::new(
                "sweep_detuning_GHz",
                format!(
                    "{} detunings for {} Rabi frequencies; lists pair element-wise",
                    self.sweep_detuning_GHz.len(),
                    self.sweep_rabi_GHz.len()
                ),
            ));
        }
        for (i, &r) in self.sweep_rabi_GHz.iter().enumerate() {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(ConfigError::new(format!("sweep_rabi_GHz[{i}]"), "must be ≥ 0"));
            }
        }
        for (i, &d) in self.sweep_detuning_GHz.iter().enumerate() {
            finite(&format!("sweep_detuning_GHz[{i}]"), d)?;
        }
        Ok(())
    }

    /// Full width 2(γ/2 + Γ_self)/2π of the probe line, GHz, using the
    /// ground population left by the override (or the full density).
    pub fn expected_linewidth_GHz(&self) -> f64 {
        let ground = self.density_per_cm3 * (1.0 - self.excitation_override.unwrap_or(0.0));
        let gamma_ghz = 1.0 / self.radiative_lifetime_ns / (2.0 * PI);
        let self_ghz = self.self_width_calibration_GHz * ground / self.calibration_density_per_cm3;
        2.0 * (gamma_ghz / 2.0 + self_ghz)
    }

    pub fn atom(&self) -> AtomSystem {
        AtomSystem {
            lambda_probe: nm_to_cm(self.lambda_probe_nm),
            lambda_drive: nm_to_cm(self.lambda_drive_nm),
            gamma_rad: 1.0 / self.radiative_lifetime_ns,
            dipole_projection_factor: self.dipole_projection_factor,
            k_self: 0.0,
            rabi_intensity_coefficient: self.rabi_coefficient_Hz_per_sqrt_W_cm2,
        }
        .with_self_width_calibration(self.self_width_calibration_GHz, self.calibration_density_per_cm3)
    }

    pub fn population_decay(&self) -> f64 {
        match self.population_decay_GHz {
            Some(g) => ghz_to_angular(g),
            None => 1.0 / self.radiative_lifetime_ns,
        }
    }

    pub fn drive(&self) -> DriveField {
        self.drive_at(self.pump_rabi_GHz, self.pump_detuning_GHz)
    }

    /// The configured drive with Ω and Δ replaced (GHz). `rabi = None` keeps
    /// the power specification.
    pub fn drive_at(&self, rabi_ghz: Option<f64>, detuning_ghz: f64) -> DriveField {
        let strength = match (rabi_ghz, self.pump_power_W) {
            (Some(r), _) => PumpStrength::Rabi(ghz_to_angular(r)),
            (None, Some(p)) => PumpStrength::Power {
                power: p,
                beam_area: self.beam_area_cm2.unwrap_or(DEFAULT_BEAM_AREA_CM2),
            },
            (None, None) => PumpStrength::Rabi(0.0),
        };
        DriveField {
            strength,
            detuning: ghz_to_angular(detuning_ghz),
            reference: self.pump_detuning_reference,
            population_decay: self.population_decay(),
            excitation_override: self.excitation_override,
        }
    }

    pub fn collisional_shift(&self) -> f64 {
        ghz_to_angular(self.collisional_shift_GHz)
    }

    pub fn probe(&self) -> Result<ProbeField, ConfigError> {
        let mut probe = ProbeField::uniform_ghz(self.grid_center_GHz, self.grid_span_GHz, self.grid_points)
            .map_err(|e| ConfigError::new("grid_points", e.to_string()))?;
        probe.rabi_probe = ghz_to_angular(self.probe_rabi_GHz);
        Ok(probe)
    }

    pub fn fm_params(&self) -> FmParams {
        FmParams {
            mod_range: self.fm_range_GHz,
            mod_rate: self.fm_rate_Hz,
            harmonic: self.fm_harmonic,
            cycle_samples: self.fm_cycle_samples,
        }
    }

    pub fn window(&self) -> Result<WindowMedium, ConfigError> {
        WindowMedium::new(self.window_index).map_err(|e| ConfigError::new("window_index", e.to_string()))
    }

    /// Sweep as (Ω, Δ) pairs in GHz.
    pub fn sweep_points(&self) -> Vec<(f64, f64)> {
        self.sweep_rabi_GHz
            .iter()
            .copied()
            .zip(self.sweep_detuning_GHz.iter().copied())
            .collect()
    }

    /// The resolved config as TOML text.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
