//! Scenario orchestration: simulate a configured spectrum, reduce it, and
//! emit plot-ready CSV/JSON plus a run report.

#![allow(non_snake_case)]

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    asymmetry, find_extrema, fit_doublet, fit_linear, width_from_mm, DoubletFit, LinearFit,
};
use crate::config::{DoubletFitMode, OutputFormat, ScenarioConfig};
use crate::error::{AnalysisError, Error};
use crate::fm::fm_spectrum_lockin;
use crate::model::{generalized_rabi, steady_populations, AtomSystem, DriveField, SolveOptions, VaporState};
use crate::reflection::{spectrum_from_model, ComplexSpectrum, SpectrumModel};
use crate::units::angular_to_ghz;

pub const SPECTRUM_COLUMNS: [&str; 7] = [
    "detuning_GHz",
    "Re_chi",
    "Im_chi",
    "Re_n",
    "Im_n",
    "R",
    "FM_signal",
];
pub const SWEEP_COLUMNS: [&str; 4] = ["omega_tilde_GHz", "splitting_GHz", "width_GHz", "asymmetry"];
pub const MIN_FIT_ROWS: usize = 50;

/// A forward-model run: resolved inputs, populations and the full spectrum
/// including the lock-in FM channel.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub config: ScenarioConfig,
    pub atom: AtomSystem,
    pub drive: DriveField,
    pub vapor: VaporState,
    pub model: SpectrumModel,
    pub spectrum: ComplexSpectrum,
    pub warnings: Vec<String>,
}

impl Simulation {
    pub fn fm_signal(&self) -> &[f64] {
        self.spectrum.fm_signal.as_deref().unwrap_or(&[])
    }
}

pub fn simulate(cfg: &ScenarioConfig) -> Result<Simulation, Error> {
    simulate_with_drive(cfg, cfg.drive())
}

fn simulate_with_drive(cfg: &ScenarioConfig, drive: DriveField) -> Result<Simulation, Error> {
    let atom = cfg.atom();
    atom.validate()?;
    drive.validate()?;
    let vapor = steady_populations(
        &atom,
        &drive,
        cfg.density_per_cm3,
        cfg.collisional_shift(),
        &SolveOptions::default(),
    )?;
    let model = SpectrumModel::new(&atom, &vapor, &drive, &cfg.window()?)?;
    let probe = cfg.probe()?;
    let mut spectrum = spectrum_from_model(&model, &probe);
    let fm = fm_spectrum_lockin(&model, &spectrum.grid, &cfg.fm_params())?;
    spectrum.set_fm_signal(fm.values);
    let mut warnings = fm.warnings;
    if spectrum.floor_hits > 0 {
        warnings.push(format!(
            "susceptibility denominator floor applied at {} grid points",
            spectrum.floor_hits
        ));
    }
    Ok(Simulation {
        config: cfg.clone(),
        atom,
        drive,
        vapor,
        model,
        spectrum,
        warnings,
    })
}

/// Quantities derived by the forward model, in GHz and cm⁻³.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub gamma_self_GHz: f64,
    pub lorentz_shift_GHz: f64,
    pub rabi_GHz: f64,
    pub generalized_rabi_GHz: f64,
    pub pump_detuning_GHz: f64,
    pub line_center_GHz: f64,
    pub n_a_per_cm3: f64,
    pub n_b_per_cm3: f64,
    pub n_c_per_cm3: f64,
    pub population_iterations: usize,
    pub population_residual: f64,
    pub floor_hits: usize,
}

impl Derived {
    pub fn of(sim: &Simulation) -> Self {
        let rabi = angular_to_ghz(sim.model.rabi);
        let pump = angular_to_ghz(sim.model.pump_detuning);
        Self {
            gamma_self_GHz: angular_to_ghz(sim.vapor.gamma_self),
            lorentz_shift_GHz: angular_to_ghz(sim.vapor.lorentz_shift),
            rabi_GHz: rabi,
            generalized_rabi_GHz: generalized_rabi(rabi, pump),
            pump_detuning_GHz: pump,
            line_center_GHz: sim.model.line_center_ghz(),
            n_a_per_cm3: sim.vapor.n_a,
            n_b_per_cm3: sim.vapor.n_b,
            n_c_per_cm3: sim.vapor.n_c,
            population_iterations: sim.vapor.iterations,
            population_residual: sim.vapor.residual,
            floor_hits: sim.spectrum.floor_hits,
        }
    }
}

/// Reduction of one spectrum.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SpectrumAnalysis {
    /// Interval between the principal reflectivity maximum and minimum.
    pub delta_mm_GHz: Option<f64>,
    /// 0.87·delta_mm.
    pub estimated_width_GHz: Option<f64>,
    /// Interval between the principal FM extrema (diagnostic).
    pub fm_delta_mm_GHz: Option<f64>,
    pub fm_zero_crossings: Vec<f64>,
    /// At least three FM zero crossings.
    pub doublet_signature: bool,
    pub doublet_fit: Option<DoubletFit>,
    pub asymmetry: Option<f64>,
    pub fit_error: Option<String>,
}

/// Minimum number of FM zero crossings taken as a doublet signature.
pub const DOUBLET_CROSSINGS: usize = 3;

pub fn analyze(sim: &Simulation) -> Result<SpectrumAnalysis, AnalysisError> {
    let grid = &sim.spectrum.grid;
    let r = find_extrema(&sim.spectrum.reflectivity, grid)?;
    let fm = find_extrema(sim.fm_signal(), grid)?;
    let mut out = SpectrumAnalysis {
        delta_mm_GHz: r.delta_mm,
        estimated_width_GHz: r.delta_mm.and_then(|d| width_from_mm(d).ok()),
        fm_delta_mm_GHz: fm.delta_mm,
        fm_zero_crossings: fm.zero_crossings.iter().map(|z| z.position).collect(),
        doublet_signature: fm.zero_crossings.len() >= DOUBLET_CROSSINGS,
        ..Default::default()
    };
    let wanted = match sim.config.doublet_fit {
        DoubletFitMode::Always => true,
        DoubletFitMode::Never => false,
        DoubletFitMode::Auto => out.doublet_signature,
    };
    if wanted {
        match fit_doublet(sim.fm_signal(), grid, None) {
            Ok(fit) => {
                out.asymmetry = asymmetry(&fit).ok();
                out.doublet_fit = Some(fit);
            }
            Err(e) => out.fit_error = Some(e.to_string()),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario_id: String,
    pub config: ScenarioConfig,
    pub derived: Derived,
    pub analysis: SpectrumAnalysis,
    pub warnings: Vec<String>,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
}

/// Shortest representation that round-trips; NaN as `nan`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:?}")
    }
}

pub fn spectrum_csv(spectrum: &ComplexSpectrum) -> Result<Vec<u8>, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let out_err = |e: csv::Error| Error::Output(e.to_string());
    w.write_record(SPECTRUM_COLUMNS).map_err(out_err)?;
    let fm = spectrum.fm_signal.as_deref();
    for i in 0..spectrum.len() {
        let row = [
            spectrum.grid[i],
            spectrum.chi[i].re,
            spectrum.chi[i].im,
            spectrum.n[i].re,
            spectrum.n[i].im,
            spectrum.reflectivity[i],
            fm.map_or(f64::NAN, |f| f[i]),
        ];
        w.write_record(row.iter().map(|v| fmt_f64(*v))).map_err(out_err)?;
    }
    w.into_inner().map_err(|e| Error::Output(e.to_string()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<String, Error> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    Ok(path.display().to_string())
}

fn prepare_dir(out_dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, Error> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::Output(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Runs the forward model and reduction, then writes `<id>.csv` (or
/// `<id>.spectrum.json`), `<id>.json` and the echoed `<id>.toml` into `out_dir`.
pub fn run_spectrum(cfg: &ScenarioConfig, out_dir: &Path) -> Result<(Simulation, RunReport), Error> {
    let start = Instant::now();
    let sim = simulate(cfg)?;
    let analysis = analyze(&sim)?;
    prepare_dir(out_dir)?;
    let id = &cfg.scenario_id;
    let mut outputs = Vec::new();
    match cfg.output_format {
        OutputFormat::Csv => {
            outputs.push(write(
                &out_dir.join(format!("{id}.csv")),
                &spectrum_csv(&sim.spectrum)?,
            )?);
        }
        OutputFormat::Json => {
            outputs.push(write(
                &out_dir.join(format!("{id}.spectrum.json")),
                &to_json(&sim.spectrum)?,
            )?);
        }
    }
    outputs.push(write(
        &out_dir.join(format!("{id}.toml")),
        cfg.to_toml().as_bytes(),
    )?);
    let report_path = out_dir.join(format!("{id}.json"));
    outputs.push(report_path.display().to_string());
    let report = RunReport {
        scenario_id: id.clone(),
        config: cfg.clone(),
        derived: Derived::of(&sim),
        analysis,
        warnings: sim.warnings.clone(),
        outputs,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    write(&report_path, &to_json(&report)?)?;
    Ok((sim, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rabi_GHz: f64,
    pub detuning_GHz: f64,
    pub omega_tilde_GHz: f64,
    pub splitting_GHz: f64,
    pub width_GHz: f64,
    pub asymmetry: f64,
    pub converged: bool,
    pub doublet_signature: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub scenario_id: String,
    pub config: ScenarioConfig,
    pub rows: Vec<SweepRow>,
    pub linear_fit: Option<LinearFit>,
    pub linear_fit_error: Option<String>,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
}

fn sweep_point(cfg: &ScenarioConfig, rabi: f64, detuning: f64) -> SweepRow {
    let omega_tilde = generalized_rabi(rabi, detuning);
    let failed = |e: String| SweepRow {
        rabi_GHz: rabi,
        detuning_GHz: detuning,
        omega_tilde_GHz: omega_tilde,
        splitting_GHz: f64::NAN,
        width_GHz: f64::NAN,
        asymmetry: f64::NAN,
        converged: false,
        doublet_signature: false,
        error: Some(e),
    };
    let sim = match simulate_with_drive(cfg, cfg.drive_at(Some(rabi), detuning)) {
        Ok(s) => s,
        Err(e) => return failed(e.to_string()),
    };
    let signature = find_extrema(sim.fm_signal(), &sim.spectrum.grid)
        .map(|r| r.zero_crossings.len() >= DOUBLET_CROSSINGS)
        .unwrap_or(false);
    match fit_doublet(sim.fm_signal(), &sim.spectrum.grid, None) {
        Ok(fit) => SweepRow {
            rabi_GHz: rabi,
            detuning_GHz: detuning,
            omega_tilde_GHz: omega_tilde,
            splitting_GHz: fit.splitting,
            width_GHz: fit.width,
            asymmetry: asymmetry(&fit).unwrap_or(f64::NAN),
            converged: fit.converged,
            doublet_signature: signature,
            error: if fit.degenerate {
                Some("degenerate doublet fit (collapsed to a single line)".to_string())
            } else if !fit.converged {
                Some(format!(
                    "doublet fit did not converge in {} iterations",
                    fit.iterations
                ))
            } else {
                None
            },
        },
        Err(e) => failed(e.to_string()),
    }
}

/// Fits every (Ω, Δ) sweep point and regresses splitting on Ω̃. Rows keep
/// input order. A degenerate regression is reported after the outputs are
/// written.
pub fn run_sweep(cfg: &ScenarioConfig, out_dir: &Path) -> Result<SweepReport, Error> {
    let start = Instant::now();
    let points = cfg.sweep_points();
    if points.is_empty() {
        return Err(
            crate::ConfigError::new("sweep_rabi_GHz", "sweep needs at least one (Ω, Δ) point").into(),
        );
    }
    let rows: Vec<SweepRow> = points
        .par_iter()
        .map(|&(rabi, detuning)| sweep_point(cfg, rabi, detuning))
        .collect();

    let good: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.error.is_none())
        .map(|r| (r.omega_tilde_GHz, r.splitting_GHz))
        .collect();
    let (linear_fit, linear_fit_error) = match fit_linear(&good, cfg.sweep_through_origin) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e)),
    };

    prepare_dir(out_dir)?;
    let id = &cfg.scenario_id;
    let mut outputs = Vec::new();
    let mut w = csv::Writer::from_writer(Vec::new());
    let out_err = |e: csv::Error| Error::Output(e.to_string());
    w.write_record(SWEEP_COLUMNS).map_err(out_err)?;
    for r in &rows {
        let (s, wd, a) = if r.error.is_some() {
            (f64::NAN, f64::NAN, f64::NAN)
        } else {
            (r.splitting_GHz, r.width_GHz, r.asymmetry)
        };
        w.write_record([r.omega_tilde_GHz, s, wd, a].map(fmt_f64))
            .map_err(out_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Output(e.to_string()))?;
    outputs.push(write(&out_dir.join(format!("{id}.csv")), &bytes)?);
    outputs.push(write(
        &out_dir.join(format!("{id}.toml")),
        cfg.to_toml().as_bytes(),
    )?);
    let report_path = out_dir.join(format!("{id}.json"));
    outputs.push(report_path.display().to_string());
    let report = SweepReport {
        scenario_id: id.clone(),
        config: cfg.clone(),
        rows,
        linear_fit,
        linear_fit_error: linear_fit_error.as_ref().map(|e| e.to_string()),
        outputs,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    write(&report_path, &to_json(&report)?)?;

    if good.is_empty() {
        return Err(Error::Analysis(AnalysisError::AllFitsFailed(report.rows.len())));
    }
    if let Some(e) = linear_fit_error {
        return Err(Error::Analysis(e));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub input: String,
    pub rows: usize,
    pub signal_column: String,
    pub fit: Option<DoubletFit>,
    pub asymmetry: Option<f64>,
    /// Set when the signal has no usable doublet structure (e.g. constant).
    pub degenerate: bool,
    pub message: Option<String>,
}

/// Reads (detuning_GHz, signal) pairs. A header row is optional; when present
/// and it names `FM_signal` (a spectrum file) that column is used, otherwise
/// the second column.
pub fn read_fit_input(path: &Path) -> Result<(Vec<f64>, Vec<f64>, String), Error> {
    let shown = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let (mut grid, mut signal) = (Vec::new(), Vec::new());
    let mut columns = (0usize, 1usize);
    let mut signal_name = "column 2".to_string();
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            path: shown.clone(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(index as u64 + 1, |p| p.line());
        if index == 0 && record.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
            let find = |name: &str| record.iter().position(|f| f.eq_ignore_ascii_case(name));
            if let (Some(x), Some(y)) = (find("detuning_GHz"), find("FM_signal")) {
                columns = (x, y);
            }
            signal_name = record.get(columns.1).unwrap_or("column 2").to_string();
            continue;
        }
        let field = |i: usize| -> Result<f64, Error> {
            let raw = record.get(i).ok_or_else(|| Error::Parse {
                path: shown.clone(),
                line,
                message: format!("expected at least {} columns, found {}", i + 1, record.len()),
            })?;
            raw.parse::<f64>().map_err(|_| Error::Parse {
                path: shown.clone(),
                line,
                message: format!("not a number: {raw:?}"),
            })
        };
        grid.push(field(columns.0)?);
        signal.push(field(columns.1)?);
    }
    if grid.len() < MIN_FIT_ROWS {
        return Err(Error::Parse {
            path: shown,
            line: 0,
            message: format!("need at least {MIN_FIT_ROWS} data rows, found {}", grid.len()),
        });
    }
    Ok((grid, signal, signal_name))
}

/// Fits a doublet to an external two-column spectrum. Non-convergence and
/// degenerate input are reported, not errors.
pub fn run_fit(input: &Path, out: Option<&Path>) -> Result<FitReport, Error> {
    let (grid, signal, signal_column) = read_fit_input(input)?;
    let mut report = FitReport {
        input: input.display().to_string(),
        rows: grid.len(),
        signal_column,
        fit: None,
        asymmetry: None,
        degenerate: false,
        message: None,
    };
    match fit_doublet(&signal, &grid, None) {
        Ok(fit) => {
            report.degenerate = fit.degenerate;
            report.asymmetry = asymmetry(&fit).ok();
            if !fit.converged {
                report.message = Some(format!("fit did not converge in {} iterations", fit.iterations));
            }
            report.fit = Some(fit);
        }
        Err(e @ (AnalysisError::ZeroAmplitudes | AnalysisError::NoDoubletSignature)) => {
            report.degenerate = true;
            report.message = Some(e.to_string());
        }
        Err(e) => return Err(e.into()),
    }
    if let Some(dir) = out {
        prepare_dir(dir)?;
        let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("fit");
        let path: PathBuf = dir.join(format!("{stem}.fit.json"));
        write(&path, &to_json(&report)?)?;
    }
    Ok(report)
}
