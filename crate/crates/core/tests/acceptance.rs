//! Acceptance criteria, one line each. Runs without the libtest harness so
//! every line prints; exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use srfm::analysis::{asymmetry, doublet_model, find_extrema, fit_doublet, width_from_mm, DoubletInit};
use srfm::config::{load, ScenarioConfig};
use srfm::fm::{fm_spectrum_derivative, fm_spectrum_lockin, FmParams};
use srfm::model::{coherence_rates, self_width, susceptibility, AtomSystem, VaporState, CALIBRATION_DENSITY};
use srfm::presets::{names, preset};
use srfm::scenario::{run_spectrum, run_sweep, simulate, Simulation};
use srfm::units::{angular_to_ghz, ghz_to_angular};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn config(name: &str) -> ScenarioConfig {
    load(preset(name).expect("preset"), vec![], &BTreeMap::new()).expect("preset config")
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Width estimate from the principal extrema of the reflectivity.
fn estimated_width(sim: &Simulation) -> Result<f64, String> {
    let ext = find_extrema(&sim.spectrum.reflectivity, &sim.spectrum.grid).map_err(fail)?;
    let mm = ext.delta_mm.ok_or("no extrema pair")?;
    width_from_mm(mm).map_err(fail)
}

fn calibration_identity() -> Outcome {
    let got = angular_to_ghz(self_width(&AtomSystem::potassium(), CALIBRATION_DENSITY));
    check(
        (got / 28.4 - 1.0).abs() <= 1e-9,
        format!("Γ_self/2π = {got:.12} GHz (28.4 ± 1e-9 rel)"),
    )
}

fn undriven_width() -> Outcome {
    let start = Instant::now();
    let sim = simulate(&config("fig2a")).map_err(fail)?;
    let w = estimated_width(&sim)?;
    let dt = start.elapsed().as_secs_f64();
    check(
        (w / 28.4 - 1.0).abs() <= 0.15 && dt < 1.0,
        format!("fig2a 0.87·Δω_mm = {w:.3} GHz (28.4 ± 15%), {dt:.3} s (< 1 s)"),
    )
}

fn line_narrowing() -> Outcome {
    let a = estimated_width(&simulate(&config("fig2a")).map_err(fail)?)?;
    let b = estimated_width(&simulate(&config("fig2b")).map_err(fail)?)?;
    check(
        (b / 11.0 - 1.0).abs() <= 0.20 && b < a,
        format!("fig2b width = {b:.3} GHz (11 ± 20%), fig2a = {a:.3} GHz (must exceed)"),
    )
}

fn fig4_reproduction() -> Outcome {
    let fit_of = |cfg: &ScenarioConfig| -> Result<(usize, srfm::analysis::DoubletFit, f64), String> {
        let sim = simulate(cfg).map_err(fail)?;
        let crossings = find_extrema(sim.fm_signal(), &sim.spectrum.grid)
            .map_err(fail)?
            .zero_crossings
            .len();
        let fit = fit_doublet(sim.fm_signal(), &sim.spectrum.grid, None).map_err(fail)?;
        let a = asymmetry(&fit).map_err(fail)?;
        Ok((crossings, fit, a))
    };
    let (crossings, fit0, a0) = fit_of(&config("fig4a"))?;
    let mut up = config("fig4b");
    let (_, fit3, a3) = fit_of(&up)?;
    up.pump_detuning_GHz = -up.pump_detuning_GHz;
    let (_, _, a3m) = fit_of(&up)?;
    let doublet = crossings >= 3 && fit0.converged && !fit0.degenerate;
    let ok = doublet
        && (fit0.splitting / 12.0 - 1.0).abs() <= 0.25
        && a0.abs() < 0.05
        && !fit3.degenerate
        && a3.abs() > 0.1
        && (a3 + a3m).abs() <= 1e-2;
    check(
        ok,
        format!(
            "Δ=0: {crossings} FM zero crossings, splitting {:.3} GHz (12 ± 25%), converged {}, degenerate {}, a = {a0:.4} (|a| < 0.05); \
             Δ=±3: a = {a3:.4} / {a3m:.4} (|a| > 0.1, sum within 1e-2)",
            fit0.splitting, fit0.converged, fit0.degenerate
        ),
    )
}

fn fig3_scaling() -> Outcome {
    let dir = tempfile::tempdir().map_err(fail)?;
    let start = Instant::now();
    let result = run_sweep(&config("fig3"), dir.path());
    let dt = start.elapsed().as_secs_f64();
    match result {
        Ok(report) => {
            let fit = report.linear_fit.ok_or("no linear fit")?;
            check(
                (0.85..=1.10).contains(&fit.slope) && dt < 30.0,
                format!(
                    "slope {:.4} over {} points ([0.85, 1.10]), {dt:.2} s (< 30 s)",
                    fit.slope,
                    fit.points.len()
                ),
            )
        }
        Err(e) => Err(format!("sweep failed: {e} ({dt:.2} s)")),
    }
}

fn two_level_oracle() -> Outcome {
    let atom = AtomSystem::potassium();
    let n = CALIBRATION_DENSITY;
    let vapor = VaporState::unexcited(&atom, n, 0.0);
    let gamma_ab = atom.gamma_rad / 2.0 + atom.k_self * n;
    let mut worst: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for i in 0..1000 {
        let bare = ghz_to_angular(-300.0 + 600.0 * i as f64 / 999.0);
        let chi = susceptibility(&atom, &vapor, &coherence_rates(&atom, &vapor, bare, 0.0), 0.0).value;
        let delta = bare + vapor.lorentz_shift;
        let closed = Complex64::i() * atom.susceptibility_prefactor() * n / Complex64::new(gamma_ab, delta);
        worst = worst.max((chi - closed).norm() / closed.norm());
        peak = peak.max(chi.im);
    }
    let line_center = -vapor.lorentz_shift;
    let at_center = susceptibility(
        &atom,
        &vapor,
        &coherence_rates(&atom, &vapor, line_center, 0.0),
        0.0,
    )
    .value
    .im;
    peak = peak.max(at_center);
    // α = N·σ(0) with σ(0) = (3λ²/2π)·(γ/2)/γ̃_ab; Im χ = α·λ/(8π²).
    let lambda = atom.lambda_probe;
    let sigma = 3.0 * lambda * lambda / (2.0 * PI) * (atom.gamma_rad / 2.0) / gamma_ab;
    let oracle = n * sigma * lambda / (8.0 * PI * PI);
    let rel = (peak / oracle - 1.0).abs();
    check(
        worst <= 1e-12 && rel <= 1e-3,
        format!("closed-form max rel diff {worst:.2e} (≤ 1e-12); peak Im χ {peak:.6e} vs cross-section oracle {oracle:.6e}, rel {rel:.2e} (≤ 1e-3)"),
    )
}

fn lockin_vs_derivative() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut ratios = Vec::new();
    for name in names() {
        let sim = simulate(&config(name)).map_err(fail)?;
        let grid = &sim.spectrum.grid;
        // Relative to the signal scale, which itself grows with the dither.
        let diff = |range: f64| -> Result<f64, String> {
            let fm = FmParams {
                mod_range: range,
                ..FmParams::default()
            };
            let lock = fm_spectrum_lockin(&sim.model, grid, &fm).map_err(fail)?.values;
            let deriv = fm_spectrum_derivative(&sim.model, grid, &fm)
                .map_err(fail)?
                .values;
            let scale = lock.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let d = lock
                .iter()
                .zip(&deriv)
                .fold(0.0f64, |m, (l, d)| m.max((l - d).abs()));
            Ok(d / scale)
        };
        let (d100, d50) = (diff(0.1)?, diff(0.05)?);
        worst = worst.max(d100);
        ratios.push((name, d100 / d50));
    }
    let quadratic = ratios.iter().all(|(_, r)| (r / 4.0 - 1.0).abs() <= 0.25);
    let shown: Vec<String> = ratios.iter().map(|(n, r)| format!("{n} {r:.2}")).collect();
    check(
        worst < 1e-2 && quadratic,
        format!(
            "sup rel diff {worst:.2e} (< 1%); 100/50 MHz ratios [{}] (4 ± 25%)",
            shown.join(", ")
        ),
    )
}

fn fitter_round_trip() -> Outcome {
    let truth = DoubletInit {
        amplitudes: [1.0, 1.0],
        center: 0.0,
        splitting: 7.6,
        half_width: 4.25,
    };
    let grid: Vec<f64> = (0..2000).map(|i| -200.0 + 400.0 * i as f64 / 1999.0).collect();
    let y: Vec<f64> = grid.iter().map(|&x| doublet_model(&truth, x)).collect();
    let fit = fit_doublet(&y, &grid, None).map_err(fail)?;
    let (es, ew) = ((fit.splitting / 7.6 - 1.0).abs(), (fit.width / 8.5 - 1.0).abs());
    check(
        es <= 1e-6 && ew <= 1e-6 && fit.converged && fit.iterations < 100,
        format!(
            "splitting rel err {es:.1e}, width rel err {ew:.1e} (≤ 1e-6), {} iterations (< 100)",
            fit.iterations
        ),
    )
}

fn physical_branch() -> Outcome {
    let mut problems = Vec::new();
    let mut max_iter = 0;
    let mut max_residual: f64 = 0.0;
    for name in names() {
        let sim = simulate(&config(name)).map_err(fail)?;
        let v = &sim.vapor;
        if sim.spectrum.n.iter().any(|n| n.im < 0.0) {
            problems.push(format!("{name}: Im n < 0"));
        }
        if sim.spectrum.reflectivity.iter().any(|r| !(0.0..=1.0).contains(r)) {
            problems.push(format!("{name}: R outside [0, 1]"));
        }
        let closure = ((v.n_a + v.n_b + v.n_c) / v.density_total - 1.0).abs();
        if closure > 1e-9 {
            problems.push(format!("{name}: closure {closure:.1e}"));
        }
        max_iter = max_iter.max(v.iterations);
        max_residual = max_residual.max(v.residual);
    }
    check(
        problems.is_empty() && max_iter <= 500 && max_residual <= 1e-10,
        format!(
            "{} presets; max iterations {max_iter} (≤ 500), max residual {max_residual:.1e} (≤ 1e-10){}",
            names().count(),
            if problems.is_empty() {
                String::new()
            } else {
                format!("; {}", problems.join("; "))
            }
        ),
    )
}

fn determinism() -> Outcome {
    let (a, b) = (
        tempfile::tempdir().map_err(fail)?,
        tempfile::tempdir().map_err(fail)?,
    );
    let mut differing = Vec::new();
    for name in names() {
        let cfg = config(name);
        for dir in [&a, &b] {
            run_spectrum(&cfg, dir.path()).map_err(fail)?;
        }
        let file = format!("{}.csv", cfg.scenario_id);
        let read = |d: &tempfile::TempDir| std::fs::read(d.path().join(&file)).map_err(fail);
        if read(&a)? != read(&b)? {
            differing.push(name);
        }
    }
    check(
        differing.is_empty(),
        format!(
            "{} preset CSVs compared byte for byte; differing: {:?}",
            names().count(),
            differing
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("calibration identity", calibration_identity),
        ("undriven width estimator", undriven_width),
        ("line narrowing", line_narrowing),
        ("Fig. 4 reproduction", fig4_reproduction),
        ("Fig. 3 scaling law", fig3_scaling),
        ("two-level reduction oracle", two_level_oracle),
        ("lock-in vs derivative", lockin_vs_derivative),
        ("fitter round trip", fitter_round_trip),
        ("physical branch", physical_branch),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
