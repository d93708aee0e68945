use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use srfm::config::{self, OutputFormat, ScenarioConfig};
use srfm::scenario::{run_fit, run_spectrum, run_sweep, RunReport, SweepReport};
use srfm::{presets, Error};
use toml::Value;

/// Selective-reflection FM spectroscopy of a driven dense vapor.
#[derive(Parser, Debug)]
#[command(name = "srfm", version)]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Overrides grid_points.
    #[arg(long, global = true)]
    grid_points: Option<usize>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one spectrum from a config file.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
    },
    /// Doublet-fit every (Ω, Δ) sweep point and regress splitting on Ω̃.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Fit a doublet to a two-column CSV (detuning_GHz, signal).
    Fit { input: PathBuf },
    /// Run a bundled figure preset.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Figure {
    Fig2a,
    Fig2b,
    Fig2c,
    Fig2d,
    Fig3,
    Fig4,
}

impl Figure {
    fn presets(self) -> &'static [&'static str] {
        match self {
            Figure::Fig2a => &["fig2a"],
            Figure::Fig2b => &["fig2b"],
            Figure::Fig2c => &["fig2c"],
            Figure::Fig2d => &["fig2d"],
            Figure::Fig3 => &["fig3"],
            Figure::Fig4 => &["fig4a", "fig4b"],
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn overrides(cli: &Cli) -> BTreeMap<String, Value> {
    let mut map = BTreeMap::new();
    if let Some(n) = cli.grid_points {
        map.insert("grid_points".into(), Value::Integer(n as i64));
    }
    if let Some(f) = cli.format {
        let name = match f {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        map.insert("output_format".into(), Value::String(name.into()));
    }
    map
}

fn load_text(cli: &Cli, text: &str) -> Result<ScenarioConfig, Error> {
    Ok(config::load(text, std::env::vars(), &overrides(cli))?)
}

fn load_file(cli: &Cli, path: &Path) -> Result<ScenarioConfig, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_text(cli, &text).map_err(|e| match e {
        Error::Config(mut c) => {
            c.message = format!("{} ({})", c.message, path.display());
            Error::Config(c)
        }
        other => other,
    })
}

fn run(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Spectrum { config } => spectrum(cli, &load_file(cli, config)?),
        Command::Sweep { config } => sweep(cli, &load_file(cli, config)?),
        Command::Fit { input } => {
            let report = run_fit(input, Some(&cli.out))?;
            match &report.fit {
                Some(f) => println!(
                    "fit {}: splitting {:.4} GHz, width {:.4} GHz, center {:.4} GHz, converged {}, degenerate {}",
                    report.input, f.splitting, f.width, f.center, f.converged, f.degenerate
                ),
                None => println!(
                    "fit {}: degenerate ({})",
                    report.input,
                    report.message.as_deref().unwrap_or("no doublet")
                ),
            }
            Ok(())
        }
        Command::Reproduce { figure } => {
            for name in figure.presets() {
                let text = presets::preset(name).expect("bundled preset");
                let cfg = load_text(cli, text)?;
                if cfg.sweep_points().is_empty() {
                    spectrum(cli, &cfg)?;
                } else {
                    sweep(cli, &cfg)?;
                }
            }
            Ok(())
        }
    }
}

fn spectrum(cli: &Cli, cfg: &ScenarioConfig) -> Result<(), Error> {
    let (_, report) = run_spectrum(cfg, &cli.out)?;
    print_spectrum(&report);
    Ok(())
}

fn sweep(cli: &Cli, cfg: &ScenarioConfig) -> Result<(), Error> {
    let result = run_sweep(cfg, &cli.out);
    if let Ok(report) = &result {
        print_sweep(report);
    }
    result.map(|_| ())
}

fn opt(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |v| format!("{v:.4}"))
}

fn print_spectrum(r: &RunReport) {
    let d = &r.derived;
    let a = &r.analysis;
    println!(
        "{}: Γ_self {:.4} GHz, Δω_L {:.4} GHz, Ω {:.4} GHz, n_b/N {:.4}; Δω_mm {} GHz, width {} GHz, FM zero crossings {}",
        r.scenario_id,
        d.gamma_self_GHz,
        d.lorentz_shift_GHz,
        d.rabi_GHz,
        d.n_b_per_cm3 / r.config.density_per_cm3,
        opt(a.delta_mm_GHz),
        opt(a.estimated_width_GHz),
        a.fm_zero_crossings.len(),
    );
    if let Some(f) = &a.doublet_fit {
        println!(
            "  doublet: splitting {:.4} GHz, width {:.4} GHz, asymmetry {}, converged {}",
            f.splitting,
            f.width,
            opt(a.asymmetry),
            f.converged
        );
    }
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    if r.config.output_format == OutputFormat::Json {
        println!("  outputs: {}", r.outputs.join(", "));
    }
}

fn print_sweep(r: &SweepReport) {
    for row in &r.rows {
        println!(
            "{}: Ω̃ {:.4} GHz → splitting {:.4} GHz{}",
            r.scenario_id,
            row.omega_tilde_GHz,
            row.splitting_GHz,
            row.error
                .as_deref()
                .map(|e| format!(" ({e})"))
                .unwrap_or_default()
        );
    }
    if let Some(f) = &r.linear_fit {
        println!(
            "{}: slope {:.4} ± {}",
            r.scenario_id,
            f.slope,
            f.slope_stderr.map_or("n/a".into(), |s| format!("{s:.4}"))
        );
    }
}
