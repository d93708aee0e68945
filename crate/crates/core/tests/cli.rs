use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use srfm::analysis::{doublet_model, DoubletInit};
use srfm::scenario::SPECTRUM_COLUMNS;
use tempfile::TempDir;

fn srfm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srfm"))
        .current_dir(dir)
        .args(args)
        .env_remove("SRFM_DENSITY_PER_CM3")
        .output()
        .expect("spawn srfm")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn reproduce_fig2a_writes_schema() {
    let tmp = TempDir::new().unwrap();
    let o = srfm(tmp.path(), &["--out", "o", "reproduce", "fig2a"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(tmp.path().join("o/fig2a.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), SPECTRUM_COLUMNS.join(","));
    assert_eq!(lines.count(), 2000);
    let report = json(&tmp.path().join("o/fig2a.json"));
    assert_eq!(report["scenario_id"], "fig2a");
    assert!((report["derived"]["gamma_self_GHz"].as_f64().unwrap() - 28.4).abs() < 1e-9);
    assert_eq!(report["config"]["grid_points"], 2000);
    assert!(report["wall_time_s"].as_f64().is_some());
}

#[test]
fn csv_output_is_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    for out in ["a", "b"] {
        let o = srfm(tmp.path(), &["--out", out, "reproduce", "fig4"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for name in ["fig4a.csv", "fig4b.csv"] {
        let a = fs::read(tmp.path().join("a").join(name)).unwrap();
        let b = fs::read(tmp.path().join("b").join(name)).unwrap();
        assert!(a == b, "{name} differs");
    }
}

#[test]
fn echoed_config_reproduces_outputs() {
    let tmp = TempDir::new().unwrap();
    assert!(srfm(tmp.path(), &["--out", "a", "reproduce", "fig2c"])
        .status
        .success());
    let o = srfm(
        tmp.path(),
        &["--out", "b", "spectrum", "--config", "a/fig2c.toml"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let a = fs::read(tmp.path().join("a/fig2c.csv")).unwrap();
    let b = fs::read(tmp.path().join("b/fig2c.csv")).unwrap();
    assert!(a == b);
    let (ja, jb) = (
        json(&tmp.path().join("a/fig2c.json")),
        json(&tmp.path().join("b/fig2c.json")),
    );
    assert_eq!(ja["config"], jb["config"]);
    assert!(ja["config"]["beam_area_cm2"].as_f64().is_some());
}

#[test]
fn json_format_flag() {
    let tmp = TempDir::new().unwrap();
    let o = srfm(
        tmp.path(),
        &[
            "--out",
            "o",
            "--format",
            "json",
            "--grid-points",
            "400",
            "reproduce",
            "fig2a",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let s = json(&tmp.path().join("o/fig2a.spectrum.json"));
    assert_eq!(s["grid"].as_array().unwrap().len(), 400);
    assert!(!tmp.path().join("o/fig2a.csv").exists());
}

#[test]
fn config_errors_exit_2_with_field_path() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        (
            "density_per_cm3 = 1e17\npump_rabi_GHz = 1.0\ngrid_points = 10\n",
            "grid_points",
        ),
        (
            "density_per_cm3 = 1e17\npump_rabi_GHz = 1.0\npump_power_W = 0.5\n",
            "pump_rabi_GHz",
        ),
        (
            "density_per_cm3 = 1e17\npump_rabi_GHz = 1.0\ndensity = 3\n",
            "density",
        ),
        (
            "density_per_cm3 = 1e17\npump_rabi_GHz = 1.0\ngrid_span_GHz = 5.0\n",
            "grid_span_GHz",
        ),
    ];
    for (text, field) in cases {
        fs::write(tmp.path().join("bad.toml"), text).unwrap();
        let o = srfm(tmp.path(), &["spectrum", "--config", "bad.toml"]);
        assert_eq!(o.status.code(), Some(2), "{text}: {}", stderr(&o));
        assert!(stderr(&o).contains(&format!("`{field}`")), "{}", stderr(&o));
        assert!(
            !tmp.path().join("out").exists(),
            "no partial output on config error"
        );
    }
}

#[test]
fn env_override_beats_file_and_unknown_env_key_fails() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("c.toml"),
        "scenario_id = \"env\"\ndensity_per_cm3 = 1e17\npump_rabi_GHz = 4.0\n",
    )
    .unwrap();
    let run = |key: &str, value: &str| {
        Command::new(env!("CARGO_BIN_EXE_srfm"))
            .current_dir(tmp.path())
            .args(["spectrum", "--config", "c.toml"])
            .env(key, value)
            .output()
            .unwrap()
    };
    let o = run("SRFM_PUMP_RABI_GHZ", "6.5");
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&tmp.path().join("out/env.json"));
    assert_eq!(r["config"]["pump_rabi_GHz"], 6.5);

    let o = run("SRFM_NOT_A_KEY", "1");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("SRFM_NOT_A_KEY"));
}

#[test]
fn io_and_parse_errors_exit_4() {
    let tmp = TempDir::new().unwrap();
    let o = srfm(tmp.path(), &["spectrum", "--config", "missing.toml"]);
    assert_eq!(o.status.code(), Some(4));

    let mut text = String::from("detuning_GHz,signal\n");
    for i in 0..60 {
        text.push_str(&format!(
            "{i},{}\n",
            if i == 17 { "oops".into() } else { i.to_string() }
        ));
    }
    fs::write(tmp.path().join("bad.csv"), text).unwrap();
    let o = srfm(tmp.path(), &["fit", "bad.csv"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("line 19"), "{}", stderr(&o));

    fs::write(tmp.path().join("short.csv"), "0,1\n1,2\n").unwrap();
    assert_eq!(srfm(tmp.path(), &["fit", "short.csv"]).status.code(), Some(4));
}

#[test]
fn fit_recovers_synthetic_doublet() {
    let tmp = TempDir::new().unwrap();
    let truth = DoubletInit {
        amplitudes: [1.0, 1.0],
        center: 0.0,
        splitting: 7.6,
        half_width: 4.25,
    };
    let mut text = String::from("detuning_GHz,signal\n");
    for i in 0..2000 {
        let x = -200.0 + 400.0 * i as f64 / 1999.0;
        text.push_str(&format!("{x:?},{:?}\n", doublet_model(&truth, x)));
    }
    fs::write(tmp.path().join("syn.csv"), text).unwrap();
    let o = srfm(tmp.path(), &["--out", "o", "fit", "syn.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&tmp.path().join("o/syn.fit.json"));
    assert_eq!(r["degenerate"], false);
    let fit = &r["fit"];
    assert!((fit["splitting"].as_f64().unwrap() / 7.6 - 1.0).abs() < 1e-6);
    assert!((fit["width"].as_f64().unwrap() / 8.5 - 1.0).abs() < 1e-6);
    assert!(fit["residual_trace"].as_array().is_some_and(|t| !t.is_empty()));
}

#[test]
fn constant_signal_is_flagged_degenerate() {
    let tmp = TempDir::new().unwrap();
    let text: String = (0..100).map(|i| format!("{i},0.5\n")).collect();
    fs::write(tmp.path().join("flat.csv"), text).unwrap();
    let o = srfm(tmp.path(), &["--out", "o", "fit", "flat.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(json(&tmp.path().join("o/flat.fit.json"))["degenerate"], true);
}

#[test]
fn fig4_spectrum_round_trips_through_fit() {
    let tmp = TempDir::new().unwrap();
    assert!(srfm(tmp.path(), &["--out", "o", "reproduce", "fig4"])
        .status
        .success());
    let o = srfm(tmp.path(), &["--out", "o", "fit", "o/fig4a.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&tmp.path().join("o/fig4a.fit.json"));
    let split = r["fit"]["splitting"].as_f64().unwrap_or(f64::NAN);
    assert!(
        r["degenerate"] == false && (split / 12.0 - 1.0).abs() < 0.25,
        "splitting {split} GHz, degenerate {}",
        r["degenerate"]
    );
}

#[test]
fn single_point_sweep_surfaces_undefined_slope() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("s.toml"),
        "scenario_id = \"one\"\ndensity_per_cm3 = 2e16\npump_rabi_GHz = 12.0\ngrid_span_GHz = 100.0\n\
         sweep_rabi_GHz = [0.0]\nsweep_detuning_GHz = [0.0]\nsweep_through_origin = false\n",
    )
    .unwrap();
    let o = srfm(tmp.path(), &["sweep", "--config", "s.toml"]);
    assert_ne!(o.status.code(), Some(0));

    fs::write(
        tmp.path().join("s.toml"),
        "scenario_id = \"one\"\ndensity_per_cm3 = 2e16\npump_rabi_GHz = 12.0\ngrid_span_GHz = 100.0\n\
         sweep_rabi_GHz = [10.0]\nsweep_detuning_GHz = [0.0]\nsweep_through_origin = false\n",
    )
    .unwrap();
    let o = srfm(tmp.path(), &["sweep", "--config", "s.toml"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(
        stderr(&o).contains("rank-deficient") || stderr(&o).contains("at least"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn resolved_sweep_rows_follow_input_order() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("s.toml"),
        "scenario_id = \"low\"\ndensity_per_cm3 = 2e16\npump_rabi_GHz = 8.0\ngrid_span_GHz = 100.0\n\
         sweep_rabi_GHz = [12.0, 6.0, 8.0, 8.0]\nsweep_detuning_GHz = [0.0, 0.0, 6.0, 6.0]\n",
    )
    .unwrap();
    let o = srfm(tmp.path(), &["--threads", "3", "sweep", "--config", "s.toml"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(tmp.path().join("out/low.csv")).unwrap();
    let omegas: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(omegas, vec![12.0, 6.0, 10.0, 10.0]);
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows[2], rows[3]);
    let r = json(&tmp.path().join("out/low.json"));
    let slope = r["linear_fit"]["slope"].as_f64().unwrap();
    assert!((slope - 1.0).abs() < 0.02, "{slope}");
}
