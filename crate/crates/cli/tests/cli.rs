//! End-to-end tests of the binary: exit codes, table formats, determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_magnon-sim"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn params_with_defaults_prints_drive_point_values() {
    let out = run(&["params"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("xi       = 1.8"), "{text}");
    assert!(text.contains("Delta_1  =    0.100000000 GHz"), "{text}");
    assert!(text.contains("Delta_2  =    0.100000000 GHz"), "{text}");
    assert!(text.contains("g1       =    0.029075848 GHz"), "{text}");
}

#[test]
fn params_json_has_both_unit_systems() {
    let out = run(&["params", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let d = &doc["derived"];
    assert_eq!(d["xi"].as_f64().unwrap(), 1.8);
    let ghz = d["delta_1_ghz"].as_f64().unwrap();
    let rad = d["delta_1_rad_ns"].as_f64().unwrap();
    assert!((rad / ghz - std::f64::consts::TAU).abs() < 1e-12);
}

#[test]
fn negative_decay_exits_with_config_code() {
    let out = run(&["--set", "params.kappa=-0.001", "params"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_field_exits_with_config_code() {
    let out = run(&["--set", "params.nonsense=1", "params"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_preset_exits_with_config_code() {
    let out = run(&["--preset", "fig99", "params"]);
    assert_eq!(out.status.code(), Some(2));
}

const TINY_GRID: &[&str] = &[
    "--set",
    "grid.axis1.count=2",
    "--set",
    "grid.axis2.count=2",
    "--set",
    "grid.fixed.g1=0.0005",
    "--set",
    "grid.fixed.g2=0.001",
];

#[test]
fn stability_map_emits_header_and_four_rows() {
    let mut args = vec!["stability-map"];
    args.extend_from_slice(TINY_GRID);
    let out = run(&args);
    assert!(out.status.success());
    let text = stdout(&out);
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data.len(), 5, "{text}"); // 1 header + 4 rows
    assert_eq!(data[0], "axis1,axis2,stable,margin");
}

#[test]
fn reruns_are_byte_identical() {
    let mut args = vec!["stability-map"];
    args.extend_from_slice(TINY_GRID);
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn serial_worker_matches_parallel() {
    // data rows identical; the config header differs (it records jobs = 1)
    let rows = |out: &Output| -> Vec<String> {
        stdout(out)
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(String::from)
            .collect()
    };
    let mut args = vec!["stability-map"];
    args.extend_from_slice(TINY_GRID);
    let par = run(&args);
    args.extend_from_slice(&["--jobs", "1"]);
    let ser = run(&args);
    assert!(ser.status.success());
    assert_eq!(rows(&par), rows(&ser));
}

#[test]
fn jobs_env_variable_is_honored() {
    let mut args = vec!["stability-map"];
    args.extend_from_slice(TINY_GRID);
    let out = bin()
        .args(&args)
        .env("MAGNON_SIM_JOBS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let bad = bin()
        .args(&args)
        .env("MAGNON_SIM_JOBS", "soon")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn all_unstable_grid_has_empty_entanglement_columns() {
    // squeezing dominates everywhere: g1 >> g2 near zero detuning
    let out = run(&[
        "ent-map",
        "--set",
        "grid.axis1.min=-0.0001",
        "--set",
        "grid.axis1.max=0.0001",
        "--set",
        "grid.axis1.count=3",
        "--set",
        "grid.axis2.min=-0.0001",
        "--set",
        "grid.axis2.max=0.0001",
        "--set",
        "grid.axis2.count=3",
        "--set",
        "grid.fixed.g1=0.003",
        "--set",
        "grid.fixed.g2=0.0001",
    ]);
    assert!(out.status.success());
    for line in stdout(&out)
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("axis1"))
    {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[2], "0", "{line}");
        assert_eq!(&cells[3..6], &["", "", ""], "{line}");
    }
}

#[test]
fn json_output_mirrors_csv_rows() {
    let mut args = vec!["stability-map"];
    args.extend_from_slice(TINY_GRID);
    let csv_out = run(&args);
    args.extend_from_slice(&["--format", "json"]);
    let json_out = run(&args);
    assert!(json_out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&json_out)).unwrap();
    let rows = doc["rows"].as_array().unwrap();

    let csv_text = stdout(&csv_out);
    let csv_rows: Vec<&str> = csv_text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("axis1"))
        .collect();
    assert_eq!(rows.len(), csv_rows.len());
    for (json_row, csv_row) in rows.iter().zip(csv_rows) {
        let cells: Vec<&str> = csv_row.split(',').collect();
        assert_eq!(
            json_row["axis1"].as_f64().unwrap(),
            cells[0].parse::<f64>().unwrap()
        );
        assert_eq!(
            json_row["margin"].as_f64().unwrap(),
            cells[3].parse::<f64>().unwrap()
        );
        assert_eq!(
            json_row["stable"].as_i64().unwrap(),
            cells[2].parse::<i64>().unwrap()
        );
    }
}

#[test]
fn evolve_with_zero_couplings_stays_in_vacuum() {
    let out = run(&[
        "evolve",
        "--set",
        "params.g1_prime=0",
        "--set",
        "params.g2=0",
        "--set",
        "params.omega_d=0",
        "--set",
        "propagation.t_end=50",
    ]);
    assert!(out.status.success());
    for line in stdout(&out)
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("t_ns"))
    {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        for v in &cells[1..] {
            assert!(v.abs() < 1e-12, "{line}");
        }
    }
}

#[test]
fn evolve_two_magnon_model_reports_pair_negativity() {
    let out = run(&[
        "evolve",
        "--preset",
        "fig6",
        "--set",
        "model=effective",
        "--set",
        "propagation.t_end=200",
        "--set",
        "propagation.entanglement=true",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let last = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("t_ns"))
        .next_back()
        .unwrap();
    let cells: Vec<&str> = last.split(',').collect();
    // no cavity in this model: population and cavity-pair columns empty
    assert_eq!(cells[1], "");
    assert_eq!(cells[4], "");
    assert_eq!(cells[5], "");
    assert!(cells[6].parse::<f64>().unwrap() > 0.0, "{last}");
}

#[test]
fn compare_below_threshold_exits_zero() {
    let out = run(&[
        "compare",
        "--preset",
        "fig6",
        "--pair",
        "rwa-effective",
        "--set",
        "propagation.t_end=300",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("headline divergence"), "{err}");
}

#[test]
fn compare_above_threshold_exits_with_numerical_code() {
    let out = run(&[
        "compare",
        "--preset",
        "fig6",
        "--pair",
        "rwa-effective",
        "--set",
        "propagation.t_end=300",
        "--set",
        "compare.threshold=1e-9",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn output_file_and_config_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.csv");
    let mut args = vec!["stability-map", "--output", path.to_str().unwrap()];
    args.extend_from_slice(TINY_GRID);
    let out = run(&args);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# magnon-sim stability-map\n# config = {"));
    assert!(text.lines().nth(1).unwrap().contains("\"g2\":0.001"));
}

#[test]
fn config_file_is_merged() {
    let dir = tempfile::tempdir().unwrap();
    let path: &Path = &dir.path().join("run.json");
    std::fs::write(path, r#"{"params": {"nu_1": 10.4}}"#).unwrap();
    let out = run(&["params", "--config", path.to_str().unwrap()]);
    assert!(out.status.success());
    // Delta_1 = nu_c + nu_1 - nu_d = 0.4
    assert!(stdout(&out).contains("Delta_1  =    0.400000000 GHz"));
}

#[test]
fn detuning_map_peaks_on_the_diagonal_at_minimal_detuning() {
    let out = run(&[
        "ent-map",
        "--preset",
        "fig7a",
        "--set",
        "grid.axis1.count=7",
        "--set",
        "grid.axis2.count=7",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for line in text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("axis1"))
    {
        let cells: Vec<&str> = line.split(',').collect();
        if let Ok(e) = cells[5].parse::<f64>() {
            if e > best.0 {
                best = (e, cells[0].parse().unwrap(), cells[1].parse().unwrap());
            }
        }
    }
    // maximum on the equal-detuning diagonal at the smallest plotted detuning
    assert_eq!(best.1, 0.3, "{best:?}");
    assert_eq!(best.2, 0.3, "{best:?}");
}

#[test]
fn ratio_sweep_reports_argmax_per_curve() {
    let out = run(&[
        "ratio-sweep",
        "--set",
        "ratio.g2_values=[0.03]",
        "--set",
        "ratio.ratio_count=30",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text
        .lines()
        .any(|l| l.starts_with("curve_id,ratio,E_m1_m2")));
    assert!(text.contains("# g2=0.03: argmax ratio ="), "{text}");
    // ratio 0 row must carry exactly zero entanglement
    let first = text
        .lines()
        .find(|l| l.starts_with("g2=0.03,0.0000000000000000e0"))
        .expect("ratio-0 row");
    assert!(first.ends_with(",0.0000000000000000e0"), "{first}");
}
