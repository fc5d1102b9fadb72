use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use fwexact::dump::load_matrix;

fn fwexact(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fwexact"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn report_of(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("report on stdout")
}

fn dir() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

#[test]
fn models_list_text_and_json() {
    let d = dir();
    let o = fwexact(&["models", "list"], d.path());
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["free-dirac", "dirac-1d", "feshbach-villars", "floquet-dirac-scalar", "floquet-dirac-vector"] {
        assert!(text.contains(name), "{name}");
    }

    let o = fwexact(&["models", "list", "--format", "json"], d.path());
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["models"].as_array().unwrap().len(), 5);
    assert_eq!(v["models"][0]["params"][0]["name"], "m");
}

#[test]
fn unknown_flag_is_usage_error() {
    let d = dir();
    let o = fwexact(&["models", "list", "--frobnicate"], d.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn transform_free_dirac_diagonal() {
    let d = dir();
    let o = fwexact(&["transform", "--set", "pz=0.75"], d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report_of(&o);
    assert_eq!(r["schema_version"], "1");
    let diag: Vec<f64> = r["results"]["h_fw_diagonal"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    let e = (1.0f64 + 0.75 * 0.75).sqrt();
    for (got, want) in diag.iter().zip([e, e, -e, -e]) {
        assert!((got - want).abs() < 1e-12, "{diag:?}");
    }
    let verdicts = r["verdicts"].as_object().unwrap();
    let diags = r["diagnostics"].as_object().unwrap();
    assert_eq!(verdicts.len(), diags.len());
    assert!(verdicts.values().all(|v| v == "pass"));
}

#[test]
fn zero_momentum_identity() {
    let d = dir();
    let o = fwexact(&["transform", "--set", "pz=0", "--dump"], d.path());
    assert_eq!(code(&o), 0);
    let r = report_of(&o);
    assert_eq!(r["results"]["s_norm_2"].as_f64().unwrap(), 0.0);
    let u = load_matrix(&d.path().join("dumps/transform_free-dirac_u.csv")).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((u.get(i, j).re - want).abs() < 1e-15 && u.get(i, j).im.abs() < 1e-15);
        }
    }
    let names = r["matrix_dumps"].as_array().unwrap();
    assert!(names.iter().any(|n| n == "transform_free-dirac_h_fw.csv"));
}

#[test]
fn gapless_hamiltonian_exits_3() {
    // −m + v0 = 0 at k = 0
    let d = dir();
    let o = fwexact(
        &["transform", "--set", "model=dirac-1d", "--set", "v0=1", "--set", "v1=0", "--set", "n=8"],
        d.path(),
    );
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report_of(&o);
    assert_eq!(r["error"]["kind"], "spectral_gap");
}

#[test]
fn config_file_and_overrides() {
    let d = dir();
    let cfg = d.path().join("run.json");
    std::fs::write(&cfg, r#"{"model": {"name": "feshbach-villars", "params": {"p": 0.75}}}"#).unwrap();
    let o = fwexact(&["transform", "--config", cfg.to_str().unwrap(), "--report", "out.json"], d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("out.json")).unwrap()).unwrap();
    assert_eq!(r["model"]["metric"], "beta-pseudo");
    let diag = r["results"]["h_fw_diagonal"].as_array().unwrap();
    assert!((diag[0].as_f64().unwrap() - 1.25).abs() < 1e-12);
    assert!((diag[1].as_f64().unwrap() + 1.25).abs() < 1e-12);
    assert!(r["info"]["eriksen_defect_raw"].as_f64().unwrap() > 1e-3);
}

#[test]
fn missing_config_is_io_error() {
    let d = dir();
    let o = fwexact(&["transform", "--config", "nope.json"], d.path());
    assert_eq!(code(&o), 5);
}

#[test]
fn unwritable_dump_dir_exits_5() {
    let d = dir();
    let blocker = d.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = fwexact(
        &["transform", "--dump", "--set", "output.dump_dir=file/sub"],
        d.path(),
    );
    assert_eq!(code(&o), 5);
}

#[test]
fn unwritable_report_exits_5() {
    let d = dir();
    let o = fwexact(&["transform", "--report", "/nonexistent-dir/r.json"], d.path());
    assert_eq!(code(&o), 5);
}

#[test]
fn sweep_dispersion_column() {
    let d = dir();
    let o = fwexact(
        &["sweep", "--set", "sweep.parameter=pz", "--set", "sweep.values=0.25,0.5,0.75"],
        d.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), fwexact_cli::commands::SWEEP_HEADER);
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    for (row, p) in rows.iter().zip([0.25f64, 0.5, 0.75]) {
        let disp: f64 = row[4].parse().unwrap();
        assert!((disp - (1.0 + p * p).sqrt()).abs() < 1e-15);
        let err: f64 = row[5].parse().unwrap();
        assert!(err < 1e-10);
    }
    assert!(rows[0][4].starts_with("1.0307764064"));
    assert!(rows[1][4].starts_with("1.1180339887"));
    assert_eq!(rows[2][4], "1.25");
}

#[test]
fn empty_sweep_single_row() {
    let d = dir();
    let o = fwexact(&["sweep", "--set", "sweep.parameter=pz", "--table", "t.csv", "--report", "r.json"], d.path());
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(d.path().join("t.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["results"]["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn non_numeric_sweep_value_exits_2() {
    let d = dir();
    let o = fwexact(&["sweep", "--set", "sweep.parameter=pz", "--set", "sweep.values=a,b"], d.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn floquet_static_model_even() {
    let d = dir();
    let o = fwexact(
        &["floquet", "--set", "model=floquet-dirac-scalar", "--set", "v1=0", "--set", "nf=4", "--set", "floquet.nf=2,4"],
        d.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report_of(&o);
    assert!(r["diagnostics"]["odd_norm_lambda_naive"].as_f64().unwrap() <= 1e-10);
    assert!(r["diagnostics"]["odd_norm_lambda_capital"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn floquet_vector_drive_separates() {
    let d = dir();
    let o = fwexact(
        &["floquet", "--set", "model=floquet-dirac-vector", "--set", "floquet.nf=4,6,8", "--set", "floquet.window=4"],
        d.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report_of(&o);
    let naive = r["diagnostics"]["odd_norm_lambda_naive"].as_f64().unwrap();
    let cap = r["diagnostics"]["odd_norm_lambda_capital"].as_f64().unwrap();
    assert!(naive > 10.0 * cap && naive > 1e-4);
    assert_eq!(r["results"]["decay_table"].as_array().unwrap().len(), 3);
}

#[test]
fn floquet_window_equal_to_truncation_warns() {
    let d = dir();
    let o = fwexact(
        &["floquet", "--set", "model=floquet-dirac-scalar", "--set", "nf=1", "--set", "floquet.window=1"],
        d.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("window equals truncation; edge effects dominate"));
    let r = report_of(&o);
    assert_eq!(r["warnings"][0], "window equals truncation; edge effects dominate");
}

#[test]
fn floquet_rejects_stationary_model() {
    let d = dir();
    let o = fwexact(&["floquet"], d.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn floquet_resonance_exits_3() {
    // E = 1, ω = E/2 puts a zero on the ladder
    let d = dir();
    let o = fwexact(
        &["floquet", "--set", "model=floquet-dirac-scalar", "--set", "pz=0", "--set", "v1=0", "--set", "omega=0.5", "--set", "nf=3"],
        d.path(),
    );
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("quasienergy resonance"));
}

#[test]
fn tolerance_failure_exits_4_and_names_invariant() {
    let d = dir();
    let o = fwexact(
        &["transform", "--set", "model=dirac-1d", "--set", "tolerances.tol_identity=1e-30", "--set", "tolerances.tol_generator=1e-30"],
        d.path(),
    );
    assert_eq!(code(&o), 4);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("invariant failed:"), "{err}");
}
