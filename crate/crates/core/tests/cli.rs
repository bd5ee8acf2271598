use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bellpaths(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellpaths"))
        .arg("--output-dir")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn toy_default_writes_nine_canonical_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let o = bellpaths(dir.path(), &["toy", "--n", "20000"]);
    assert_eq!(o.status.code(), Some(0));
    let mut r = csv::Reader::from_path(dir.path().join("toy.csv")).unwrap();
    let headers: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(headers, ["alpha", "beta", "exact_p_same", "mc_estimate", "ci", "n", "seed"]);
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 9);
    for row in &rows {
        let exact: f64 = row[2].parse().unwrap();
        let same = row[0] == row[1];
        let target = if same { 1.0 } else { 1.0 / 3.0 };
        assert!((exact - target).abs() < 1e-12);
        assert_eq!(&row[6], "42");
    }
}

#[test]
fn toy_single_pair_accepts_symbolic_angles() {
    let dir = tempfile::tempdir().unwrap();
    let o = bellpaths(dir.path(), &["toy", "--alpha", "0", "--beta", "4pi/3", "--n", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("exact_p_same = 0.333333333333333"));
}

#[test]
fn degrees_flag_converts_bare_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let o = bellpaths(dir.path(), &["--deg", "toy", "--alpha", "0", "--beta", "90", "--n", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("exact_p_same = 0.5 "));
}

#[test]
fn rt_equal_settings_print_unit_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = bellpaths(dir.path(), &["rt", "--alpha", "0", "--beta", "0", "--paths", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("p_same_closed = 1 "));
    let text = fs::read_to_string(dir.path().join("rt.csv")).unwrap();
    assert!(text.starts_with("alpha,beta,p_same_closed,p_same_numeric,congruence_residual\n"));
}

#[test]
fn bell_quantum_reports_two_root_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = bellpaths(dir.path(), &["bell", "--source", "quantum"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("quantum S = 2.828427"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("bell.json")).unwrap()).unwrap();
    let s = json["chsh"][0]["s"].as_f64().unwrap();
    assert!((s - 2.0 * 2f64.sqrt()).abs() < 1e-9);
    assert!((json["mermin3"][0]["unequal_mean"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert!(dir.path().join("bell_sweep.csv").exists());
}

#[test]
fn sample_reports_classical_and_quantum_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = bellpaths(dir.path(), &["sample", "--alpha", "0", "--beta", "2pi/3", "--n", "100000"]);
    assert_eq!(o.status.code(), Some(0));
    let mut r = csv::Reader::from_path(dir.path().join("sample.csv")).unwrap();
    let row = r.records().next().unwrap().unwrap();
    let sampled: f64 = row[2].parse().unwrap();
    let toy: f64 = row[4].parse().unwrap();
    let qm: f64 = row[5].parse().unwrap();
    assert!((toy - 1.0 / 3.0).abs() < 1e-12 && (qm - 0.25).abs() < 1e-12);
    assert!((sampled - toy).abs() < 0.01);
}

#[test]
fn sg_and_measure_demo_write_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = bellpaths(dir.path(), &["sg", "--sequence", "z,x,z", "--n", "100000"]);
    assert_eq!(o.status.code(), Some(0));
    let sg: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("sg.json")).unwrap()).unwrap();
    assert_eq!(sg["cells"].as_array().unwrap().len(), 8);

    let o = bellpaths(dir.path(), &["measure-demo", "--n-max", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("measure_demo.json")).unwrap()).unwrap();
    assert_eq!(m["all_pass"], true);
}

#[test]
fn spiral_and_json_format() {
    let dir = tempfile::tempdir().unwrap();
    let o = bellpaths(dir.path(), &["spiral", "--paths", "500", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("spiral.json")).unwrap()).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 500);
    assert!(rows[0].get("cum_re").is_some());
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_bellpaths"))
        .env("BELLPATHS_OUTPUT_DIR", dir.path())
        .args(["measure-demo", "--n-max", "3"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("measure_demo.json").exists());
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(bellpaths(dir.path(), &["toy", "--bogus"]).status.code(), Some(2));
    assert_eq!(bellpaths(dir.path(), &["nope"]).status.code(), Some(2));
    assert_eq!(bellpaths(dir.path(), &["toy", "--alpha", "abc", "--beta", "0"]).status.code(), Some(2));
    assert_eq!(bellpaths(dir.path(), &["toy", "--alpha", "0"]).status.code(), Some(2));
}

#[test]
fn model_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["spiral", "--paths", "0"],
        &["spiral", "--wavelength=-1"],
        &["spiral", "--detector-y=-0.1"],
        &["toy", "--n", "0"],
        &["sg", "--sequence", "z,,x"],
        &["sg", "--sequence", "z", "--initial", "sideways"],
        &["bell", "--settings", "0,1,2"],
        &["measure-demo", "--n-max", "0"],
    ];
    for args in cases {
        let o = bellpaths(dir.path(), args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        assert_eq!(bellpaths(dir.path(), &["sample", "--n", "50000", "--seed", "7"]).status.code(), Some(0));
    }
    let x = fs::read(a.path().join("sample.csv")).unwrap();
    let y = fs::read(b.path().join("sample.csv")).unwrap();
    assert_eq!(x, y);

    let c = tempfile::tempdir().unwrap();
    bellpaths(c.path(), &["sample", "--n", "50000", "--seed", "8"]);
    assert_ne!(x, fs::read(c.path().join("sample.csv")).unwrap());
}

#[test]
fn in_process_run_matches_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(bellpaths::cli::run(["bellpaths", "--output-dir", d, "measure-demo", "--n-max", "2"]), 0);
    assert_eq!(bellpaths::cli::run(["bellpaths", "--output-dir", d, "spiral", "--paths", "0"]), 1);
}
