use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_degdiff"));
    c.env_remove("DEGDIFF_OUT_DIR");
    c
}

fn write_spec(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

/// Values of the last column of a one-row CSV.
fn last_value(csv: &str) -> f64 {
    let row = csv.lines().nth(1).expect("data row");
    row.rsplit(',').next().unwrap().parse().unwrap()
}

#[test]
fn dist_unit_coefficient() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "a1.json", r#"{"schema":1,"kind":"closed_form","family":"constant","value":1}"#);
    let out = dir.path().join("d.csv");
    let st = bin()
        .args(["--coef", &spec, "--out", out.to_str().unwrap(), "dist", "--x", "0", "--y", "3"])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some("x,y,distance"));
    assert_eq!(last_value(&text), 3.0);
}

#[test]
fn mass_on_bump_train() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "e42.json", r#"{"schema":1,"kind":"example42","n_terms":12}"#);
    let out = bin().args(["--coef", &spec, "mass", "--t", "1", "--x", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = last_value(&String::from_utf8(out.stdout).unwrap());
    assert!((v - 1.0).abs() <= 1e-6);
}

#[test]
fn ex42_row_below_ceiling() {
    let out = bin().args(["ex42", "--n", "64"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(col("n"), 64.0);
    assert!(col("rayleigh") <= col("ceiling"));
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "s.json", r#"{"schema":1,"kind":"closed_form","family":"sqrt_one_plus_square"}"#);
    let run = || {
        bin()
            .args(["--coef", &spec, "apply", "--op", "subordination", "--t", "0.5", "--points", "41"])
            .output()
            .unwrap()
            .stdout
    };
    let (a, b) = (run(), run());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn env_directory_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "a.json", r#"{"schema":1,"kind":"closed_form","family":"constant","value":2}"#);
    let st = bin()
        .env("DEGDIFF_OUT_DIR", dir.path())
        .args(["--coef", &spec, "--format", "json", "flow", "--t", "1", "--x", "-1"])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("flow.json")).unwrap()).unwrap();
    assert_eq!(v[0]["flow"], serde_json::json!(1.0));
}

#[test]
fn validation_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let drift = write_spec(dir.path(), "bad.json", r#"{"schema":1,"kind":"example41","n_max":6,"extra":true}"#);
    let old = write_spec(dir.path(), "old.json", r#"{"schema":0,"kind":"example41","n_max":6}"#);
    for spec in [&drift, &old] {
        let st = bin().args(["--coef", spec, "dist", "--x", "0", "--y", "1"]).output().unwrap();
        assert_eq!(st.status.code(), Some(2));
    }
    assert_eq!(bin().args(["dist", "--x", "0", "--y", "1"]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["nonsense"]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["ex41", "--n", "20"]).output().unwrap().status.code(), Some(2));
}

#[test]
fn range_csv_columns() {
    let out = bin().args(["range", "--n", "64"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("re,im,label"));
    assert_eq!(text.lines().count(), 1 + 7);
}
