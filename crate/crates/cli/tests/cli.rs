use std::io::Write;
use std::path::PathBuf;

use assert_cmd::Command;
use predicates::prelude::*;
use tempfile::NamedTempFile;

fn refless() -> Command {
    Command::cargo_bin("refless").unwrap()
}

fn config_file(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

const FREE_JACOBI: &str = r#"{
  "bands": [[-2, 2]],
  "divisor": [
    {"gap_index": 0, "mu": "-inf", "s": 0},
    {"gap_index": 1, "mu": "inf", "s": 0}
  ],
  "g": -0.5,
  "A_plus": 0,
  "D": 1
}"#;

const DIRAC: &str = r#"{
  "bands": [["-inf", -1], [1, "inf"]],
  "divisor": [{"gap_index": 0, "mu": 0, "s": 1}],
  "A_plus": 0,
  "D": 1
}"#;

fn summary_field(line: &str, key: &str) -> String {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("missing {key} in `{line}`"))
        .to_string()
}

#[test]
fn build_free_jacobi_summary() {
    let cfg = config_file(FREE_JACOBI);
    let out = refless()
        .args(["build", "--config"])
        .arg(cfg.path())
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    let line = String::from_utf8(out).unwrap();
    assert_eq!(summary_field(&line, "case"), "jacobi");
    let mi = summary_field(&line, "m_plus_i");
    let (re, im) = mi.split_once(',').unwrap();
    let re: f64 = re.parse().unwrap();
    let im: f64 = im.parse().unwrap();
    assert!(re.abs() < 1e-10, "Re m+(i) = {re}");
    assert!((im - 0.6180339887).abs() < 1e-8, "Im m+(i) = {im}");
}

#[test]
fn build_summary_round_trips_as_config() {
    let cfg = config_file(FREE_JACOBI);
    let line = String::from_utf8(
        refless()
            .args(["build", "--config"])
            .arg(cfg.path())
            .assert()
            .success()
            .get_output()
            .stdout
            .clone(),
    )
    .unwrap();
    // transcribe the summary fields back into a configuration document
    let quote = |v: &str| {
        if v == "inf" || v == "-inf" {
            format!("\"{v}\"")
        } else {
            v.to_string()
        }
    };
    let bands: Vec<String> = summary_field(&line, "bands")
        .split(';')
        .map(|pair| {
            let (a, b) = pair.split_once(',').unwrap();
            format!("[{}, {}]", quote(a), quote(b))
        })
        .collect();
    let divisor: Vec<String> = summary_field(&line, "divisor")
        .split(';')
        .enumerate()
        .map(|(j, p)| {
            let (mu, s) = p.split_once('/').unwrap();
            format!("{{\"gap_index\": {j}, \"mu\": {}, \"s\": {s}}}", quote(mu))
        })
        .collect();
    let g = summary_field(&line, "g");
    let g = if g == "none" { "null".to_string() } else { g };
    let rebuilt = format!(
        "{{\"bands\": [{}], \"divisor\": [{}], \"g\": {g}, \"A_plus\": {}, \"D\": {}}}",
        bands.join(", "),
        divisor.join(", "),
        summary_field(&line, "A_plus"),
        summary_field(&line, "D"),
    );
    let cfg2 = config_file(&rebuilt);
    let line2 = String::from_utf8(
        refless()
            .args(["build", "--config"])
            .arg(cfg2.path())
            .assert()
            .success()
            .get_output()
            .stdout
            .clone(),
    )
    .unwrap();
    assert_eq!(line, line2, "rebuilt summary differs");
}

#[test]
fn build_rejects_mu_outside_gap() {
    let cfg = config_file(
        r#"{"bands": [["-inf", -1], [1, "inf"]],
            "divisor": [{"gap_index": 0, "mu": 3, "s": 1}],
            "A_plus": 0, "D": 1}"#,
    );
    refless().args(["build", "--config"]).arg(cfg.path()).assert().code(3);
}

#[test]
fn build_rejects_zero_d() {
    let cfg = config_file(&FREE_JACOBI.replace("\"D\": 1", "\"D\": 0"));
    refless().args(["build", "--config"]).arg(cfg.path()).assert().code(3);
}

#[test]
fn build_names_offending_field_on_schema_error() {
    let cfg = config_file(r#"{"bands": [[-2, "wide"]], "divisor": [], "A_plus": 0, "D": 1}"#);
    refless()
        .args(["build", "--config"])
        .arg(cfg.path())
        .assert()
        .code(2)
        .stderr(predicate::str::contains("bands[0][1]"));
}

#[test]
fn eval_rect_hits_known_value_and_is_deterministic() {
    let cfg = config_file(FREE_JACOBI);
    let dir = tempfile::tempdir().unwrap();
    let out1: PathBuf = dir.path().join("a.csv");
    let out2: PathBuf = dir.path().join("b.csv");
    for out in [&out1, &out2] {
        refless()
            .args(["eval", "--config"])
            .arg(cfg.path())
            .args(["--grid", "0,0,2,2,1", "--out"])
            .arg(out)
            .assert()
            .success();
    }
    let text = std::fs::read_to_string(&out1).unwrap();
    assert_eq!(text, std::fs::read_to_string(&out2).unwrap(), "output not deterministic");
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "re_z,im_z,re_m,im_m");
    let row: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(row[2].abs() < 1e-10, "Re m = {}", row[2]);
    assert!((row[3] - (2f64.sqrt() - 1.0)).abs() < 1e-7, "Im m = {}", row[3]);
}

#[test]
fn eval_boundary_stays_in_upper_half_plane() {
    let cfg = config_file(FREE_JACOBI);
    let out = refless()
        .args(["eval", "--config"])
        .arg(cfg.path())
        .args(["--boundary", "-1.9,1.9,1e-6,40"])
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,epsilon,re_m,im_m");
    let mut rows = 0;
    for line in lines {
        let im_m: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(im_m > 0.0, "Im m = {im_m} on `{line}`");
        rows += 1;
    }
    assert_eq!(rows, 40);
}

#[test]
fn eval_rejects_empty_grid() {
    let cfg = config_file(FREE_JACOBI);
    refless()
        .args(["eval", "--config"])
        .arg(cfg.path())
        .args(["--grid", "0,1,1,2,0"])
        .assert()
        .code(2);
}

#[test]
fn orbit_jacobi_data_on_free_system() {
    let cfg = config_file(FREE_JACOBI);
    let out = refless()
        .args(["orbit", "--config"])
        .arg(cfg.path())
        .args(["--kind", "jacobi-data"])
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    let text = String::from_utf8(out).unwrap();
    let data = text.lines().find(|l| l.starts_with("t=")).unwrap();
    let t: f64 = summary_field(data, "t").parse().unwrap();
    assert!(t.abs() < 1e-8, "t = {t}");
    for v in summary_field(data, "a").split(',') {
        let a: f64 = v.parse().unwrap();
        assert!((a - 1.0).abs() < 1e-6, "a = {a}");
    }
    for v in summary_field(data, "b").split(',') {
        let b: f64 = v.parse().unwrap();
        assert!(b.abs() < 1e-6, "b = {b}");
    }
}

#[test]
fn orbit_dirac_identity_on_normalized_system() {
    let cfg = config_file(DIRAC);
    let out = refless()
        .args(["orbit", "--config"])
        .arg(cfg.path())
        .args(["--kind", "dirac"])
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    let text = String::from_utf8(out).unwrap();
    let entries: Vec<f64> = summary_field(text.lines().next().unwrap(), "transform")
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    let id = [1.0, 0.0, 0.0, 1.0];
    for (e, i) in entries.iter().zip(id) {
        assert!((e - i).abs() < 1e-7, "transform {entries:?} is not the identity");
    }
}

#[test]
fn orbit_rejects_case_mismatch() {
    let cfg = config_file(DIRAC);
    refless()
        .args(["orbit", "--config"])
        .arg(cfg.path())
        .args(["--kind", "schroedinger"])
        .assert()
        .code(5);
}

#[test]
fn check_reflectionless_passes_at_band_point() {
    let cfg = config_file(FREE_JACOBI);
    refless()
        .args(["check", "--config"])
        .arg(cfg.path())
        .args(["--check", "reflectionless", "--t", "0"])
        .assert()
        .success()
        .stdout(predicate::str::contains("PASS"));
}

#[test]
fn check_rejects_invalid_g_before_running() {
    let cfg = config_file(&FREE_JACOBI.replace("-0.5", "0.9"));
    refless().args(["check", "--config"]).arg(cfg.path()).assert().code(3);
}

#[test]
fn distance_of_system_to_itself_is_zero() {
    let cfg = config_file(FREE_JACOBI);
    let out = refless()
        .arg("distance")
        .arg(cfg.path())
        .arg(cfg.path())
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    let line = String::from_utf8(out).unwrap();
    let d: f64 = summary_field(line.trim(), "distance").parse().unwrap();
    assert_eq!(d, 0.0);
}

#[test]
fn distance_between_constant_zero_and_infinity() {
    let out = refless()
        .args(["distance", "const:0", "const:inf"])
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    let line = String::from_utf8(out).unwrap();
    let d: f64 = summary_field(line.trim(), "distance").parse().unwrap();
    assert!((d - 2.0).abs() < 1e-12, "distance = {d}");
}

#[test]
fn small_d_system_approaches_constant_zero() {
    let cfg = config_file(
        r#"{"bands": [[-2, 2]],
            "divisor": [
              {"gap_index": 0, "mu": "-inf", "s": 0},
              {"gap_index": 1, "mu": "inf", "s": 0}
            ],
            "g": 0, "A_plus": 0, "D": 0.01}"#,
    );
    let out = refless()
        .arg("distance")
        .arg(cfg.path())
        .arg("const:0")
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    let line = String::from_utf8(out).unwrap();
    let d: f64 = summary_field(line.trim(), "distance").parse().unwrap();
    assert!(d < 0.2, "distance = {d}");
}

#[test]
fn suite_runs_clean() {
    refless()
        .args(["check", "--suite"])
        .assert()
        .success()
        .stdout(predicate::str::contains("FAIL").not());
}
