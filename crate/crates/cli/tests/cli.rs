use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str], config: &str) -> Output {
    let path = dir.join("run.json");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_ruelle-bf"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

const CAT: &str = r#""model": {"catmap": {"A": [[2, 1], [1, 1]], "roof": 1.0}}"#;
const DIAG23: &str = r#""model": {"matrix": {"blocks": [{"degree": 0, "L": [[2, 0], [0, 3]]}]}}"#;

#[test]
fn orbit_census_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["orbits"], &format!(r#"{{{CAT}, "truncation": {{"n_max": 3}}}}"#));
    assert!(out.status.success());
    let expected = "\
period,length,multiplicity,P_entries,trace_P,det_I_minus_P,rho_re,rho_im
1,1.0000000000000000e0,1,2.0000000000000000e0;1.0000000000000000e0;1.0000000000000000e0;1.0000000000000000e0,3.0000000000000000e0,-1.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0
2,2.0000000000000000e0,2,5.0000000000000000e0;3.0000000000000000e0;3.0000000000000000e0;2.0000000000000000e0,7.0000000000000000e0,-5.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0
3,3.0000000000000000e0,5,1.3000000000000000e1;8.0000000000000000e0;8.0000000000000000e0;5.0000000000000000e0,1.8000000000000000e1,-1.6000000000000000e1,1.0000000000000000e0,0.0000000000000000e0
# model_id: catmap
# orbit_groups: 3
# sieve_checked_up_to: 3
# sieve_consistent: true
# fixed_points_at_n_max: 16
# note: acyclicity of the twisted complex and the contact property are assumed, not checked
";
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected);
}

#[test]
fn orbit_json_and_sieve_digest() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&run(dir.path(), &["orbits", "--format", "json"], &format!(r#"{{{CAT}, "truncation": {{"n_max": 20}}}}"#)));
    assert_eq!(v["sieve_consistent"], Value::Bool(true));
    let counts: Vec<u64> = v["rows"].as_array().unwrap().iter().take(3).map(|r| r["multiplicity"].as_u64().unwrap()).collect();
    assert_eq!(counts, [1, 2, 5]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str], cfg: &str| run(dir.path(), args, cfg).status.code().unwrap();
    assert_eq!(code(&["orbits"], r#"{"model": {"catmap": {"A": [0, -1, 1, 0]}}}"#), 2);
    assert_eq!(code(&["zeta"], &format!(r#"{{{CAT}, "truncation": {{"n_max": "x"}}, "grid": [3]}}"#)), 1);
    assert_eq!(code(&["zeta"], &format!(r#"{{{CAT}, "grid": [0.2, [0.5, 1.0]]}}"#)), 3);
    assert_eq!(code(&["zeta"], &format!(r#"{{{CAT}, "grid": []}}"#)), 1);
    assert_eq!(code(&["orbits"], &format!(r#"{{{CAT}, "colour": 1}}"#)), 1);
    assert_eq!(code(&["partition"], &format!(r#"{{{CAT}, "grid": [0.1]}}"#)), 1);
    assert_eq!(code(&["orbits"], r#"{"model": {"spectrum_file": "missing.csv"}}"#), 1);
    assert_eq!(
        code(&["bridge"], r#"{"model": {"matrix": {"blocks": [{"degree": 0, "L": [[0, 0], [0, 1]]}]}}, "grid": [0.1]}"#),
        2
    );
    let missing = Command::new(env!("CARGO_BIN_EXE_ruelle-bf")).arg("orbits").output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
    let unknown = Command::new(env!("CARGO_BIN_EXE_ruelle-bf")).arg("plot").output().unwrap();
    assert_eq!(unknown.status.code(), Some(1));
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["zeta"], &format!(r#"{{{CAT}, "truncation": {{"L_max": -2}}, "grid": [3]}}"#));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("truncation.L_max"));
    let out = run(dir.path(), &["zeta"], r#"{"model": {"catmap": {"A": [2, 1, 1], "roof": 1}}, "grid": [3]}"#);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("model.catmap.A"));
}

#[test]
fn spectrum_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.csv"), "").unwrap();
    let v = json(&run(dir.path(), &["orbits", "--format", "json"], r#"{"model": {"spectrum_file": "empty.csv"}}"#));
    assert!(v["rows"].as_array().unwrap().is_empty());

    std::fs::write(
        dir.path().join("bad.csv"),
        "length,multiplicity,m,P_entries,rho_re,rho_im\n0.9624,2,2,2.0;0;0;0.5,1,0\n",
    )
    .unwrap();
    let out = run(dir.path(), &["orbits"], r#"{"model": {"spectrum_file": "bad.csv"}}"#);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let l: f64 = 1.3;
    std::fs::write(
        dir.path().join("geo.csv"),
        format!("length,multiplicity,m,P_entries,rho_re,rho_im\n{l},1,1,{};0;0;{},1,0\n", l.exp(), (-l).exp()),
    )
    .unwrap();
    let v = json(&run(dir.path(), &["zeta", "--format", "json"], r#"{"model": {"spectrum_file": "geo.csv"}, "truncation": {"L_max": 6.0}, "grid": [2.0]}"#));
    for row in v["rows"].as_array().unwrap() {
        assert_eq!(num(&row["defect"]), 0.0);
    }
}

#[test]
fn zeta_defect_and_tail_monotonicity() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&run(
        dir.path(),
        &["zeta", "--format", "json"],
        &format!(r#"{{{CAT}, "truncation": {{"n_max": 12, "L_max": 12}}, "grid": [2.0, 2.5, 3.0, 4.0, 5.0]}}"#),
    ));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 25);
    assert!(rows.iter().all(|r| num(&r["defect"]) == 0.0));
    let tails: Vec<f64> = rows.iter().filter(|r| r["k"] == "euler").map(|r| num(&r["tail_bound"])).collect();
    assert!(tails.windows(2).all(|w| w[1] < w[0]), "{tails:?}");
}

#[test]
fn bridge_matrix_model() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&run(dir.path(), &["bridge"], &format!(r#"{{{DIAG23}, "truncation": {{"K": 12}}, "grid": [0, 0.1, [0, 2.5]]}}"#)));
    let rows = v["rows"].as_array().unwrap();
    for key in ["series_re", "determinant_re", "partition_modulus"] {
        assert_eq!(num(&rows[0][key]), 1.0);
    }
    assert_eq!(num(&rows[0]["defect_series_determinant"]), 0.0);
    assert_eq!(num(&rows[0]["defect_partition_determinant"]), 0.0);
    assert!((num(&rows[1]["determinant_re"]) - 1.085).abs() < 1e-12);
    assert!(num(&rows[1]["defect_series_determinant"]) < 1e-9);
    assert!(num(&rows[1]["defect_partition_determinant"]) < 1e-9);
    assert_eq!(rows[2]["outside_radius"], Value::Bool(true));
    assert!(rows[2]["series_re"].is_null());
}

#[test]
fn bridge_orbit_model() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&run(
        dir.path(),
        &["bridge"],
        &format!(r#"{{{CAT}, "truncation": {{"n_max": 14}}, "grid": [0, [0.5, 0.3]], "base_point": 3}}"#),
    ));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(num(&rows[0]["orbit_re"]), 1.0);
    assert_eq!(num(&rows[0]["defect_orbit_determinant"]), 0.0);
    assert!(num(&rows[1]["defect_orbit_determinant"]) <= num(&rows[1]["tail_bound"]));
}

#[test]
fn diagrams_and_partition() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"model": {"matrix": {"blocks": [
        {"degree": 0, "d": [[2, 0.5], [0, 1.5]], "iota": [[1, 0.2], [0.1, 1]]},
        {"degree": 1, "L": [[[1.2, 0.3]]]}]}},
        "truncation": {"K": 5}, "grid": [[0.2, 0.1]], "fields": {"A": [1, 2, [0, 1]], "B": [0.5, -1, 1]}}"#;
    let v = json(&run(dir.path(), &["diagrams", "--format", "json"], cfg));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 10);
    for r in rows {
        assert!(num(&r["defect"]) < 1e-12);
        let n = r["n_vertices"].as_u64().unwrap();
        let aut = r["automorphisms"].as_u64().unwrap();
        assert_eq!(aut, if r["graph"] == "chain" { 2 } else { 2 * n });
    }
    let v = json(&run(dir.path(), &["partition", "--format", "json"], cfg));
    assert!(num(&v["rows"][0]["relative_defect"]) < 1e-9);
    assert!(num(&v["locus_vs_minus_spectrum"]) < 1e-6);
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(r#"{{{CAT}, "rep": {{"character": 0.4}}, "truncation": {{"n_max": 12}}, "grid": [2.5, [3, 1], [4, -2], 6]}}"#);
    let a = run(dir.path(), &["zeta", "--threads", "1"], &cfg);
    let b = run(dir.path(), &["zeta", "--threads", "4"], &cfg);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let file = dir.path().join("out.json");
    let c = run(dir.path(), &["zeta", "--format", "json", "--out", file.to_str().unwrap()], &cfg);
    assert!(c.status.success() && c.stdout.is_empty());
    let first = std::fs::read(&file).unwrap();
    run(dir.path(), &["zeta", "--format", "json", "--out", file.to_str().unwrap()], &cfg);
    assert_eq!(first, std::fs::read(&file).unwrap());
}
