use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neumann-lab"))
        .args(args)
        .current_dir(dir)
        .env_remove("NEUMANN_LAB_SEED")
        .output()
        .unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_writes_report_and_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["solve", "--p", "3", "--q", "3", "--dim", "1", "--n", "2000", "--out", "run"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("run");
    let rep = json(&run.join("solution.json"));
    assert_eq!(rep["converged"], true);
    let (lam, d) = (rep["Lambda"].as_f64().unwrap(), rep["D"].as_f64().unwrap());
    assert!((lam * d - 1.0).abs() < 1e-12);
    assert_eq!(rep["config"]["grid"]["intervals"], 2000);
    for name in ["u.csv", "v.csv"] {
        let mut r = csv::Reader::from_path(run.join(name)).unwrap();
        assert_eq!(r.headers().unwrap(), vec!["r", "value"]);
        assert_eq!(r.records().count(), 2001);
    }
}

#[test]
fn sign_case_reports_zero_radius() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["solve", "--p", "0", "--q", "1", "--dim", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json(&dir.path().join("solution.json"));
    let z = rep["zeros"][0].as_f64().unwrap();
    assert!((z - 0.5f64.sqrt()).abs() < 1e-3, "{z}");
}

#[test]
fn hyperbola_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["solve", "--p", "1", "--q", "1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hyperbola: level undefined"));
}

#[test]
fn nonconvergence_exits_2_with_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["solve", "--p", "3", "--q", "2", "--max-iter", "1", "--tol", "1e-14"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&dir.path().join("solution.json"))["converged"], false);
}

#[test]
fn table1_has_six_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["table1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let mut r = csv::Reader::from_path(dir.path().join("table1.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 6);
    let h2_4: f64 = rows[1][2].parse().unwrap();
    assert!((h2_4 + 3136.0 / 50625.0).abs() < 1e-15);
}

#[test]
fn sweep_rows_sorted_by_p() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["sweep", "--path", "p:3..0.5,q:1", "--samples", "26", "--n", "200", "--jobs", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut r = csv::Reader::from_path(dir.path().join("sweep.csv")).unwrap();
    let ps: Vec<f64> = r.records().map(|x| x.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(ps.len(), 26);
    assert!(ps.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn oracle_prints_gap() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["oracle", "--n", "9", "--p", "2", "--q", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("relative gap"));
    assert!(json(&dir.path().join("oracle.json"))["relative_gap"].as_f64().unwrap() < 1e-6);
}

#[test]
fn config_file_and_seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), "p = 2.0\nq = 3.0\n[grid]\nn = 300\n[solver]\nseed = 5\ntol = 1e-9\n")
        .unwrap();
    let out = lab(&["solve", "--config", "run.toml", "--n", "400"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let cfg = &json(&dir.path().join("solution.json"))["config"];
    assert_eq!(cfg["grid"]["intervals"], 400);
    assert_eq!(cfg["solver"]["seed"], 5);
    assert_eq!(cfg["solver"]["tol"], 1e-9);

    let out = Command::new(env!("CARGO_BIN_EXE_neumann-lab"))
        .args(["solve", "--config", "run.toml"])
        .current_dir(dir.path())
        .env("NEUMANN_LAB_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&dir.path().join("solution.json"))["config"]["solver"]["seed"], 9);

    let out = Command::new(env!("CARGO_BIN_EXE_neumann-lab"))
        .args(["solve", "--config", "run.toml", "--seed", "1"])
        .current_dir(dir.path())
        .env("NEUMANN_LAB_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&dir.path().join("solution.json"))["config"]["solver"]["seed"], 1);
}

#[test]
fn unknown_config_keys_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "p = 2.0\nq = 3.0\n[solver]\ntolerance = 1e-9\n").unwrap();
    let out = lab(&["solve", "--config", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tolerance"));
}

#[test]
fn json_format_for_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["asympt", "--format", "json", "--from", "9", "--to", "12"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&dir.path().join("asympt.json"))["rows"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r["bound"]["verdict"] == true));
}
