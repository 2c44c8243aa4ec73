use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use expgram_cli::matrix_io::read_matrix;
use expgram::DenseMatrix;

fn expgram(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expgram"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run expgram")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn compute_zero_matrix() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.txt"), "2 2\n0 0\n0 0\n").unwrap();
    fs::write(dir.path().join("b.txt"), "2 2\n1 0\n0 1\n").unwrap();
    let o = expgram(&["compute", "a.txt", "b.txt", "--t", "1", "--out", "res"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 1);
    assert!(stdout(&o).starts_with("q="), "{}", stdout(&o));
    assert_eq!(read_matrix(&dir.path().join("res_phi.txt")).unwrap(), DenseMatrix::identity(2));
    assert_eq!(read_matrix(&dir.path().join("res_u.txt")).unwrap(), DenseMatrix::identity(2));
}

#[test]
fn compute_scalar() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.txt"), "1 1\n1\n").unwrap();
    fs::write(dir.path().join("b.txt"), "1 1\n1\n").unwrap();
    let o = expgram(&["compute", "a.txt", "b.txt", "--out", "s"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let u = read_matrix(&dir.path().join("s_u.txt")).unwrap();
    let exact = ((1f64.exp().powi(2) - 1.0) / 2.0).sqrt();
    assert!((u[(0, 0)] - exact).abs() <= 4.0 * f64::EPSILON * exact);
    assert!((u[(0, 0)] - 1.787_324_27).abs() < 1e-8);
}

#[test]
fn compute_rejects_negative_horizon() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.txt"), "1 1\n1\n").unwrap();
    fs::write(dir.path().join("b.txt"), "1 1\n1\n").unwrap();
    let o = expgram(&["compute", "a.txt", "b.txt", "--t", "-1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("horizon must be positive"), "{}", stderr(&o));
}

#[test]
fn compute_reports_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.txt"), "2 2\n1 0 0\n").unwrap();
    fs::write(dir.path().join("b.txt"), "2 1\n1\n0\n").unwrap();
    let o = expgram(&["compute", "a.txt", "b.txt"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2: expected 4 values, found 3"), "{}", stderr(&o));

    fs::write(dir.path().join("a.txt"), "2 2\n1 0\n0 1\n").unwrap();
    fs::write(dir.path().join("b.txt"), "3 1\n1\n0\n0\n").unwrap();
    let o = expgram(&["compute", "a.txt", "b.txt"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dimension mismatch"), "{}", stderr(&o));

    let o = expgram(&["compute", "missing.txt", "b.txt"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(expgram(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(expgram(&["experiment", "gallery", "--digits", "20"], dir.path()).status.code(), Some(1));
    assert_eq!(expgram(&["derive-eta", "30"], dir.path()).status.code(), Some(1));
    assert_eq!(expgram(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn verify_tables_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let o = expgram(&["verify-tables"], dir.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().filter(|l| l.ends_with("ok")).count(), 5);
}

#[test]
fn derive_eta_q3_and_q13() {
    let dir = tempfile::tempdir().unwrap();
    let o = expgram(&["derive-eta", "3", "13", "--digits", "120", "--order", "150", "--p", "2"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0][0], "3");
    assert!(rows[0][1].starts_with("6.7"), "{text}");
    assert_eq!(rows[0][2], "6.7e-4");
    assert_eq!(rows[1][0], "13");
    assert!(rows[1][1].starts_with("1.5"), "{text}");
    assert_eq!(rows[1][3], "true");
}

#[test]
fn derive_eta_mismatch_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = expgram(&["derive-eta", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn experiment_report_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["experiment", "gallery", "--reps", "1", "--format", "json"];
    let first = expgram(&[&args[..], &["--seed", "7", "--out", "g1.json"]].concat(), dir.path());
    let second = expgram(&[&args[..], &["--seed", "7", "--out", "g2.json"]].concat(), dir.path());
    assert!(first.status.success() && second.status.success());
    let a = fs::read(dir.path().join("g1.json")).unwrap();
    let b = fs::read(dir.path().join("g2.json")).unwrap();
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["experiment"], "gallery");
    assert_eq!(v["format"], "json");

    let other = expgram(&[&args[..], &["--seed", "8", "--out", "g3.json"]].concat(), dir.path());
    assert!(other.status.success());
    assert_ne!(a, fs::read(dir.path().join("g3.json")).unwrap());
}

#[test]
fn experiment_csv_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let o = expgram(&["experiment", "laguerre", "--n-max", "3", "--lambda", "1,2"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1 + 6);
    assert!(text.lines().nth(1).unwrap().starts_with("laguerre,1,1,lambda=1,"));
}
