//! End-to-end checks of the csshash binary: report contents, file parsing
//! diagnostics, exit codes and determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_csshash"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("csshash-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn canon_reports_builtin_examples() {
    let out = run(&["canon", "--example", "cat4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("theta = 1 1 1"), "{text}");
    assert!(text.contains("orthogonal = no"), "{text}");
    assert!(text.contains("separable = no"), "{text}");

    let out = run(&["canon", "--example", "css8"]);
    assert!(stdout(&out).contains("orthogonal = yes"));

    let out = run(&["canon", "--example", "bell"]);
    assert!(stdout(&out).contains("orthogonal = yes"));
}

#[test]
fn canon_reads_state_files() {
    let path = tmp("cat4.state");
    let text = csshash::formats::write_css_state(&csshash::channels::cat_state(4));
    std::fs::write(&path, text).unwrap();
    let out = run(&["canon", "--state", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("theta = 1 1 1"));
    std::fs::remove_file(&path).ok();
}

#[test]
fn entropy_of_builtin_mixture() {
    let out = run(&["entropy", "--example", "css8"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("H = 2.558449296152"));
}

#[test]
fn yield_report_css8() {
    let out = run(&["yield", "--example", "css8"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("gamma = 0.329290638960"), "{text}");
    assert!(text.contains("active constraints:"));
}

#[test]
fn yield_grid_csv() {
    let grid = tmp("grid.csv");
    let out = run(&[
        "yield",
        "--example",
        "cat4",
        "--fidelity",
        "0.9",
        "--grid-out",
        grid.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&grid).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("d_z,d_x,h_dd,rhs"));
    assert_eq!(lines.count(), 7, "full grid minus (0,0)");
    std::fs::remove_file(&grid).ok();
}

#[test]
fn sweep_dataset_ordering() {
    let path = tmp("sweep.csv");
    let out = run(&[
        "sweep", "--example", "cat4", "--from", "0.9", "--to", "1.0", "--steps", "5", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("F,yield_ours,yield_lo,yield_man"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|t| t.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert!(r[1] >= r[2] - 1e-12 && r[2] >= r[3] - 1e-12, "{r:?}");
    }
    let last = rows.last().unwrap();
    assert!((last[0] - 1.0).abs() < 1e-12);
    assert!((last[1] - 1.0).abs() < 1e-9 && (last[2] - 1.0).abs() < 1e-9);
    std::fs::remove_file(&path).ok();
}

#[test]
fn simulate_is_deterministic() {
    let args = [
        "simulate", "--example", "cat4", "--fidelity", "0.9", "--copies", "6", "--mz", "0.333",
        "--mx", "0.333", "--trials", "400", "--seed", "7",
    ];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(first.stdout, second.stdout, "same seed must give identical bytes");
    let text = stdout(&first);
    assert!(text.starts_with("d_z,d_x,trials,survivals,predicted,z_score"));
}

#[test]
fn check_perm_verifies_samples() {
    let out = run(&[
        "check-perm", "--example", "cat4", "--copies", "2", "--samples", "100", "--seed", "3",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("100/100 verified"));
}

#[test]
fn malformed_files_exit_2_with_line_numbers() {
    let path = tmp("bad.state");
    std::fs::write(&path, "css-state v1\nn=4 nz=3 nx=1\nSz:\n100\n010\nBAD\n111\nSx:\n1\n1\n1\n1\n")
        .unwrap();
    let out = run(&["canon", "--state", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 6"), "{err}");
    std::fs::remove_file(&path).ok();

    let path = tmp("bad.mix");
    std::fs::write(&path, "mixture v1\nn=2\n00 0.7\n01 0.2\n").unwrap();
    let out = run(&["entropy", "--mixture", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sum"));
    std::fs::remove_file(&path).ok();
}

#[test]
fn usage_errors_exit_1() {
    let out = run(&["canon", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["entropy"]);
    // missing inputs are data errors (the flags themselves parse)
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn separable_state_rejected() {
    let path = tmp("sep.state");
    // two independent single-qubit states
    let text = "css-state v1\nn=2 nz=2 nx=0\nSz:\n10\n01\nSx:\n\n\n";
    std::fs::write(&path, text).unwrap();
    let out = run(&[
        "check-perm", "--state", path.to_str().unwrap(), "--copies", "2", "--samples", "5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("separable"));
    std::fs::remove_file(&path).ok();
}
