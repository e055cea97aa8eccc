//! End-to-end checks of the chmetric binary: exit codes, output files, and
//! rerun determinism.

use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chmetric"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn metric_of_identical_solutions_is_zero() {
    let out = run(&[
        "metric", "--E", "2", "--E2", "2", "--t0", "2", "--t02", "2", "--t", "1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("total = 0"), "{text}");
}

#[test]
fn metric_of_distinct_solutions_reports_the_amplitude_term() {
    let out = run(&[
        "metric", "--E", "2", "--E2", "2.2", "--t", "1", "--N", "512",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("dA = 0.282842712475"), "{text}");
}

#[test]
fn figures_command_emits_one_csv_per_time() {
    let dir = tempfile::tempdir().unwrap();
    let out_flag = dir.path().to_str().unwrap();
    let out = run(&["figures", "--id", "u", "--N", "64", "--out", out_flag]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["u_t0.csv", "u_t1.5.csv", "u_t2.csv", "u_t4.csv"]);
    // At the breaking time the velocity vanishes and the energy sits in the
    // atom at the origin, marked in the branch column.
    let text = fs::read_to_string(dir.path().join("u_t2.csv")).unwrap();
    let atom: Vec<&str> = text.lines().filter(|l| l.ends_with(",atom")).collect();
    assert_eq!(atom.len(), 1);
    assert_eq!(atom[0], "0,4,atom");
    for line in text.lines().skip(1).filter(|l| !l.ends_with(",atom")) {
        let value = line.split(',').nth(1).unwrap();
        assert_eq!(value, "0", "nonzero velocity row: {line}");
    }
}

#[test]
fn unknown_figure_id_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "figures",
        "--id",
        "bogus",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    let out = run(&[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_file_is_a_usage_error() {
    let out = run(&["invariants", "--config", "/nonexistent/suite.cfg"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    for d in [&d1, &d2] {
        let out = run(&[
            "transform",
            "--t",
            "3",
            "--N",
            "256",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    for name in ["transformed.json", "scaled.json"] {
        let a = fs::read(d1.path().join(name)).unwrap();
        let b = fs::read(d2.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between reruns");
    }
}

#[test]
fn small_invariant_suite_passes_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.cfg");
    fs::write(&cfg, "energies = 2\noffsets = -1, 1\nt0 = 2\nn = 256\n").unwrap();
    let out = run(&[
        "invariants",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("overall: PASS"));
    let json = fs::read_to_string(dir.path().join("invariants.json")).unwrap();
    assert!(json.contains("\"pass\": true"));
}

#[test]
fn residual_ladder_passes_at_reduced_size() {
    let out = run(&["residual", "--N", "256", "--threads", "2"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("overall: PASS"));
}

#[test]
fn evolve_command_crosses_breaking_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "evolve",
        "--dt",
        "5e-3",
        "--N",
        "256",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    let json = fs::read_to_string(dir.path().join("evolve.json")).unwrap();
    assert!(json.contains("\"pass\": true"));
}
