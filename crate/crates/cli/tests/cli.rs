//! End-to-end checks of the binary: exit codes, key outputs, artifact files
//! and the instance round trip.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_svf-bench"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

const EXP5: &str = r#"{"omega": 1.0, "patients": [
  {"dist": "exponential", "rate": 5},
  {"dist": "exponential", "rate": 4},
  {"dist": "exponential", "rate": 3},
  {"dist": "exponential", "rate": 2},
  {"dist": "exponential", "rate": 1}
]}"#;

#[test]
fn ratio_mean_matches_table_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp5.json");
    write(&path, EXP5);
    let out = bin().args(["ratio", "--mode", "mean", "-i"]).arg(&path).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("best sequence: 2,1,3,4,5"), "{text}");
    assert!(text.contains("ratio: 1.000342"), "{text}");
}

#[test]
fn eval_deterministic_instance_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("det.json");
    write(
        &path,
        r#"{"omega": 0.5, "patients": [{"dist": "point", "value": 2}, {"dist": "point", "value": 5}]}"#,
    );
    let out = bin().args(["eval", "--schedule", "mean", "-i"]).arg(&path).output().unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("objective (omega=0.5): 0.000000000"));
}

#[test]
fn reproduce_example3_writes_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["reproduce", "example3", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("ratio 1.0787"), "{}", stdout(&out));
    let csv = std::fs::read_to_string(dir.path().join("example3.csv")).unwrap();
    assert!(csv.starts_with("# seed=na"));
    assert!(csv.contains("1.078652"));
}

#[test]
fn out_dir_env_var_respected() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["reproduce", "example2"])
        .env("SVF_BENCH_OUT", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("example2.csv").exists());
}

#[test]
fn validation_and_cap_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    write(&bad, r#"{"omega": 2.0, "patients": [{"dist": "point", "value": 1}]}"#);
    let out = bin().args(["svf", "-i"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let nine = dir.path().join("nine.json");
    let patients: Vec<String> = (2..=10)
        .map(|hi| format!(r#"{{"dist": "twopoint", "lo": 0, "hi": {hi}, "p_hi": 0.5}}"#))
        .collect();
    write(
        &nine,
        &format!(r#"{{"omega": 0.5, "patients": [{}]}}"#, patients.join(",")),
    );
    let out = bin()
        .args(["search", "--no-prune", "-i"])
        .arg(&nine)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn dump_instance_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("inst.json");
    write(
        &src,
        r#"{"omega": 0.75, "patients": [
            {"dist": "lognormal_meansd", "mean": 15.5, "sd": 5.038},
            {"dist": "exponential", "rate": 2, "negate": true, "shift": 1.5},
            {"dist": "discrete", "step": 0.5, "offset": -2, "probs": [0.25, 0.5, 0.25]}
        ]}"#,
    );
    let dumped = dir.path().join("dumped.json");
    let out = bin()
        .args(["svf", "-i"])
        .arg(&src)
        .arg("--dump-instance")
        .arg(&dumped)
        .output()
        .unwrap();
    assert!(out.status.success());
    let out2 = bin()
        .args(["svf", "-i"])
        .arg(&dumped)
        .arg("--dump-instance")
        .arg(dir.path().join("dumped2.json"))
        .output()
        .unwrap();
    assert!(out2.status.success());
    // A dumped instance re-parses to the identical canonical form.
    let a = std::fs::read_to_string(&dumped).unwrap();
    let b = std::fs::read_to_string(dir.path().join("dumped2.json")).unwrap();
    assert_eq!(a, b);
    // SVF order identical through the round trip.
    let svf_line = |o: &Output| {
        stdout(o)
            .lines()
            .find(|l| l.starts_with("svf sequence"))
            .map(String::from)
    };
    assert_eq!(svf_line(&out), svf_line(&out2));
}

#[test]
fn schedule_opt_refuses_omega_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp5.json");
    write(&path, EXP5);
    let out = bin()
        .args(["schedule-opt", "--schedule", "opt-continuous", "-i"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("degenerate"), "{err}");
}

#[test]
fn bounds_subcommand_reports() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ln.json");
    write(
        &path,
        r#"{"omega": 0.5, "patients": [
            {"dist": "lognormal_meansd", "mean": 15.5, "sd": 5.038},
            {"dist": "lognormal_meansd", "mean": 19.09, "sd": 6.85},
            {"dist": "lognormal_meansd", "mean": 19.09, "sd": 6.85}
        ]}"#,
    );
    let out = bin()
        .args(["bounds", "--which", "t9", "-i"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("lognormal-multiplicative,2.88"), "{text}");

    let out = bin()
        .args(["bounds", "--which", "envelope", "-i"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(stdout(&out).contains("envelope,4.0"), "{}", stdout(&out));
}
