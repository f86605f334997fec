//! End-to-end checks of the binary: exit codes, file schemas, determinism.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qpq-dimtest"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("qpq_dimtest_cli_it");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn figure1_rows_and_determinism() {
    let out = tmp("fig1.csv");
    let status = bin().args(["figure1", "--out"]).arg(&out).status().unwrap();
    assert!(status.success());
    let first = std::fs::read(&out).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# schema=figure1"));
    assert_eq!(
        lines.next().unwrap(),
        "theta,p_qubit_qubit,p_qubit_qutrit,p_qubit_qubit_born,p_qubit_qutrit_born"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 101);
    assert_eq!((rows[0][0], rows[0][1], rows[0][2]), (0.0, 0.0, 1.0));
    let last = rows.last().unwrap();
    assert!((last[1] - 0.5).abs() < 1e-12 && last[2].abs() < 1e-12);

    // rerun is byte-identical
    let status = bin().args(["figure1", "--out"]).arg(&out).status().unwrap();
    assert!(status.success());
    assert_eq!(std::fs::read(&out).unwrap(), first);
}

#[test]
fn figure2_json_records_carry_schema_version() {
    let out = tmp("fig2.json");
    let status = bin()
        .args(["figure2", "--format", "json", "--theta-step", "0.5", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for line in std::fs::read_to_string(&out).unwrap().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["classical_bound"], 0.75);
    }
}

#[test]
fn verify_passes_and_reports_flagged_entry() {
    let output = bin()
        .args(["verify", "--theta-step", "0.1"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("AppendixA"));
    assert!(text.contains("status: pass"));
    assert!(text.contains("classical bound: 0.75"));
}

#[test]
fn verify_fails_on_injected_defect() {
    let output = bin()
        .args(["verify", "--theta-step", "0.1", "--inject-defect"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("status: fail"));
}

#[test]
fn certify_exit_codes_and_byte_identical_reruns() {
    let out = tmp("verdict.json");
    let run = |family: &str| {
        bin()
            .args([
                "certify", "--family", family, "--n", "10000", "--seed", "1", "--out",
            ])
            .arg(&out)
            .status()
            .unwrap()
            .code()
    };
    assert_eq!(run("same-subspace"), Some(0));
    let first = std::fs::read(&out).unwrap();
    let v: serde_json::Value = serde_json::from_str(std::str::from_utf8(&first).unwrap()).unwrap();
    assert_eq!(v["decision"], "PROCEED");
    assert_eq!(v["schema_version"], 1);
    assert_eq!(run("same-subspace"), Some(0));
    assert_eq!(std::fs::read(&out).unwrap(), first);

    assert_eq!(run("product"), Some(2));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["decision"], "ABORT");
}

#[test]
fn config_file_is_read_and_flags_override() {
    let cfg = tmp("certify.cfg");
    std::fs::write(&cfg, "family=product\ntheta=0.785398163\nn=10000\nseed=4\n").unwrap();
    let code = bin()
        .args(["certify", "--config"])
        .arg(&cfg)
        .args(["--family", "same-subspace"])
        .status()
        .unwrap()
        .code();
    assert_eq!(code, Some(0)); // flag overrides product -> honest supply
    let code = bin()
        .args(["certify", "--config"])
        .arg(&cfg)
        .status()
        .unwrap()
        .code();
    assert_eq!(code, Some(2));
}

#[test]
fn bad_arguments_exit_nonzero() {
    let code = bin()
        .args(["certify", "--family", "nonsense"])
        .status()
        .unwrap()
        .code();
    assert_eq!(code, Some(1));
    let code = bin()
        .args(["figure1", "--theta-step", "0"])
        .status()
        .unwrap()
        .code();
    assert_eq!(code, Some(1));
}
