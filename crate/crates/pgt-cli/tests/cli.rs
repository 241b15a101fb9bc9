//! End-to-end tests of the `pgt` binary: exit-code contract, report shape,
//! and byte-level reproducibility of JSON reports.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn pgt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pgt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn check_pass_fail_and_gates() {
    let out = pgt(&[
        "check",
        &fixture("cournot3.json"),
        "--method",
        "pairwise",
        "--tol",
        "1e-9",
        "--samples",
        "500",
        "--seed",
        "42",
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("pass (sampled)"));

    let out = pgt(&["check", &fixture("pennies.json"), "--method", "cycle4"]);
    assert_eq!(exit_code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("fail"));
    assert!(text.contains("four_cycle"), "witness cycle printed: {text}");
    assert!(text.contains("8"));

    // [0, 10] boxes are not symmetric: the pairwise gate rejects them
    let out = pgt(&["check", &fixture("unit_box.json"), "--method", "pairwise"]);
    assert_eq!(exit_code(&out), 3);

    // every method answers on the quantity game
    for method in ["cycle4", "hp", "hessian"] {
        let out = pgt(&["check", &fixture("cournot3.json"), "--method", method]);
        assert_eq!(exit_code(&out), 0, "method {method}");
    }

    let out = pgt(&["check", &fixture("pennies.json"), "--method", "oracle"]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn usage_and_schema_errors_exit_2() {
    let out = pgt(&["check", "no-such-file.json", "--method", "cycle4"]);
    assert_eq!(exit_code(&out), 2);

    let out = pgt(&[
        "check",
        &fixture("broken_schema.json"),
        "--method",
        "cycle4",
    ]);
    assert_eq!(exit_code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(
        err.contains("costs.exprs[1]"),
        "schema path reported: {err}"
    );

    // unknown flag is a clap usage error
    let out = pgt(&["check", &fixture("pennies.json"), "--method", "nope"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn construct_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let phi_path = dir.path().join("phi.json");
    let out = pgt(&[
        "construct",
        &fixture("cournot4.json"),
        "--method",
        "theorem8",
        "--verify",
        "--out",
        phi_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stdout(&out));
    let exported = std::fs::read_to_string(&phi_path).unwrap();
    assert!(exported.contains("\"kind\": \"expr\""));

    // the exported potential verifies in exact and gradient modes
    for mode in ["exact", "gradient"] {
        let out = pgt(&[
            "verify",
            &fixture("cournot4.json"),
            "--potential",
            phi_path.to_str().unwrap(),
            "--mode",
            mode,
        ]);
        assert_eq!(exit_code(&out), 0, "mode {mode}: {}", stdout(&out));
    }

    // the reflection construction agrees
    let out = pgt(&[
        "construct",
        &fixture("cournot3.json"),
        "--method",
        "theorem5",
        "--verify",
    ]);
    assert_eq!(exit_code(&out), 0);

    // constructing on a gate-violating game exits 3
    let out = pgt(&[
        "construct",
        &fixture("unit_box.json"),
        "--method",
        "theorem5",
    ]);
    assert_eq!(exit_code(&out), 3);
}

#[test]
fn congestion_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let phi_path = dir.path().join("rosenthal.json");
    let out = pgt(&[
        "construct",
        &fixture("congestion2.json"),
        "--method",
        "rosenthal",
        "--verify",
        "--out",
        phi_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stdout(&out));
    let exported = std::fs::read_to_string(&phi_path).unwrap();
    assert!(exported.contains("\"kind\": \"table\""));

    let out = pgt(&["check", &fixture("congestion2.json"), "--method", "oracle"]);
    assert_eq!(exit_code(&out), 0);

    let out = pgt(&["nash", &fixture("congestion2.json")]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("profile"), "{text}");
}

#[test]
fn ordinal_checks() {
    let out = pgt(&[
        "ordinal",
        &fixture("power_pair.json"),
        "--check",
        "assumption1",
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stdout(&out));

    let out = pgt(&[
        "ordinal",
        &fixture("power_pair.json"),
        "--check",
        "crosssign",
    ]);
    assert_eq!(exit_code(&out), 0);

    let out = pgt(&[
        "ordinal",
        &fixture("power_pair.json"),
        "--check",
        "theorem11",
        "--candidate",
        &fixture("candidate_sqrt.json"),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stdout(&out));

    let out = pgt(&[
        "ordinal",
        &fixture("power_pair_wide.json"),
        "--check",
        "theorem12",
        "--candidate",
        &fixture("candidate_scaled.json"),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stdout(&out));

    let out = pgt(&[
        "ordinal",
        &fixture("quadratic.json"),
        "--check",
        "theorem10",
        "--candidate",
        &fixture("candidate_quadratic.json"),
        "--eta",
        "2,2",
        "--lipschitz",
        "2",
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stdout(&out));

    // an oversized Lipschitz claim breaks the scalar condition
    let out = pgt(&[
        "ordinal",
        &fixture("quadratic.json"),
        "--check",
        "theorem10",
        "--candidate",
        &fixture("candidate_quadratic.json"),
        "--eta",
        "2,2",
        "--lipschitz",
        "5",
    ]);
    assert_eq!(exit_code(&out), 1);

    // estimation kicks in when the constants are not supplied
    let out = pgt(&[
        "ordinal",
        &fixture("quadratic.json"),
        "--check",
        "theorem10",
        "--candidate",
        &fixture("candidate_quadratic.json"),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("estimate"));

    // theorem12 without alphas is a usage error
    let out = pgt(&[
        "ordinal",
        &fixture("power_pair.json"),
        "--check",
        "theorem12",
        "--candidate",
        &fixture("candidate_sqrt.json"),
    ]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn dynamics_and_abnormal() {
    let dir = tempfile::tempdir().unwrap();
    let traj_path = dir.path().join("trajectory.json");
    let out = pgt(&[
        "dynamics",
        &fixture("pennies.json"),
        "--start",
        "0,0",
        "--max-steps",
        "50",
        "--out",
        traj_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 1);
    assert!(stdout(&out).contains("cycle_detected"));
    let trajectory: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&traj_path).unwrap()).unwrap();
    assert_eq!(trajectory["outcome"]["kind"], "cycle_detected");
    assert_eq!(trajectory["steps"].as_array().unwrap().len(), 5);

    let out = pgt(&["abnormal", &fixture("abnormal.json")]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("abnormal (player 1)"));

    let out = pgt(&["abnormal", &fixture("cournot3.json")]);
    assert_eq!(exit_code(&out), 1);
    assert!(stdout(&out).contains("not abnormal"));
}

#[test]
fn json_reports_are_reproducible() {
    let strip_timing = |text: &str| -> String {
        text.lines()
            .filter(|l| !l.contains("timing_ms"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    for args in [
        vec![
            "check",
            "cournot3.json",
            "--method",
            "pairwise",
            "--seed",
            "7",
            "--json",
        ],
        vec!["check", "pennies.json", "--method", "cycle4", "--json"],
        vec![
            "ordinal",
            "power_pair.json",
            "--check",
            "assumption1",
            "--seed",
            "3",
            "--json",
        ],
    ] {
        let mut full: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        full[1] = fixture(&full[1]);
        let refs: Vec<&str> = full.iter().map(|s| s.as_str()).collect();
        let first = pgt(&refs);
        let second = pgt(&refs);
        assert_eq!(
            strip_timing(&stdout(&first)),
            strip_timing(&stdout(&second)),
            "non-reproducible report for {args:?}"
        );
        // a valid JSON object with the report fields
        let value: serde_json::Value = serde_json::from_str(&stdout(&first)).unwrap();
        for key in [
            "method",
            "verdict",
            "residual_max",
            "samples_used",
            "exhaustive",
        ] {
            assert!(value.get(key).is_some(), "missing {key}");
        }
    }
}
