use std::process::{Command, Output};

use rsa_cegd::harness::AttackReport;

fn cegd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cegd"))
        .args(args)
        .env_remove("CEGD_SEED")
        .output()
        .unwrap()
}

#[test]
fn replay_run_writes_unfair_for_b() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("replay.jsonl");
    let out = cegd(&[
        "run",
        "--mode",
        "replay",
        "--bits",
        "512",
        "--seed",
        "7",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&path).unwrap();
    let last: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(last["record"], "verdict");
    assert_eq!(last["verdict"], "UNFAIR_FOR_B");
    let verify = cegd(&["verify-transcript", path.to_str().unwrap()]);
    assert_eq!(verify.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&verify.stdout).contains("UNFAIR_FOR_B"));
}

#[test]
fn identical_arguments_give_identical_output() {
    let args = [
        "run",
        "--mode",
        "eoo-forward",
        "--bits",
        "256",
        "--seed",
        "42",
    ];
    let a = cegd(&args);
    let b = cegd(&args);
    assert_eq!(a.status.code(), Some(0));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    let other = cegd(&[
        "run",
        "--mode",
        "eoo-forward",
        "--bits",
        "256",
        "--seed",
        "43",
    ]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn seed_falls_back_to_environment() {
    let with_flag = cegd(&[
        "run",
        "--mode",
        "honest",
        "--bits",
        "64",
        "--exponent",
        "3",
        "--seed",
        "9",
    ]);
    let with_env = Command::new(env!("CARGO_BIN_EXE_cegd"))
        .args(["run", "--mode", "honest", "--bits", "64", "--exponent", "3"])
        .env("CEGD_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(with_env.status.code(), Some(0));
    assert_eq!(with_flag.stdout, with_env.stdout);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &[][..],
        &["run", "--mode", "honest"][..],
        &["run", "--mode", "nope", "--seed", "1"][..],
        &["run", "--mode", "honest", "--seed", "1", "--bits", "8"][..],
        &["run", "--mode", "honest", "--seed", "1", "--exponent", "4"][..],
        &["keygen", "--bits", "64", "--exponent", "1", "--seed", "1"][..],
        &["verify-transcript"][..],
        &["frobnicate"][..],
    ] {
        assert_eq!(cegd(args).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(cegd(&["--help"]).status.code(), Some(0));
}

#[test]
fn keygen_prints_hex_record() {
    let out = cegd(&[
        "keygen",
        "--bits",
        "128",
        "--exponent",
        "65537",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["e"], "10001");
    let n = num_bigint::BigUint::parse_bytes(v["n"].as_str().unwrap().as_bytes(), 16).unwrap();
    let p = num_bigint::BigUint::parse_bytes(v["p"].as_str().unwrap().as_bytes(), 16).unwrap();
    let q = num_bigint::BigUint::parse_bytes(v["q"].as_str().unwrap().as_bytes(), 16).unwrap();
    assert_eq!(n.bits(), 128);
    assert_eq!(p * q, n);
}

#[test]
fn verify_transcript_failures_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.jsonl");
    assert_eq!(
        cegd(&["verify-transcript", missing.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );

    let garbage = dir.path().join("garbage.jsonl");
    std::fs::write(&garbage, "{\"record\":\"nonsense\"}\n").unwrap();
    assert_eq!(
        cegd(&["verify-transcript", garbage.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );

    let run = cegd(&[
        "run",
        "--mode",
        "honest",
        "--bits",
        "64",
        "--exponent",
        "3",
        "--seed",
        "1",
    ]);
    let text = String::from_utf8(run.stdout).unwrap();
    let truncated = dir.path().join("truncated.jsonl");
    let without_verdict: Vec<&str> = text
        .lines()
        .filter(|l| !l.contains("\"record\":\"verdict\""))
        .collect();
    std::fs::write(&truncated, without_verdict.join("\n")).unwrap();
    assert_eq!(
        cegd(&["verify-transcript", truncated.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );

    let mut report = AttackReport::from_jsonl(&text).unwrap();
    report.evidence.clear();
    let emptied = dir.path().join("emptied.jsonl");
    std::fs::write(&emptied, report.to_jsonl()).unwrap();
    // Evidence and verdict still agree (FAIR), so only message checks apply.
    assert_eq!(
        cegd(&["verify-transcript", emptied.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );

    report.transcript.remove(1);
    let gapped = dir.path().join("gapped.jsonl");
    std::fs::write(&gapped, report.to_jsonl()).unwrap();
    let out = cegd(&["verify-transcript", gapped.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
}
