//! The installed binary's exit-code contract.

use std::process::Command;

fn mlosc(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_mlosc"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
    )
}

#[test]
fn success_prints_the_resolved_config() {
    let (code, text) = mlosc(&["ml", "--alpha", "1", "--beta", "1", "--z", "1", "0"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["command"], "ml");
    assert_eq!(v["config"]["globals"]["seed"], 0);
    assert_eq!(v["result"]["re"].as_f64().unwrap(), 2.7182818284590455);
}

#[test]
fn invalid_input_exits_two() {
    assert_eq!(
        mlosc(&["ml", "--alpha", "0", "--beta", "1", "--z", "1", "0"]).0,
        2
    );
    assert_eq!(mlosc(&["classify", "1", "2"]).0, 2);
    assert_eq!(mlosc(&["bogus"]).0, 2);
    assert_eq!(mlosc(&["--tol", "-1", "classify", "0", "1", "0", "0"]).0, 2);
}

#[test]
fn ill_conditioned_classification_exits_three() {
    assert_eq!(mlosc(&["classify", "0", "1", "0", "1e-8"]).0, 3);
}

#[test]
fn failed_verdict_exits_one() {
    // ratios with ρ = 1/2 creep upward towards their limit on [1, 1e3]
    let (code, text) = mlosc(&[
        "decay",
        "--class",
        "dinf",
        "--lambda-max",
        "1e3",
        "--points-per-decade",
        "3",
    ]);
    assert_eq!(code, 1);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["result"]["verdict"]["pass"], false);
}

#[test]
fn fault_injection_fails_the_selftest() {
    let (code, text) = mlosc(&["selftest", "--fault", "exponent-table"]);
    assert_eq!(code, 1);
    assert!(text.contains("\"pass\": false"));
}
