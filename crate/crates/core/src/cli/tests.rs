use super::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

/// Runs the CLI with `--out` into a temp file; returns (exit code, output).
fn invoke(args: &[&str]) -> (i32, String) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let mut argv = vec!["mlosc", "--out", out.to_str().unwrap()];
    argv.extend_from_slice(args);
    let cli = Cli::try_parse_from(argv).unwrap();
    let code = run(&cli);
    (code, std::fs::read_to_string(&out).unwrap_or_default())
}

fn json(args: &[&str]) -> (i32, Value) {
    let (code, text) = invoke(args);
    (code, serde_json::from_str(&text).unwrap_or(Value::Null))
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn ml_examples() {
    let (code, v) = json(&["ml", "--alpha", "1", "--beta", "1", "--z", "1", "0"]);
    assert_eq!(code, 0);
    assert!((f(&v["result"]["re"]) - std::f64::consts::E).abs() < 1e-14);
    assert_eq!(f(&v["result"]["im"]), 0.0);
    assert_eq!(f(&v["config"]["alpha"]), 1.0);

    let (_, v) = json(&["ml", "--alpha", "2", "--beta", "1", "--z", "-4", "0"]);
    assert!((f(&v["result"]["re"]) - 2f64.cos()).abs() < 1e-13);

    let (_, v) = json(&["ml", "--alpha", "0.5", "--beta", "1", "--z", "0", "30"]);
    let split = crate::mlf::ml_eval_imag(MlParams::new(0.5, 1.0), 30.0, 1.0).unwrap();
    let got = Complex64::new(f(&v["result"]["re"]), f(&v["result"]["im"]));
    assert!((got - split).norm() <= 1e-9 * split.norm());
}

#[test]
fn ml_rejects_bad_parameters() {
    assert_eq!(
        invoke(&["ml", "--alpha", "-1", "--beta", "1", "--z", "1", "0"]).0,
        2
    );
    assert_eq!(
        invoke(&["ml", "--alpha", "0.5", "--beta", "0", "--z", "1", "0"]).0,
        2
    );
    // growth sector
    assert_eq!(
        invoke(&["ml", "--alpha", "0.5", "--beta", "1", "--z", "40", "0"]).0,
        2
    );
}

#[test]
fn classify_examples() {
    let (code, v) = json(&["classify", "0", "1", "0", "0"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["class"], "DInf");
    let (_, v) = json(&["classify", "0", "0", "0", "0"]);
    assert_eq!(v["result"]["class"], "Zero");

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let t = LinearChange::random(&mut rng, 20.0);
    let image = phase::apply_linear_change(&PhaseClass::A2.canonical(), &t).unwrap();
    let c = image.coeffs().map(|x| format!("{x:e}"));
    let (_, v) = json(&["classify", &c[0], &c[1], &c[2], &c[3]]);
    assert_eq!(v["result"]["class"], "A2");
    assert!(f(&v["result"]["residual"]) < 1e-6);
}

#[test]
fn classify_csv_has_one_row() {
    let (code, text) = invoke(&["--format", "csv", "classify", "1", "0", "0", "-1"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# config: "));
    assert_eq!(lines[1], "class,t11,t12,t21,t22,scale");
    assert!(lines[2].starts_with("DInf,") || lines[2].starts_with("D4"));
    assert_eq!(lines.len(), 3);
}

#[test]
fn integrate_from_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.json");
    std::fs::write(
        &path,
        r#"{"alpha": 0.5, "beta": 1, "lambda": 0, "phase": [0, 1, 0, 0],
            "amplitude": {"kind": "constant", "c": 1}, "tol": 1e-9}"#,
    )
    .unwrap();
    let (code, v) = json(&["integrate", path.to_str().unwrap(), "--majorant"]);
    assert_eq!(code, 0);
    assert_eq!(f(&v["result"]["value"]["re"]), 1.0);
    assert_eq!(f(&v["result"]["value"]["im"]), 0.0);
    assert!(f(&v["result"]["majorant"]) >= 1.0);
    assert_eq!(f(&v["config"]["tol"]), 1e-9);

    // flags override the file
    let (_, v) = json(&["--tol", "1e-6", "integrate", path.to_str().unwrap()]);
    assert_eq!(f(&v["config"]["tol"]), 1e-6);
    assert_eq!(v["result"]["majorant"], Value::Null);
}

#[test]
fn integrate_budget_and_bad_specs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.json");
    std::fs::write(
        &path,
        r#"{"alpha": 1, "beta": 1, "lambda": 1e5, "phase": [0, 1, 0, 1],
            "amplitude": {"kind": "constant", "c": 1}}"#,
    )
    .unwrap();
    let (code, v) = json(&["integrate", path.to_str().unwrap(), "--max-cells", "5"]);
    assert_eq!(code, 3);
    assert_eq!(v["result"]["budget_exceeded"], true);

    std::fs::write(&path, r#"{"alpha": 1.5, "beta": 1, "lambda": 1, "phase": [0, 1, 0, 0], "amplitude": {"kind": "constant", "c": 1}}"#)
        .unwrap();
    assert_eq!(invoke(&["integrate", path.to_str().unwrap()]).0, 2);
    std::fs::write(&path, "{not json").unwrap();
    assert_eq!(invoke(&["integrate", path.to_str().unwrap()]).0, 2);
    assert_eq!(invoke(&["integrate", "/nonexistent/spec.json"]).0, 2);
}

#[test]
fn decay_outputs() {
    let base = [
        "decay",
        "--class",
        "a2",
        "--alpha",
        "1",
        "--beta",
        "1",
        "--lambda-max",
        "1e3",
        "--points-per-decade",
        "3",
    ];
    let (code, v) = json(&base);
    assert!(code == 0 || code == 1);
    assert_eq!(code == 0, v["result"]["verdict"]["pass"].as_bool().unwrap());
    let report: DecayReport = serde_json::from_value(v["result"].clone()).unwrap();
    assert_eq!(report.lambda_grid.len(), 10);
    assert!(report.fitted_slope > 0.28);

    let mut args = vec!["--format", "csv"];
    args.extend_from_slice(&base);
    let (_, text) = invoke(&args);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# config: {"));
    assert_eq!(lines[1], "lambda,re_I,im_I,abs_I,bound_ratio");
    assert_eq!(lines.len(), 12);
}

#[test]
fn decay_config_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.json");
    let mut cfg = ScanConfig::new(
        PhaseClass::DInf,
        MlParams::new(0.75, 2.0),
        AmplitudeSpec::constant(3.0),
    );
    cfg.lambda_max = 1e4;
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let cli = Cli::try_parse_from([
        "mlosc",
        "decay",
        "--config",
        path.to_str().unwrap(),
        "--beta",
        "1",
        "--p",
        "inf",
    ])
    .unwrap();
    let Command::Decay(args) = &cli.command else {
        panic!()
    };
    let got = resolve_scan(args, Some(1e-5)).unwrap();
    assert_eq!(got.params, MlParams::new(0.75, 1.0));
    assert_eq!(got.amplitude, AmplitudeSpec::constant(3.0));
    assert_eq!((got.lambda_max, got.tol), (1e4, 1e-5));

    let cli = Cli::try_parse_from([
        "mlosc",
        "decay",
        "--class",
        "dinf",
        "--amplitude",
        "power-singular",
        "--gamma1",
        "0.25",
        "--gamma2",
        "0.25",
        "--p",
        "2",
    ])
    .unwrap();
    let Command::Decay(args) = &cli.command else {
        panic!()
    };
    let got = resolve_scan(args, None).unwrap();
    assert_eq!(
        got.amplitude,
        AmplitudeSpec::power_singular(0.25, 0.25, [0.0, 0.0], 2.0)
    );

    // γp ≥ 1 is not in L^p
    let cli = Cli::try_parse_from([
        "mlosc",
        "decay",
        "--class",
        "dinf",
        "--amplitude",
        "power-singular",
        "--gamma1",
        "0.6",
        "--p",
        "2",
    ])
    .unwrap();
    let Command::Decay(args) = &cli.command else {
        panic!()
    };
    assert!(matches!(
        resolve_scan(args, None),
        Err(Error::DivergentNorm(_))
    ));
}

#[test]
fn decay_invalid_inputs() {
    assert_eq!(
        invoke(&["decay", "--class", "a2", "--lambda-max", "50"]).0,
        2
    );
    assert_eq!(invoke(&["decay", "--class", "zero"]).0, 2);
    assert_eq!(invoke(&["decay"]).0, 2);
    assert!(Cli::try_parse_from(["mlosc", "decay", "--class", "a7"]).is_err());
}

#[test]
fn fault_injection_is_detected() {
    let clean = selftest::run(0, None);
    let faulty = selftest::run(0, Some(selftest::Fault::ExponentTable));
    assert!(clean.pass, "{clean:?}");
    assert!(!faulty.pass);
    let failed: Vec<&str> = faulty
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.as_str())
        .collect();
    assert_eq!(failed, ["exponent table"]);
}

#[test]
fn thread_count_does_not_change_output() {
    let base = [
        "decay",
        "--class",
        "d4minus",
        "--lambda-max",
        "1e3",
        "--points-per-decade",
        "3",
    ];
    let mut one = vec!["--threads", "1"];
    one.extend_from_slice(&base);
    let mut four = vec!["--threads", "4"];
    four.extend_from_slice(&base);
    let (a, b) = (json(&one).1, json(&four).1);
    assert_eq!(a["result"], b["result"]);
    assert_eq!(
        invoke(&["--threads", "0", "classify", "0", "1", "0", "0"]).0,
        2
    );
}
