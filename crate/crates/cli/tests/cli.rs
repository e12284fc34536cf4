//! End-to-end runs of the `symcap` binary.

use std::process::{Command, Output};

use serde_json::Value;

fn symcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symcap"))
        .args(args)
        .env_remove("SYMCAP_HBAR")
        .env_remove("SYMCAP_TOL")
        .env_remove("SYMCAP_SEED")
        .env_remove("SYMCAP_SAMPLES")
        .env_remove("SYMCAP_FORMAT")
        .env_remove("SYMCAP_OUT")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn ball_capacity() {
    let out = symcap(&["capacity", "--region", r#"{"variant":"Ball","R":1}"#]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["value"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-15);
    assert_eq!(v["exact"], Value::Bool(true));
}

#[test]
fn squeeze_batch_has_no_violations() {
    let out = symcap(&["squeeze", "--n", "3", "--trials", "1000", "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["violations"], 0);
}

#[test]
fn oscillator_levels() {
    let out = symcap(&[
        "ebk",
        "--K",
        "oscillator:1,2",
        "--maslov",
        "2,2",
        "--Nmax",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let mut e: Vec<f64> = v["levels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l["energy"].as_f64().unwrap())
        .collect();
    e.sort_by(f64::total_cmp);
    assert_eq!(e, vec![1.5, 2.5, 3.5, 4.5]);
    assert_eq!(v["ground_bound"].as_f64(), Some(1.5));

    let csv = symcap(&[
        "ebk",
        "--K",
        "oscillator:1,2",
        "--maslov",
        "2,2",
        "--Nmax",
        "1",
        "--format",
        "csv",
    ]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("N1,N2,I1,I2,R1,R2,energy,capacity,satisfied\n"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn odd_maslov_fails_the_capacity_condition() {
    let out = symcap(&["ebk", "--K", "power:1", "--maslov", "1", "--Nmax", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["levels"][0]["satisfied"], Value::Bool(false));
}

#[test]
fn spectrum_and_flow() {
    let h = r#"{"n":1,"rows":[[4,0],[0,1]]}"#;
    let out = symcap(&["spectrum", "--hessian", h]);
    assert_eq!(out.status.code(), Some(0));
    assert!((json(&out)["mu"][0].as_f64().unwrap() - 2.0).abs() < 1e-12);

    let period = std::f64::consts::PI.to_string();
    let out = symcap(&["flow", "--hessian", h, "--t", &period, "--point", "[1,0]"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let img: Vec<f64> = v["image"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!((img[0] - 1.0).abs() < 1e-10 && img[1].abs() < 1e-10);
    assert!(v["energy_drift"].as_f64().unwrap() < 1e-10);
}

#[test]
fn torus_cycle_index() {
    let out = symcap(&[
        "maslov",
        "--torus",
        "1,2",
        "--cycle",
        "2",
        "--transport",
        "--seed",
        "9",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["index"], 2);
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(symcap(&["teleport"]).status.code(), Some(2));
    assert_eq!(symcap(&[]).status.code(), Some(2));
    assert_eq!(
        symcap(&["capacity", "--region", r#"{"variant":"Cube"}"#])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        symcap(&["ebk", "--K", "oscillator:1", "--maslov", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        symcap(&["squeeze", "--n", "2", "--hbar", "-1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn env_overrides_yield_to_flags() {
    let run = |env: &str, extra: &[&str]| {
        let mut args = vec!["ebk", "--K", "oscillator:1", "--maslov", "2", "--Nmax", "0"];
        args.extend_from_slice(extra);
        let out = Command::new(env!("CARGO_BIN_EXE_symcap"))
            .args(&args)
            .env("SYMCAP_HBAR", env)
            .output()
            .unwrap();
        json(&out)["levels"][0]["energy"].as_f64().unwrap()
    };
    assert_eq!(run("2", &[]), 1.0);
    assert_eq!(run("2", &["--hbar", "4"]), 2.0);
}

#[test]
fn selftest_contract() {
    let out = symcap(&["selftest"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert_eq!(json(&out)["passed"], Value::Bool(true));

    let strict = symcap(&["selftest", "--tol", "1e-18", "--samples", "20000"]);
    assert_eq!(strict.status.code(), Some(1));
    assert_eq!(json(&strict)["passed"], Value::Bool(false));

    let a = symcap(&["selftest", "--seed", "5", "--samples", "20000"]);
    let b = symcap(&["selftest", "--seed", "5", "--samples", "20000"]);
    assert_eq!(a.stdout, b.stdout);
}
