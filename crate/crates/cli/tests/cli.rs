use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_serfati-flows")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn sine_run(out: &Path) -> Output {
    cli(&[
        "sqg-run", "--init", "sine", "--grid", "32", "--T", "0.0625", "--output-every", "2",
        "--out", out.to_str().unwrap(),
    ])
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&cli(&["frobnicate"])), 2);
    assert_eq!(code(&cli(&["verify", "no-such-suite"])), 2);
    assert_eq!(code(&cli(&["sqg-run", "--init", "spiral", "--out", "x"])), 2);

    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, "{ \"version\": 1, \"colour\": 3 }").unwrap();
    let o = cli(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn invalid_thread_cap_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_serfati-flows"))
        .args(["verify", "--list"])
        .env("SERFATI_FLOWS_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn listing_suites_succeeds() {
    let o = cli(&["verify", "--list"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    for name in ["partition", "picard", "initial-data"] {
        assert!(text.contains(name), "{text}");
    }
}

#[test]
fn run_then_verify_the_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sine");
    let o = sine_run(&out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let first = fs::read_to_string(out.join("verdicts.json")).unwrap();

    let json = tmp.path().join("v.json");
    let o = cli(&["verify", "--rundir", out.to_str().unwrap(), "--json", json.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let a: serde_json::Value = serde_json::from_str(&first).unwrap();
    let b: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    let strip = |v: &serde_json::Value| {
        v.as_array()
            .unwrap()
            .iter()
            .map(|x| (x["anchor"].clone(), x["pass"].clone(), x["measured"].clone()))
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&a), strip(&b));

    let theta = out.join("fields/0000_theta.sfld");
    let o = cli(&["analyze", theta.to_str().unwrap(), "--norm", "l2ul"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["value"].as_f64().unwrap() > 0.0, "{v}");
}

#[test]
fn a_recorded_solver_failure_fails_verification() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sine");
    assert_eq!(code(&sine_run(&out)), 0);
    let manifest = out.join("run.json");
    let mut m: serde_json::Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    m["error"] = "non-finite values at t = 0.03".into();
    fs::write(&manifest, m.to_string()).unwrap();
    let o = cli(&["verify", "--rundir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}
