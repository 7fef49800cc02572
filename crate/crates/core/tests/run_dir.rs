use std::fs;
use std::path::Path;

use serfati_core::harness::rundir::{read_manifest, read_monitor_csv};
use serfati_core::harness::{self, evaluate_run_dir, verify, Experiment, InitSpec, RunConfig};
use serfati_core::{fieldio, Error};

fn small_sqg(dir: &Path, init: InitSpec) -> RunConfig {
    let mut c = RunConfig::default_for(Experiment::Sqg);
    c.grid.n = 64;
    c.time.t_end = 0.125;
    c.init = init;
    c.seed = 11;
    c.out_dir = dir.to_path_buf();
    c
}

#[test]
fn identical_configs_give_identical_monitor_files() {
    let tmp = tempfile::tempdir().unwrap();
    let a = small_sqg(&tmp.path().join("a"), InitSpec::Random(None));
    let b = small_sqg(&tmp.path().join("b"), InitSpec::Random(None));
    harness::run(&a).unwrap();
    harness::run(&b).unwrap();
    let read = |c: &RunConfig| fs::read(c.out_dir.join("monitors.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    let theta = |c: &RunConfig| fieldio::read_scalar(&c.out_dir.join("fields/0002_theta.sfld")).unwrap();
    assert_eq!(theta(&a).values(), theta(&b).values());
}

#[test]
fn verify_reproduces_run_verdicts_without_recomputing() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_sqg(&tmp.path().join("r"), InitSpec::Random(Some(3)));
    let outcome = harness::run(&cfg).unwrap();
    assert!(harness::all_pass(&outcome.verdicts), "{:#?}", outcome.verdicts);
    let manifest = read_manifest(&outcome.dir).unwrap();
    assert_eq!(manifest.times.len(), 3);
    let rows = read_monitor_csv(&outcome.dir.join("monitors.csv")).unwrap();
    assert!(rows.iter().all(|r| r.4 <= 1.05), "{rows:?}");

    let csv = fs::read(outcome.dir.join("monitors.csv")).unwrap();
    fs::remove_file(outcome.dir.join("monitors.csv")).unwrap();
    fs::remove_file(outcome.dir.join("verdicts.json")).unwrap();
    let again = evaluate_run_dir(&outcome.dir).unwrap();
    assert_eq!(again.len(), outcome.verdicts.len());
    assert_eq!(fs::read(outcome.dir.join("monitors.csv")).unwrap(), csv);
    assert!(outcome.dir.join("verdicts.json").exists());
}

#[test]
fn reevaluation_matches_the_original_verdicts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_sqg(&tmp.path().join("s"), InitSpec::Sine);
    let outcome = harness::run(&cfg).unwrap();
    let again = evaluate_run_dir(&outcome.dir).unwrap();
    let key = |v: &harness::Verdict| (v.anchor.clone(), v.pass, v.measured.to_bits(), v.threshold.to_bits());
    assert_eq!(
        outcome.verdicts.iter().map(key).collect::<Vec<_>>(),
        again.iter().map(key).collect::<Vec<_>>()
    );
    assert!(outcome.verdicts.iter().any(|v| v.anchor.contains("steady")));
    assert!(harness::all_pass(&outcome.verdicts), "{:#?}", outcome.verdicts);
}

#[test]
fn euler_shear_run_is_steady() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = RunConfig::default_for(Experiment::Euler3d);
    c.init = InitSpec::Shear;
    c.time.t_end = 0.125;
    c.out_dir = tmp.path().join("e");
    let outcome = harness::run(&c).unwrap();
    assert!(harness::all_pass(&outcome.verdicts), "{:#?}", outcome.verdicts);
    assert!(fs::metadata(outcome.dir.join("verdicts.json")).is_ok());
}

#[test]
fn unknown_suites_are_usage_errors() {
    assert!(matches!(verify("partition,nonsense"), Err(Error::UnknownSuite(s)) if s == "nonsense"));
}
