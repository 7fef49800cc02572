//! Run configuration, run directories and the verification suites.

pub mod config;
pub mod rundir;
pub mod suites;

use serde::{Deserialize, Serialize};
use std::time::Instant;

pub use config::{Experiment, GridConfig, InitSpec, RunConfig, TimeConfig, CONFIG_VERSION};
pub use rundir::{evaluate_run_dir, run, RunOutcome};
pub use suites::{euler3d_check, verify, Euler3dParams, Euler3dSuite, SuiteOutput, SUITE_NAMES};

/// Outcome of one check. `pass` is always `measured ≤ threshold`; a NaN
/// measurement fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub suite: String,
    pub anchor: String,
    pub pass: bool,
    #[serde(with = "nonfinite")]
    pub measured: f64,
    #[serde(with = "nonfinite")]
    pub threshold: f64,
    /// Wall-clock seconds spent producing the measurement.
    pub runtime: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    pub fn new(suite: &str, anchor: &str, measured: f64, threshold: f64, runtime: f64) -> Self {
        Self {
            suite: suite.into(),
            anchor: anchor.into(),
            pass: measured <= threshold,
            measured,
            threshold,
            runtime,
            note: None,
        }
    }

    /// A check that could not be measured, e.g. because the solver stopped.
    pub fn failed(suite: &str, anchor: &str, threshold: f64, runtime: f64, note: String) -> Self {
        let mut v = Self::new(suite, anchor, f64::INFINITY, threshold, runtime);
        v.note = Some(note);
        v
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// One human-readable line.
    pub fn line(&self) -> String {
        let mut s = format!(
            "{} {:<18} {:<44} measured {:.3e} threshold {:.3e} ({:.1}s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.suite,
            self.anchor,
            self.measured,
            self.threshold,
            self.runtime
        );
        if let Some(n) = &self.note {
            s.push_str(" [");
            s.push_str(n);
            s.push(']');
        }
        s
    }
}

/// JSON has no infinities or NaN; those are written as strings instead.
mod nonfinite {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(|_| de::Error::custom(format!("not a number: {t}"))),
        }
    }
}

/// Runs `f` and returns its value with the elapsed seconds.
pub(crate) fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

pub fn all_pass(verdicts: &[Verdict]) -> bool {
    verdicts.iter().all(|v| v.pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flag_follows_the_comparison() {
        assert!(Verdict::new("s", "a", 1.0, 1.0, 0.0).pass);
        assert!(!Verdict::new("s", "a", 1.0 + 1e-15, 1.0, 0.0).pass);
        assert!(!Verdict::new("s", "a", f64::NAN, 1.0, 0.0).pass);
        assert!(!Verdict::failed("s", "a", 1.0, 0.0, "halt".into()).pass);
    }

    #[test]
    fn infinite_measurements_survive_json() {
        let v = Verdict::failed("s", "a", 1.0, 0.5, "halt".into());
        let back: Verdict = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(back, v);
    }
}
