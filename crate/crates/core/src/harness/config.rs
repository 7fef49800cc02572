//! Strict JSON run configuration.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::sqg::SqgMode;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Sqg,
    Euler3d,
}

impl Experiment {
    pub fn dim(self) -> usize {
        match self {
            Experiment::Sqg => 2,
            Experiment::Euler3d => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Points per axis.
    pub n: usize,
    /// The box is `[−half_width, half_width)^d`.
    pub half_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_end: f64,
    pub dt: f64,
}

/// Initial-data descriptor, written as a string: `sine`, `radial`, `shear`,
/// `taylor-green`, `random`, `random:SEED` or `file:PATH`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InitSpec {
    Sine,
    Radial,
    Shear,
    TaylorGreen,
    /// `None` draws from the config seed.
    Random(Option<u64>),
    File(PathBuf),
}

impl FromStr for InitSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "sine" => InitSpec::Sine,
            "radial" => InitSpec::Radial,
            "shear" => InitSpec::Shear,
            "taylor-green" => InitSpec::TaylorGreen,
            "random" => InitSpec::Random(None),
            _ => {
                if let Some(seed) = s.strip_prefix("random:") {
                    let seed = seed
                        .parse()
                        .map_err(|_| Error::Config(format!("bad seed in init descriptor `{s}`")))?;
                    InitSpec::Random(Some(seed))
                } else if let Some(path) = s.strip_prefix("file:") {
                    if path.is_empty() {
                        return Err(Error::Config("empty path in init descriptor".into()));
                    }
                    InitSpec::File(PathBuf::from(path))
                } else {
                    return Err(Error::Config(format!(
                        "unknown init descriptor `{s}` (expected sine, radial, shear, taylor-green, random[:SEED] or file:PATH)"
                    )));
                }
            }
        })
    }
}

impl fmt::Display for InitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitSpec::Sine => f.write_str("sine"),
            InitSpec::Radial => f.write_str("radial"),
            InitSpec::Shear => f.write_str("shear"),
            InitSpec::TaylorGreen => f.write_str("taylor-green"),
            InitSpec::Random(None) => f.write_str("random"),
            InitSpec::Random(Some(s)) => write!(f, "random:{s}"),
            InitSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl TryFrom<String> for InitSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<InitSpec> for String {
    fn from(i: InitSpec) -> String {
        i.to_string()
    }
}

/// Everything needed to reproduce a run. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub experiment: Experiment,
    pub grid: GridConfig,
    pub time: TimeConfig,
    /// Kernel cutoff radius.
    pub lambda: f64,
    /// Hölder exponent of the short-time monitor.
    pub r: f64,
    /// Sobolev index of the uniformly local monitors.
    pub s: usize,
    pub init: InitSpec,
    /// Sup norm of random initial data.
    pub amplitude: f64,
    pub seed: u64,
    /// SQG time stepper; ignored for 3D runs.
    pub mode: SqgMode,
    /// Store a snapshot every this many steps.
    pub output_every: usize,
    pub out_dir: PathBuf,
}

impl RunConfig {
    /// Desk-scale defaults for each experiment.
    pub fn default_for(experiment: Experiment) -> Self {
        match experiment {
            Experiment::Sqg => Self {
                version: CONFIG_VERSION,
                experiment,
                grid: GridConfig {
                    n: 128,
                    half_width: 4.0 * PI,
                },
                time: TimeConfig {
                    t_end: 0.5,
                    dt: 1.0 / 64.0,
                },
                lambda: 1.0,
                r: 1.5,
                s: 3,
                init: InitSpec::Random(None),
                amplitude: 0.5,
                seed: 0,
                mode: SqgMode::Spectral,
                output_every: 4,
                out_dir: PathBuf::from("run-sqg"),
            },
            Experiment::Euler3d => Self {
                version: CONFIG_VERSION,
                experiment,
                grid: GridConfig { n: 16, half_width: PI },
                time: TimeConfig {
                    t_end: 0.25,
                    dt: 1.0 / 32.0,
                },
                lambda: 0.35,
                r: 1.5,
                s: 3,
                init: InitSpec::Random(None),
                amplitude: 0.5,
                seed: 0,
                mode: SqgMode::Spectral,
                output_every: 2,
                out_dir: PathBuf::from("run-euler3d"),
            },
        }
    }

    /// Parses and validates. Syntax and schema errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            Error::Config(format!("line {}, column {}: {}", e.line(), e.column(), strip_position(&e)))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.experiment.dim(), self.grid.half_width, self.grid.n)
            .map_err(|e| Error::Config(format!("grid: {e}")))
    }

    /// Seed used for random initial data.
    pub fn init_seed(&self) -> u64 {
        match self.init {
            InitSpec::Random(Some(s)) => s,
            _ => self.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::Config(format!("field `{field}`: {msg}")));
        if self.version != CONFIG_VERSION {
            return bad("version", format!("unsupported version {} (expected {CONFIG_VERSION})", self.version));
        }
        self.grid()?;
        let t = self.time;
        if !(t.t_end.is_finite() && t.t_end >= 0.0) {
            return bad("time.t_end", format!("must be finite and non-negative, got {}", t.t_end));
        }
        if !(t.dt > 0.0 && t.dt <= 0.1) {
            return bad("time.dt", format!("must lie in (0, 0.1], got {}", t.dt));
        }
        if !(self.lambda > 0.0 && 2.0 * self.lambda <= self.grid.half_width / 4.0) {
            return bad(
                "lambda",
                format!("need 0 < 2·lambda ≤ half_width/4, got lambda = {}", self.lambda),
            );
        }
        if !(self.r > 1.0 && self.r.is_finite()) {
            return bad("r", format!("must exceed 1, got {}", self.r));
        }
        if self.s < 1 {
            return bad("s", "must be at least 1".into());
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return bad("amplitude", format!("must be finite and non-negative, got {}", self.amplitude));
        }
        if self.output_every == 0 {
            return bad("output_every", "must be at least 1".into());
        }
        let allowed = match self.experiment {
            Experiment::Sqg => matches!(
                self.init,
                InitSpec::Sine | InitSpec::Radial | InitSpec::Random(_) | InitSpec::File(_)
            ),
            Experiment::Euler3d => matches!(
                self.init,
                InitSpec::Shear | InitSpec::TaylorGreen | InitSpec::Random(_) | InitSpec::File(_)
            ),
        };
        if !allowed {
            return bad("init", format!("`{}` is not available for this experiment", self.init));
        }
        Ok(())
    }
}

/// serde_json appends " at line L column C" to messages; the position is
/// reported separately.
fn strip_position(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_rejections() {
        for e in [Experiment::Sqg, Experiment::Euler3d] {
            let c = RunConfig::default_for(e);
            assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
        }
        let text = RunConfig::default_for(Experiment::Sqg).to_json().replace("\"seed\"", "\"sed\"");
        let err = RunConfig::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("sed") && err.contains("line"), "{err}");
        let mut c = RunConfig::default_for(Experiment::Euler3d);
        c.init = InitSpec::Sine;
        assert!(c.validate().is_err());
        assert_eq!("random:7".parse::<InitSpec>().unwrap(), InitSpec::Random(Some(7)));
        assert!("random:x".parse::<InitSpec>().is_err());
    }
}
