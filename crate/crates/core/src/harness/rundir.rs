//! Run directories: a run writes its config, snapshots and monitors, and the
//! verdicts are always derived from what is on disk so that a directory can
//! be re-verified later without integrating anything again.
//!
//! Layout:
//! ```text
//! config.json      exact configuration used
//! run.json         snapshot times, early stop reason or solver error
//! fields/          NNNN_<name>.sfld snapshots with JSON sidecars
//! monitors.csv     t,name,lhs,rhs,ratio
//! verdicts.json
//! ```

use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

use super::config::{Experiment, InitSpec, RunConfig};
use super::{timed, Verdict};
use crate::calibration;
use crate::error::{Error, Result};
use crate::euler3d::{self, EulerNorms, EulerRun, EulerState};
use crate::field::{ScalarField, VectorField};
use crate::fieldio;
use crate::grid::Grid;
use crate::kernels::{KernelKind, KernelSet};
use crate::lp::DyadicFamily;
use crate::random::{band_limited, divergence_free, rng, Band};
use crate::sqg::monitors::{MonitorParams, MonitorReport, SqgNorms};
use crate::sqg::{self, HaltRule, RunOptions, SqgMode, SqgState, Trajectory};

pub const MONITOR_TOL: f64 = 1.05;
pub const SQG_IDENTITY_TOL: f64 = 1e-3;
pub const EULER_IDENTITY_TOL: f64 = 1e-2;
pub const STEADY_SQG_TOL: f64 = 1e-8;
pub const STEADY_EULER_TOL: f64 = 1e-6;
pub const ENERGY_TOL: f64 = 1e-3;
pub const MEAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub times: Vec<f64>,
    /// Why the run stopped before `t_end`, when a halt rule fired.
    pub halted: Option<String>,
    /// Solver failure; no snapshots beyond the initial one are present.
    pub error: Option<String>,
    pub runtime: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub verdicts: Vec<Verdict>,
}

fn snapshot_path(dir: &Path, k: usize, name: &str) -> PathBuf {
    dir.join("fields").join(format!("{k:04}_{name}.sfld"))
}

fn check_grid(found: &Grid, expected: &Grid, what: &str) -> Result<()> {
    if found != expected {
        return Err(Error::Config(format!(
            "{what}: file grid (dim {}, N {}, L {}) differs from the configured grid",
            found.dim(),
            found.n(),
            found.half_width()
        )));
    }
    Ok(())
}

/// Lattice wavenumber closest to 1 along the first axis.
fn unit_wavenumber(g: &Grid) -> f64 {
    g.dk() * (1.0 / g.dk()).round().max(1.0)
}

pub fn sqg_initial(cfg: &RunConfig) -> Result<ScalarField> {
    let g = cfg.grid()?;
    let a = cfg.amplitude;
    Ok(match &cfg.init {
        InitSpec::Sine => {
            let k = unit_wavenumber(&g);
            ScalarField::from_fn(g, |x| a * (k * x[0]).sin())
        }
        InitSpec::Radial => ScalarField::from_fn(g, |x| a * (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp()),
        InitSpec::Random(_) => band_limited(g, Band::new(0.25, 3.0), 1.0, a, &mut rng(cfg.init_seed())),
        InitSpec::File(p) => {
            let f = fieldio::read_scalar(p)?;
            check_grid(f.grid(), &g, "initial data")?;
            f
        }
        other => return Err(Error::Config(format!("`{other}` is not an SQG initial condition"))),
    })
}

pub fn euler_initial(cfg: &RunConfig) -> Result<VectorField> {
    let g = cfg.grid()?;
    let a = cfg.amplitude;
    Ok(match &cfg.init {
        InitSpec::Shear => euler3d::shear_flow(g).scale(a),
        InitSpec::TaylorGreen => euler3d::taylor_green(g).scale(a),
        InitSpec::Random(_) => divergence_free(g, Band::new(1.0, 3.0), 1.0, a, &mut rng(cfg.init_seed())),
        InitSpec::File(p) => {
            let v = fieldio::read_vector(p)?;
            check_grid(v.grid(), &g, "initial data")?;
            v
        }
        other => return Err(Error::Config(format!("`{other}` is not a 3D initial condition"))),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

/// Integrates the configured experiment, writes the run directory and the
/// verdicts derived from it. Solver failures become failed verdicts.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let dir = cfg.out_dir.clone();
    fs::create_dir_all(dir.join("fields"))?;
    for stale in ["monitors.csv", "verdicts.json", "run.json"] {
        let p = dir.join(stale);
        if p.exists() {
            fs::remove_file(p)?;
        }
    }
    fs::write(dir.join("config.json"), cfg.to_json())?;
    let g = cfg.grid()?;
    let provenance = |t: f64| format!("{:?} {} seed {} t {t}", cfg.experiment, cfg.init, cfg.init_seed());
    match cfg.experiment {
        Experiment::Sqg => {
            let theta0 = sqg_initial(cfg)?;
            let ks = KernelSet::new(g, cfg.lambda, KernelKind::Sqg2d)?;
            let family = DyadicFamily::new(g)?;
            let a0 = sqg::constitutive_spectral(&theta0)?.max_component_sup()
                + family.holder_norm(&theta0, cfg.r, false)?.value;
            let mut opts = RunOptions::new(cfg.time.t_end, cfg.time.dt, cfg.mode);
            opts.output_every = cfg.output_every;
            opts.halt = Some(HaltRule {
                constant: calibration::SQG.short_time,
                a0,
                limit: calibration::HALT_LIMIT,
            });
            let (res, secs) = timed(|| sqg::run_sqg(&theta0, &opts, &ks));
            let (states, halted, error) = match res {
                Ok(tr) => (tr.states, tr.halted, None),
                Err(e @ (Error::SolverHalt { .. } | Error::NonFinite(_))) => (vec![SqgState::initial(theta0.clone(), cfg.time.dt)?], None, Some(e.to_string())),
                Err(e) => return Err(e),
            };
            for (k, st) in states.iter().enumerate() {
                let p = provenance(st.t);
                fieldio::write_scalar(&snapshot_path(&dir, k, "theta"), &st.theta, &p)?;
                fieldio::write_vector(&snapshot_path(&dir, k, "u"), &st.u, &p)?;
                fieldio::write_vector(&snapshot_path(&dir, k, "far"), &st.far_accumulator, &p)?;
            }
            let m = Manifest {
                times: states.iter().map(|s| s.t).collect(),
                halted,
                error,
                runtime: secs,
            };
            write_json(&dir.join("run.json"), &m)?;
        }
        Experiment::Euler3d => {
            let u0 = euler_initial(cfg)?;
            let ks = KernelSet::new(g, cfg.lambda, KernelKind::Euler3d)?;
            let (res, secs) = timed(|| euler3d::run_euler(&u0, cfg.time.t_end, cfg.time.dt, cfg.output_every, &ks));
            let (states, error) = match res {
                Ok(r) => (r.states, None),
                Err(e @ (Error::SolverHalt { .. } | Error::NonFinite(_))) => (vec![EulerState::initial(u0.clone())?], Some(e.to_string())),
                Err(e) => return Err(e),
            };
            for (k, st) in states.iter().enumerate() {
                let p = provenance(st.t);
                fieldio::write_vector(&snapshot_path(&dir, k, "u"), &st.u, &p)?;
                fieldio::write_vector(&snapshot_path(&dir, k, "omega"), &st.omega, &p)?;
                fieldio::write_vector(&snapshot_path(&dir, k, "far"), &st.far_accumulator, &p)?;
            }
            let m = Manifest {
                times: states.iter().map(|s| s.t).collect(),
                halted: None,
                error,
                runtime: secs,
            };
            write_json(&dir.join("run.json"), &m)?;
        }
    }
    let verdicts = evaluate_run_dir(&dir)?;
    Ok(RunOutcome { dir, verdicts })
}

pub fn read_config(dir: &Path) -> Result<RunConfig> {
    RunConfig::from_json(&fs::read_to_string(dir.join("config.json"))?)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    Ok(serde_json::from_str(&fs::read_to_string(dir.join("run.json"))?)?)
}

/// Monitor rows `(t, name, lhs, rhs, ratio)`.
pub type MonitorRow = (f64, String, f64, f64, f64);

pub fn write_monitor_csv(path: &Path, rows: &[MonitorRow]) -> Result<()> {
    let mut s = String::from("t,name,lhs,rhs,ratio\n");
    for (t, name, l, r, q) in rows {
        s.push_str(&format!("{t},{name},{l},{r},{q}\n"));
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn read_monitor_csv(path: &Path) -> Result<Vec<MonitorRow>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next() != Some("t,name,lhs,rhs,ratio") {
        return Err(Error::Format(format!("{}: unexpected header", path.display())));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = || Error::Format(format!("{}: malformed row {}", path.display(), i + 2));
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 5 {
                return Err(bad());
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
            Ok((num(parts[0])?, parts[1].to_string(), num(parts[2])?, num(parts[3])?, num(parts[4])?))
        })
        .collect()
}

fn rows_max_ratio(rows: &[MonitorRow]) -> f64 {
    rows.iter().map(|r| r.4).fold(0.0, f64::max)
}

fn relative(err: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

/// Re-derives every verdict of a run directory from its files and rewrites
/// `verdicts.json`. Monitors are recomputed from the snapshots only when
/// `monitors.csv` is missing.
pub fn evaluate_run_dir(dir: &Path) -> Result<Vec<Verdict>> {
    let cfg = read_config(dir)?;
    let manifest = read_manifest(dir)?;
    let suite = match cfg.experiment {
        Experiment::Sqg => "sqg-run",
        Experiment::Euler3d => "euler3d-run",
    };
    let mut verdicts = Vec::new();
    if let Some(err) = &manifest.error {
        verdicts.push(Verdict::failed(suite, "solver completes", 0.0, manifest.runtime, err.clone()));
    } else {
        verdicts = match cfg.experiment {
            Experiment::Sqg => sqg_verdicts(dir, &cfg, &manifest)?,
            Experiment::Euler3d => euler_verdicts(dir, &cfg, &manifest)?,
        };
    }
    write_json(&dir.join("verdicts.json"), &verdicts)?;
    Ok(verdicts)
}

fn load_sqg(dir: &Path, cfg: &RunConfig, m: &Manifest) -> Result<Trajectory> {
    let g = cfg.grid()?;
    let mut states: Vec<SqgState> = Vec::with_capacity(m.times.len());
    for (k, &t) in m.times.iter().enumerate() {
        let theta = fieldio::read_scalar(&snapshot_path(dir, k, "theta"))?;
        check_grid(theta.grid(), &g, "snapshot")?;
        let u = fieldio::read_vector(&snapshot_path(dir, k, "u"))?;
        let far = fieldio::read_vector(&snapshot_path(dir, k, "far"))?;
        let (theta0, u0) = match states.first() {
            Some(s) => (s.theta0.clone(), s.u0.clone()),
            None => (theta.clone(), u.clone()),
        };
        states.push(SqgState {
            t,
            dt: cfg.time.dt,
            theta,
            u,
            far_accumulator: far,
            acc_time: t,
            theta0,
            u0,
        });
    }
    if states.is_empty() {
        return Err(Error::Format("run directory holds no snapshots".into()));
    }
    Ok(Trajectory {
        states,
        halted: m.halted.clone(),
    })
}

fn monitor_rows(dir: &Path, compute: impl FnOnce() -> Result<MonitorReport>) -> Result<(Vec<MonitorRow>, f64)> {
    let path = dir.join("monitors.csv");
    if path.exists() {
        let (rows, secs) = timed(|| read_monitor_csv(&path));
        return Ok((rows?, secs));
    }
    let (report, secs) = timed(compute);
    let rows = report?.csv_rows();
    write_monitor_csv(&path, &rows)?;
    Ok((rows, secs))
}

fn sqg_verdicts(dir: &Path, cfg: &RunConfig, m: &Manifest) -> Result<Vec<Verdict>> {
    let g = cfg.grid()?;
    let traj = load_sqg(dir, cfg, m)?;
    let ks = KernelSet::new(g, cfg.lambda, KernelKind::Sqg2d)?;
    let family = DyadicFamily::new(g)?;
    let mut out = Vec::new();
    let (res, secs) = timed(|| -> Result<f64> {
        let mut worst: f64 = 0.0;
        for st in &traj.states {
            worst = worst.max(sqg::identity_residual(st, &ks)?);
        }
        Ok(worst)
    });
    out.push(Verdict::new("sqg-run", "kernel-split velocity identity", res?, SQG_IDENTITY_TOL, secs));

    let params = MonitorParams {
        r: cfg.r,
        s: cfg.s,
        lambda: calibration::SQG_PARAMS.lambda,
    };
    let (rows, secs) = monitor_rows(dir, || Ok(SqgNorms::measure(&traj, &params, &family)?.monitors(&calibration::SQG)))?;
    out.push(Verdict::new("sqg-run", "a priori monitors (frozen constants)", rows_max_ratio(&rows), MONITOR_TOL, secs));

    let first = &traj.states[0];
    let last = traj.last();
    let scale = first.theta.sup_norm();
    let ((mean_drift, steady, extrema), secs) = timed(|| {
        let mean = relative((last.theta.mean() - first.theta.mean()).abs(), scale);
        let steady = relative(last.theta.sub(&first.theta).map(|d| d.sup_norm()).unwrap_or(f64::NAN), scale);
        let over = (last.theta.max() - first.theta.max()).max(first.theta.min() - last.theta.min()).max(0.0);
        (mean, steady, relative(over, scale))
    });
    out.push(Verdict::new("sqg-run", "conservation of the mean", mean_drift, MEAN_TOL, secs));
    if matches!(cfg.init, InitSpec::Sine | InitSpec::Radial) {
        out.push(Verdict::new("sqg-run", "steady state preserved", steady, STEADY_SQG_TOL, secs));
    }
    if cfg.mode == SqgMode::Serfati {
        out.push(Verdict::new("sqg-run", "discrete maximum principle", extrema, MEAN_TOL, secs));
    }
    if let Some(h) = &traj.halted {
        for v in &mut out {
            v.note = Some(h.clone());
        }
    }
    Ok(out)
}

fn load_euler(dir: &Path, cfg: &RunConfig, m: &Manifest) -> Result<EulerRun> {
    let g = cfg.grid()?;
    let mut states: Vec<EulerState> = Vec::with_capacity(m.times.len());
    for (k, &t) in m.times.iter().enumerate() {
        let u = fieldio::read_vector(&snapshot_path(dir, k, "u"))?;
        check_grid(u.grid(), &g, "snapshot")?;
        let omega = fieldio::read_vector(&snapshot_path(dir, k, "omega"))?;
        let far = fieldio::read_vector(&snapshot_path(dir, k, "far"))?;
        let (u0, omega0) = match states.first() {
            Some(s) => (s.u0.clone(), s.omega0.clone()),
            None => (u.clone(), omega.clone()),
        };
        states.push(EulerState {
            t,
            u,
            omega,
            far_accumulator: far,
            u0,
            omega0,
        });
    }
    if states.is_empty() {
        return Err(Error::Format("run directory holds no snapshots".into()));
    }
    Ok(EulerRun {
        states,
        dt: cfg.time.dt,
    })
}

fn euler_verdicts(dir: &Path, cfg: &RunConfig, m: &Manifest) -> Result<Vec<Verdict>> {
    let g = cfg.grid()?;
    let run = load_euler(dir, cfg, m)?;
    let ks = KernelSet::new(g, cfg.lambda, KernelKind::Euler3d)?;
    let mut out = Vec::new();
    let (res, secs) = timed(|| euler3d::serfati3d_residual(&run, &ks));
    let worst = res?.iter().map(|p| p.1).fold(0.0, f64::max);
    out.push(Verdict::new("euler3d-run", "kernel-split velocity identity", worst, EULER_IDENTITY_TOL, secs));

    let (rows, secs) = monitor_rows(dir, || {
        Ok(EulerNorms::measure(&run, cfg.s, calibration::EULER_UL_LAMBDA)?.monitors(&calibration::EULER))
    })?;
    out.push(Verdict::new("euler3d-run", "a priori monitors (frozen constants)", rows_max_ratio(&rows), MONITOR_TOL, secs));

    let first = &run.states[0];
    let last = run.states.last().expect("non-empty");
    let e0 = first.energy();
    out.push(Verdict::new(
        "euler3d-run",
        "energy conservation",
        relative((last.energy() - e0).abs(), e0),
        ENERGY_TOL,
        0.0,
    ));
    if matches!(cfg.init, InitSpec::Shear | InitSpec::TaylorGreen) {
        let d = last.u.sub(&first.u)?.max_component_sup();
        out.push(Verdict::new(
            "euler3d-run",
            "steady state preserved",
            relative(d, first.u.max_component_sup()),
            STEADY_EULER_TOL,
            0.0,
        ));
    }
    Ok(out)
}
