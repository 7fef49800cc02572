//! Verification suites. Each suite builds its own data from fixed seeds and
//! returns verdicts; a suite that errors out yields a failed verdict instead
//! of aborting the others.

use rand::Rng;
use std::f64::consts::PI;

use super::rundir::MonitorRow;
use super::{timed, Verdict};
use crate::calibration;
use crate::error::{Error, Result};
use crate::euler3d::{self, StreamFunction, STREAM_ORDER};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::kernels::table::PeriodizedFarTable;
use crate::kernels::{KernelKind, KernelSet};
use crate::lp::DyadicFamily;
use crate::random::{band_limited, divergence_free, rng, Band};
use crate::sqg::{self, PicardOptions, RunOptions, SqgMode};
use crate::{spectral, ul};

/// Individual suites, in criterion order.
pub const SUITE_NAMES: [&str; 10] = [
    "partition",
    "bernstein",
    "kernels",
    "sqg-identity",
    "picard",
    "monitors",
    "stream",
    "pressure",
    "euler3d-identity",
    "initial-data",
];

fn expand(name: &str) -> Option<Vec<&'static str>> {
    match name {
        "all" => Some(SUITE_NAMES.to_vec()),
        "lp" => Some(vec!["partition", "bernstein"]),
        "euler3d" => Some(vec!["stream", "pressure", "euler3d-identity", "initial-data"]),
        _ => SUITE_NAMES.iter().find(|s| **s == name).map(|s| vec![*s]),
    }
}

/// Resolves a comma-separated selector into suite names, without duplicates.
pub fn resolve(selector: &str) -> Result<Vec<&'static str>> {
    let mut out: Vec<&'static str> = Vec::new();
    for part in selector.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        for s in expand(part).ok_or_else(|| Error::UnknownSuite(part.to_string()))? {
            if !out.contains(&s) {
                out.push(s);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::UnknownSuite(selector.to_string()));
    }
    Ok(out)
}

/// Runs the selected suites one after another (each is internally parallel).
pub fn verify(selector: &str) -> Result<Vec<Verdict>> {
    Ok(resolve(selector)?.into_iter().flat_map(run_suite).collect())
}

/// Runs a single named suite; errors become a failed verdict.
pub fn run_suite(name: &str) -> Vec<Verdict> {
    let (res, secs) = timed(|| match name {
        "partition" => partition(),
        "bernstein" => bernstein(),
        "kernels" => kernels(),
        "sqg-identity" => sqg_identity(),
        "picard" => picard(),
        "monitors" => monitors(),
        "stream" => euler3d_check(Euler3dSuite::Stream, &Euler3dParams::default()).map(|o| o.verdicts),
        "pressure" => {
            let p = Euler3dParams {
                lambda: 0.3,
                ..Euler3dParams::default()
            };
            euler3d_check(Euler3dSuite::Pressure, &p).map(|o| o.verdicts)
        }
        "euler3d-identity" => {
            let p = Euler3dParams::default();
            let mut v = euler3d_check(Euler3dSuite::Serfati, &p)?.verdicts;
            v.extend(euler3d_check(Euler3dSuite::Ibp, &p)?.verdicts);
            Ok(v)
        }
        "initial-data" => initial_data(),
        other => Err(Error::UnknownSuite(other.to_string())),
    });
    res.unwrap_or_else(|e| vec![Verdict::failed(name, "suite completes", 0.0, secs, e.to_string())])
}

/// Seeds of the random fields used by the suites, one range per suite.
fn seed(suite: u64, i: u64) -> u64 {
    10_000 * suite + i
}

fn relative(err: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

fn partition() -> Result<Vec<Verdict>> {
    let g = Grid::default_2d();
    let family = DyadicFamily::new(g)?;
    let (worst, secs) = timed(|| -> Result<f64> {
        let mut worst: f64 = 0.0;
        for i in 0..100 {
            // S_{j_max} is the identity below 3/5·2^{j_max+1} = 9.6 on this grid.
            let f = band_limited(g, Band::new(0.0, 9.0), 1.0, 1.0, &mut rng(seed(1, i)));
            let mut sum = ScalarField::zeros(g);
            for j in family.block_range(false) {
                sum = sum.add(&family.block(&f, j, false)?)?;
            }
            worst = worst.max(relative(sum.sub(&f)?.sup_norm(), f.sup_norm()));
        }
        Ok(worst)
    });
    let (pe, secs2) = timed(|| family.partition_error());
    Ok(vec![
        Verdict::new("partition", "sum of blocks reconstructs the field", worst?, 1e-10, secs),
        Verdict::new("partition", "partition of unity in frequency", pe, 1e-12, secs2),
    ])
}

fn bernstein() -> Result<Vec<Verdict>> {
    let g = Grid::default_2d();
    let family = DyadicFamily::new(g)?;
    let (res, secs) = timed(|| -> Result<f64> {
        let mut violations = 0usize;
        for j in 0..=3 {
            let s = 2f64.powi(j);
            let band = Band::new(0.6 * s * (1.0 + 1e-9), 5.0 / 3.0 * s * (1.0 - 1e-9));
            for i in 0..50 {
                let f = band_limited(g, band, 1.0, 1.0, &mut rng(seed(2, 100 * j as u64 + i)));
                for k in [1, 2] {
                    if !family.bernstein_bracket(&f, j, k)?.holds() {
                        violations += 1;
                    }
                }
            }
        }
        Ok(violations as f64)
    });
    Ok(vec![Verdict::new("bernstein", "L2 Bernstein bracket violations", res?, 0.0, secs)])
}

fn kernels() -> Result<Vec<Verdict>> {
    let g = Grid::default_2d();
    let mut out = Vec::new();
    let mut far_l1 = Vec::new();
    for lambda in [1.0, 2.0] {
        let ks = KernelSet::new(g, lambda, KernelKind::Sqg2d)?;
        let (res, secs) = timed(|| -> Result<f64> {
            let table = PeriodizedFarTable::new(&g, ks.cutoff(), 3, 4)?;
            let mut worst: f64 = 0.0;
            for i in 0..20 {
                let theta = band_limited(g, Band::new(0.25, 4.0), 1.0, 1.0, &mut rng(seed(3, i)));
                let oracle = sqg::constitutive_spectral(&theta)?;
                // div F = θ − mean θ, so the far Hessian acting on F is the far kernel acting on θ.
                let f = spectral::grad(&spectral::inverse_neg_laplacian(&theta)).scale(-1.0);
                let split = ks.near_conv_perp(&theta)?.add(&table.contract(&f)?)?;
                worst = worst.max(relative(split.sub(&oracle)?.max_component_sup(), oracle.max_component_sup()));
            }
            Ok(worst)
        });
        out.push(Verdict::new(
            "kernels",
            &format!("near+far reassembly, lambda = {lambda}"),
            res?,
            1e-4,
            secs,
        ));
        far_l1.push(ks.l1_norms().far);
    }
    // ‖far kernel‖_{L¹} ∝ 1/λ: doubling λ should halve it.
    let scaling = (2.0 * far_l1[1] / far_l1[0] - 1.0).abs();
    out.push(Verdict::new("kernels", "far-kernel L1 norm scales as 1/lambda", scaling, 0.3, 0.0));
    Ok(out)
}

/// Identity residuals along a spectral run on an `n`-point grid.
fn sqg_identity_residuals(theta_coarse: &ScalarField, n: usize, dt: f64) -> Result<Vec<f64>> {
    let g = Grid::new(2, theta_coarse.grid().half_width(), n)?;
    let theta0 = spectral::resample(theta_coarse, g)?;
    let ks = KernelSet::new(g, 1.0, KernelKind::Sqg2d)?;
    let mut opts = RunOptions::new(0.5, dt, SqgMode::Spectral);
    opts.output_every = (0.125 / dt).round() as usize;
    let traj = sqg::run_sqg(&theta0, &opts, &ks)?;
    traj.states.iter().map(|s| sqg::identity_residual(s, &ks)).collect()
}

fn sqg_identity() -> Result<Vec<Verdict>> {
    let g = Grid::new(2, 8.0 * PI, 256)?;
    let theta0 = band_limited(g, Band::new(0.25, 4.0), 1.0, 0.1, &mut rng(seed(4, 0)));
    let (coarse, secs) = timed(|| sqg_identity_residuals(&theta0, 256, 1.0 / 256.0));
    let coarse = coarse?;
    let (fine, secs2) = timed(|| sqg_identity_residuals(&theta0, 512, 1.0 / 512.0));
    let fine = fine?;
    let worst = coarse.iter().copied().fold(0.0, f64::max);
    let reduction = relative(*fine.last().expect("final state"), *coarse.last().expect("final state"));
    Ok(vec![
        Verdict::new("sqg-identity", "kernel-split identity along a spectral run", worst, 1e-3, secs),
        Verdict::new("sqg-identity", "residual ratio fine/coarse under halving", reduction, 1.0 / 3.0, secs2),
    ])
}

/// Data for the Picard suite: a random field rescaled to `‖θ⁰‖_{C^r} = 0.1`.
pub fn picard_data(family: &DyadicFamily, r: f64) -> Result<ScalarField> {
    let g = *family.grid();
    let theta = band_limited(g, Band::new(0.25, 9.0), 1.0, 1.0, &mut rng(seed(5, 0)));
    let cr = family.holder_norm(&theta, r, false)?.value;
    Ok(theta.scale(0.1 / cr))
}

fn picard() -> Result<Vec<Verdict>> {
    let g = Grid::new(2, 4.0 * PI, 128)?;
    let family = DyadicFamily::new(g)?;
    let ks = KernelSet::new(g, 1.0, KernelKind::Sqg2d)?;
    let r = 1.5;
    let theta0 = picard_data(&family, r)?;
    let u0 = sqg::constitutive_spectral(&theta0)?;
    let opts = |n_max| PicardOptions {
        n_max,
        t_end: 0.2,
        dt: 0.01,
        r,
    };
    let mut out = Vec::new();
    let (first, secs) = timed(|| -> Result<f64> {
        let ledger = sqg::picard_iterate(&theta0, &u0, &opts(1), &family, &ks)?;
        let low = family.low_pass(&theta0, 2)?;
        let mut worst: f64 = 0.0;
        for th in &ledger.current.theta {
            worst = worst.max(th.sub(&low)?.sup_norm());
        }
        Ok(worst)
    });
    out.push(Verdict::new("picard", "first iterate equals S_2 of the data", first?, 0.0, secs));
    let (ledger, secs) = timed(|| sqg::picard_iterate(&theta0, &u0, &opts(8), &family, &ks));
    let ledger = ledger?;
    let d: Vec<f64> = (3..=8).map(|n| ledger.d(n).unwrap_or(f64::NAN)).collect();
    let increases = d.windows(2).filter(|w| !(w[1] < w[0])).count();
    out.push(Verdict::new("picard", "D_n strictly decreasing for 3 <= n <= 8", increases as f64, 0.0, secs));
    out.push(Verdict::new("picard", "D_8 / D_3", relative(d[5], d[0]), 0.1, 0.0));
    let (fp, secs) = timed(|| sqg::picard::fixed_point_defect(&ledger, 8, &theta0, &u0, 0.01, &family, &ks));
    out.push(Verdict::new("picard", "converged iterate is a fixed point", fp?, 1e-6, secs));
    Ok(out)
}

fn monitors() -> Result<Vec<Verdict>> {
    let (sqg_worst, secs) = timed(|| -> Result<f64> {
        let mut w: f64 = 0.0;
        for s in calibration::TEST_SEEDS {
            w = w.max(calibration::sqg_norms(s, Some(&calibration::SQG))?.monitors(&calibration::SQG).max_ratio());
        }
        Ok(w)
    });
    let (euler_worst, secs2) = timed(|| -> Result<f64> {
        let mut w: f64 = 0.0;
        for s in calibration::TEST_SEEDS {
            w = w.max(calibration::euler_norms(s)?.monitors(&calibration::EULER).max_ratio());
        }
        Ok(w)
    });
    let (p_worst, secs3) = timed(|| -> Result<f64> {
        let mut w: f64 = 0.0;
        for s in calibration::TEST_SEEDS {
            w = w.max(calibration::pressure_ratio(s)? / calibration::PRESSURE);
        }
        Ok(w)
    });
    Ok(vec![
        Verdict::new("monitors", "SQG short-time, Gronwall, velocity bounds", sqg_worst?, 1.05, secs),
        Verdict::new("monitors", "3D vorticity Gronwall and velocity bounds", euler_worst?, 1.05, secs2),
        Verdict::new("monitors", "pressure gradient bound", p_worst?, 1.05, secs3),
    ])
}

fn initial_data() -> Result<Vec<Verdict>> {
    let g = calibration::prep_grid();
    let family = DyadicFamily::new(g)?;
    let u0 = calibration::prep_member(calibration::TEST_SEEDS[0]);
    let (res, secs) = timed(|| -> Result<(f64, f64, f64)> {
        let (mut mismatch, mut div, mut ratio): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for n in calibration::PREP_LEVELS {
            let p = euler3d::prepare_initial_data(&u0, n, &family, calibration::PREP_S, calibration::PREP_UL_LAMBDA)?;
            mismatch = mismatch.max(p.form_mismatch);
            div = div.max(p.divergence);
            ratio = ratio.max(p.hs_ul_ratio);
        }
        Ok((mismatch, div, ratio))
    });
    let (mismatch, div, ratio) = res?;
    let share = secs / 3.0;
    Ok(vec![
        Verdict::new("initial-data", "curl form equals product form", mismatch, 1e-10, share),
        Verdict::new("initial-data", "prepared data divergence-free", div, 1e-10, share),
        Verdict::new(
            "initial-data",
            "H^s_ul norm uniformly bounded",
            ratio,
            calibration::INITIAL_DATA,
            share,
        ),
    ])
}

/// Parameters of the 3D checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Euler3dParams {
    pub n: usize,
    pub half_width: f64,
    pub t_end: f64,
    pub dt: f64,
    pub lambda: f64,
    pub seed: u64,
    pub amplitude: f64,
}

impl Default for Euler3dParams {
    fn default() -> Self {
        Self {
            n: 32,
            half_width: PI,
            t_end: 0.25,
            dt: 1.0 / 32.0,
            lambda: 0.35,
            seed: 3,
            amplitude: 0.5,
        }
    }
}

impl Euler3dParams {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(3, self.half_width, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Euler3dSuite {
    Bs,
    Stream,
    Pressure,
    Serfati,
    Ibp,
    Gronwall,
}

impl std::str::FromStr for Euler3dSuite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "bs" => Self::Bs,
            "stream" => Self::Stream,
            "pressure" => Self::Pressure,
            "serfati" => Self::Serfati,
            "ibp" => Self::Ibp,
            "gronwall" => Self::Gronwall,
            _ => return Err(Error::UnknownSuite(s.to_string())),
        })
    }
}

/// Verdicts plus time series `(t, name, lhs, rhs, ratio)`.
#[derive(Debug, Clone, Default)]
pub struct SuiteOutput {
    pub verdicts: Vec<Verdict>,
    pub series: Vec<MonitorRow>,
}

impl From<Vec<Verdict>> for SuiteOutput {
    fn from(verdicts: Vec<Verdict>) -> Self {
        Self {
            verdicts,
            series: Vec::new(),
        }
    }
}

pub fn euler3d_check(suite: Euler3dSuite, p: &Euler3dParams) -> Result<SuiteOutput> {
    match suite {
        Euler3dSuite::Bs => check_bs(p).map(Into::into),
        Euler3dSuite::Stream => check_stream(p).map(Into::into),
        Euler3dSuite::Pressure => check_pressure(p).map(Into::into),
        Euler3dSuite::Serfati => check_serfati(p),
        Euler3dSuite::Ibp => check_ibp(p).map(Into::into),
        Euler3dSuite::Gronwall => check_gronwall(p),
    }
}

fn nyquist_band(g: &Grid, lo: f64, fraction: f64) -> Band {
    Band::new(lo, g.nyquist() * fraction)
}

fn check_bs(p: &Euler3dParams) -> Result<Vec<Verdict>> {
    let g = p.grid()?;
    let ks = KernelSet::new(g, p.lambda, KernelKind::Euler3d)?;
    let (res, secs) = timed(|| -> Result<(f64, f64)> {
        let (mut roundtrip, mut split): (f64, f64) = (0.0, 0.0);
        for i in 0..10 {
            let base = divergence_free(g, nyquist_band(&g, 0.5, 0.5), 1.0, p.amplitude, &mut rng(p.seed + i));
            let mean = [0.3, -0.2, 0.1];
            let u = VectorField::new(
                base.components()
                    .iter()
                    .zip(mean)
                    .map(|(c, m)| c.map(|v| v + m))
                    .collect(),
            )?;
            let target = base.clone();
            let scale = target.max_component_sup();
            let back = euler3d::biot_savart(&spectral::curl(&u)?)?;
            roundtrip = roundtrip.max(relative(back.sub(&target)?.max_component_sup(), scale));
            let s = ks.biot_savart_split(&u)?;
            split = split.max(relative(s.sub(&target)?.max_component_sup(), scale));
        }
        Ok((roundtrip, split))
    });
    let (roundtrip, split) = res?;
    Ok(vec![
        Verdict::new("bs", "Biot-Savart of curl u returns u minus its mean", roundtrip, 1e-10, secs),
        Verdict::new("bs", "kernel-split Biot-Savart matches spectral", split, 1e-3, 0.0),
    ])
}

/// Probe points in the ball `|x| ≤ L/2`.
fn probes(count: usize, radius: f64, seed: u64) -> Vec<[f64; 3]> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x: [f64; 3] = [0, 1, 2].map(|_| r.gen_range(-radius..radius));
        if x.iter().map(|v| v * v).sum::<f64>() <= radius * radius {
            out.push(x);
        }
    }
    out
}

fn check_stream(p: &Euler3dParams) -> Result<Vec<Verdict>> {
    let g = p.grid()?;
    let radius = 0.5 * g.half_width();
    let mut out = Vec::new();
    let (res, secs) = timed(|| -> Result<(f64, f64, f64, f64)> {
        let (mut curl_err, mut origin, mut order_err, mut div_err): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..20 {
            let u = divergence_free(g, nyquist_band(&g, 0.5, 0.2), 1.0, 1.0, &mut rng(seed(7, p.seed + i)));
            let sf = StreamFunction::new(&u, STREAM_ORDER)?;
            let scale = u.max_component_sup();
            let pts = probes(8, radius, seed(7, 1000 + p.seed + i));
            for &x in &pts {
                let (c, _) = sf.derivatives_fd(x, 1e-3);
                let v = sf.velocity(x);
                for a in 0..3 {
                    curl_err = curl_err.max(relative((c[a] - v[a]).abs(), scale));
                }
            }
            origin = origin.max(sf.eval([0.0; 3]).iter().fold(0.0f64, |m, v| m.max(v.abs())));
            if i < 4 {
                let doubled = StreamFunction::new(&u, 2 * STREAM_ORDER)?;
                for &x in &pts {
                    let (a, b) = (sf.eval(x), doubled.eval(x));
                    for k in 0..3 {
                        order_err = order_err.max(relative((a[k] - b[k]).abs(), scale * radius));
                    }
                }
                div_err = div_err.max(euler3d::div_stream_check(&u, &pts, 1e-3)?.relative_error);
            }
        }
        Ok((curl_err, origin, order_err, div_err))
    });
    let (curl_err, origin, order_err, div_err) = res?;
    out.push(Verdict::new("stream", "curl psi = u on |x| <= L/2", curl_err, 1e-4, secs));
    out.push(Verdict::new("stream", "psi(0) = 0", origin, 0.0, 0.0));
    out.push(Verdict::new("stream", "quadrature order doubling", order_err, 1e-10, 0.0));
    out.push(Verdict::new("stream", "div psi matches the dilation formula", div_err, 1e-4, 0.0));

    let (closed, secs) = timed(|| -> Result<f64> {
        let mut worst: f64 = 0.0;
        let mut r = rng(seed(7, 9999));
        for _ in 0..5 {
            let c: [f64; 3] = [0, 1, 2].map(|_| r.gen_range(-1.0..1.0));
            let u = VectorField::from_fn(g, |_| c);
            let sf = StreamFunction::new(&u, STREAM_ORDER)?;
            for x in probes(10, radius, r.gen()) {
                let expect = euler3d::cross(x, c).map(|v| -0.5 * v);
                let got = sf.eval(x);
                for k in 0..3 {
                    worst = worst.max((got[k] - expect[k]).abs());
                }
            }
        }
        Ok(worst)
    });
    out.push(Verdict::new("stream", "constant field closed form -x*u/2", closed?, 1e-12, secs));
    Ok(out)
}

fn grad_sup(v: &VectorField) -> f64 {
    v.components()
        .iter()
        .map(|c| spectral::grad(c).max_component_sup())
        .fold(0.0, f64::max)
}

fn check_pressure(p: &Euler3dParams) -> Result<Vec<Verdict>> {
    let g = p.grid()?;
    let ks = KernelSet::new(g, p.lambda, KernelKind::Euler3d)?;
    let half = KernelSet::new(g, 0.5 * p.lambda, KernelKind::Euler3d)?;
    let tg = euler3d::taylor_green(g);
    let random = divergence_free(g, nyquist_band(&g, 0.5, 0.25), 1.0, 1.0, &mut rng(seed(8, p.seed)));
    let mut out = Vec::new();
    let (res, secs) = timed(|| -> Result<f64> {
        let gp = ks.pressure_gradient(&tg)?;
        let oracle = euler3d::pressure_gradient_oracle(&tg)?;
        Ok(relative(gp.sub(&oracle)?.max_component_sup(), oracle.max_component_sup()))
    });
    out.push(Verdict::new("pressure", "Taylor-Green against the Poisson oracle", res?, 1e-3, secs));
    let (res, secs) = timed(|| -> Result<f64> {
        let mut worst: f64 = 0.0;
        for u in [&tg, &random] {
            let a = ks.pressure_gradient(u)?;
            let b = half.pressure_gradient(u)?;
            worst = worst.max(relative(a.sub(&b)?.max_component_sup(), a.max_component_sup()));
        }
        Ok(worst)
    });
    out.push(Verdict::new("pressure", "independent of the cutoff radius", res?, 1e-4, secs));
    let (res, secs) = timed(|| ks.pressure_gradient(&euler3d::shear_flow(g)).map(|v| v.max_component_sup()));
    out.push(Verdict::new("pressure", "shear flow has no pressure gradient", res?, 1e-4, secs));
    let (res, secs) = timed(|| -> Result<f64> {
        let gp = ks.pressure_gradient(&random)?;
        Ok(relative(spectral::curl(&gp)?.max_component_sup(), grad_sup(&gp)))
    });
    out.push(Verdict::new("pressure", "pressure gradient is curl-free", res?, 1e-6, secs));
    let (res, secs) = timed(|| -> Result<f64> {
        let c1 = ul::c_tilde_norm(random.components(), 1)?;
        Ok(ks.pressure_gradient(&random)?.max_component_sup() / (c1 * c1) / calibration::PRESSURE)
    });
    out.push(Verdict::new("pressure", "pressure bound ratio (frozen constant)", res?, 1.05, secs));
    Ok(out)
}

fn check_serfati(p: &Euler3dParams) -> Result<SuiteOutput> {
    let g = p.grid()?;
    let ks = KernelSet::new(g, p.lambda, KernelKind::Euler3d)?;
    let mut out = SuiteOutput::default();
    let (res, secs) = timed(|| -> Result<Vec<(f64, f64)>> {
        let u0 = divergence_free(g, Band::new(1.0, 4.0), 1.0, p.amplitude, &mut rng(p.seed));
        let run = euler3d::run_euler(&u0, p.t_end, p.dt, 2, &ks)?;
        euler3d::serfati3d_residual(&run, &ks)
    });
    let res = res?;
    let worst = res.iter().map(|r| r.1).fold(0.0, f64::max);
    out.verdicts.push(Verdict::new(
        "serfati",
        "3D kernel-split identity along a spectral run",
        worst,
        1e-2,
        secs,
    ));
    out.series.extend(res.iter().map(|&(t, r)| (t, "serfati_residual".to_string(), r, 1e-2, r / 1e-2)));
    let (res, secs) = timed(|| -> Result<Vec<(f64, f64)>> {
        let run = euler3d::run_euler(&euler3d::shear_flow(g), p.t_end, p.dt, 2, &ks)?;
        euler3d::serfati3d_residual(&run, &ks)
    });
    let res = res?;
    let worst = res.iter().map(|r| r.1).fold(0.0, f64::max);
    out.verdicts.push(Verdict::new("serfati", "identity along steady shear", worst, 1e-3, secs));
    out.series.extend(res.iter().map(|&(t, r)| (t, "shear_residual".to_string(), r, 1e-3, r / 1e-3)));
    Ok(out)
}

fn check_ibp(p: &Euler3dParams) -> Result<Vec<Verdict>> {
    let g = p.grid()?;
    // Products of three fields stay below the Nyquist frequency, so the
    // lattice quadrature is exact.
    let band = nyquist_band(&g, 0.5, 1.0 / 3.0);
    let (res, secs) = timed(|| -> Result<f64> {
        let mut worst: f64 = 0.0;
        for i in 0..20 {
            let mut r = rng(seed(9, p.seed + i));
            let u = divergence_free(g, band, 1.0, 1.0, &mut r);
            let general = |r: &mut crate::random::SeededRng| -> Result<VectorField> {
                VectorField::new((0..3).map(|_| band_limited(g, band, 1.0, 1.0, r)).collect())
            };
            let v = general(&mut r)?;
            let big_v = general(&mut r)?;
            worst = worst.max(euler3d::ibp_identity_suite(&u, &v, &big_v)?.relative_error);
        }
        Ok(worst)
    });
    Ok(vec![Verdict::new("ibp", "vector integration-by-parts identities", res?, 1e-10, secs)])
}

fn check_gronwall(p: &Euler3dParams) -> Result<SuiteOutput> {
    let g = p.grid()?;
    let ks = KernelSet::new(g, p.lambda, KernelKind::Euler3d)?;
    let u0 = divergence_free(g, Band::new(1.0, 3.0), 1.0, p.amplitude, &mut rng(p.seed));
    let (res, secs) = timed(|| -> Result<(crate::sqg::MonitorReport, f64)> {
        let run = euler3d::run_euler(&u0, p.t_end, p.dt, 2, &ks)?;
        let report = euler3d::uomega_bound_check(&run, calibration::EULER_S, calibration::EULER_UL_LAMBDA, &calibration::EULER)?;
        let e0 = run.states[0].energy();
        let e1 = run.states.last().expect("non-empty").energy();
        Ok((report, relative((e1 - e0).abs(), e0)))
    });
    let (report, drift) = res?;
    Ok(SuiteOutput {
        verdicts: vec![
            Verdict::new("gronwall", "3D monitors with frozen constants", report.max_ratio(), 1.05, secs),
            Verdict::new("gronwall", "energy conservation", drift, 1e-3, 0.0),
        ],
        series: report.csv_rows(),
    })
}
