//! Surface quasi-geostrophic flows: the Riesz-transform constitutive law,
//! semi-Lagrangian and pseudo-spectral transport, the kernel-split velocity
//! update with a running far-field integral, the Picard construction and the
//! a priori estimate monitors.

pub mod monitors;
pub mod picard;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::interp::cubic_2d;
use crate::kernels::KernelSet;
use crate::par;
use crate::spectral::{self, norm2};

pub use monitors::{estimate_monitors, MonitorReport, MonitorSeries};
pub use picard::{picard_iterate, IterationLedger, LedgerRow, PicardOptions};

/// `u = ∇^⊥(−Δ)^{-1/2}θ`, multiplier `iξ^⊥/|ξ|` with `ξ^⊥ = (−ξ₂, ξ₁)`.
pub fn constitutive_spectral(theta: &ScalarField) -> Result<VectorField> {
    let g = *theta.grid();
    if g.dim() != 2 {
        return Err(Error::GridMismatch("SQG lives on a 2D grid".into()));
    }
    let spec = theta.spectrum();
    let comp = |c: usize| {
        let out = par::map_range(g.len(), |i| {
            let xi = g.wave_vector(i);
            let k = norm2(xi).sqrt();
            if k == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let perp = if c == 0 { -xi[1] } else { xi[0] };
            spec[i] * Complex64::new(0.0, perp / k)
        });
        ScalarField::from_spectrum(g, out)
    };
    VectorField::new(vec![comp(0), comp(1)])
}

/// Semi-Lagrangian step with a velocity frozen over the step.
///
/// Departure points come from the midpoint rule `X = x − dt·u(x − dt/2·u(x))`,
/// values from bicubic interpolation. The result is clipped to the range of
/// `θ` and its mean restored by a bounded correction, which keeps the discrete
/// maximum principle and mass conservation exact up to roundoff.
pub fn transport_step(theta: &ScalarField, u: &VectorField, dt: f64) -> Result<ScalarField> {
    let g = *theta.grid();
    if g.dim() != 2 || *u.grid() != g || u.components().len() != 2 {
        return Err(Error::GridMismatch("transport needs θ and u on one 2D grid".into()));
    }
    let (u0, u1) = (u.component(0), u.component(1));
    if u0.values().iter().chain(u1.values()).all(|v| *v == 0.0) {
        return Ok(theta.clone());
    }
    let raw = par::map_range(g.len(), |i| {
        let x = g.point(i);
        let (a, b) = (u0.values()[i], u1.values()[i]);
        let mid = [x[0] - 0.5 * dt * a, x[1] - 0.5 * dt * b];
        let (am, bm) = (cubic_2d(u0, mid), cubic_2d(u1, mid));
        cubic_2d(theta, [x[0] - dt * am, x[1] - dt * bm])
    });
    Ok(limit_and_fix_mass(theta, raw))
}

fn limit_and_fix_mass(theta: &ScalarField, mut raw: Vec<f64>) -> ScalarField {
    let g = *theta.grid();
    let (lo, hi) = (theta.min(), theta.max());
    par::for_each_mut(&mut raw, |_, v| *v = v.clamp(lo, hi));
    let n = g.len() as f64;
    let target = theta.mean();
    let deficit = target - par::sum_range(raw.len(), |i| raw[i]) / n;
    if deficit != 0.0 {
        let room: Vec<f64> = if deficit > 0.0 {
            raw.iter().map(|v| hi - v).collect()
        } else {
            raw.iter().map(|v| v - lo).collect()
        };
        let total = par::sum_range(room.len(), |i| room[i]) / n;
        if total > 0.0 {
            let c = deficit / total;
            for (v, r) in raw.iter_mut().zip(&room) {
                *v += c * r;
            }
        }
    }
    ScalarField::from_values_unchecked(g, raw)
}

/// `−P(u·∇θ)` with the 2/3 rule applied to the product.
fn transport_rhs(theta: &ScalarField) -> Result<(ScalarField, VectorField)> {
    let u = constitutive_spectral(theta)?;
    let adv = u
        .component(0)
        .mul(&spectral::partial(theta, 0))?
        .add(&u.component(1).mul(&spectral::partial(theta, 1))?)?;
    Ok((spectral::dealias(&adv).scale(-1.0), u))
}

/// Classical RK4 step of the pseudo-spectral SQG system.
pub fn rk4_step(theta: &ScalarField, dt: f64) -> Result<ScalarField> {
    let (k1, _) = transport_rhs(theta)?;
    let (k2, _) = transport_rhs(&theta.axpy(0.5 * dt, &k1)?)?;
    let (k3, _) = transport_rhs(&theta.axpy(0.5 * dt, &k2)?)?;
    let (k4, _) = transport_rhs(&theta.axpy(dt, &k3)?)?;
    let incr = k1.add(&k2.scale(2.0))?.add(&k3.scale(2.0))?.add(&k4)?;
    theta.axpy(dt / 6.0, &incr)
}

/// Far-field integrand `(∇∇^⊥((1−a)Φ)) ∗· P(θu)`.
pub fn far_integrand(ks: &KernelSet, theta: &ScalarField, u: &VectorField) -> Result<VectorField> {
    let flux = spectral::dealias_vector(&u.mul_scalar(theta)?);
    ks.far_conv_contract(&flux)
}

/// Complete state of an SQG simulation.
#[derive(Debug, Clone)]
pub struct SqgState {
    pub t: f64,
    pub dt: f64,
    pub theta: ScalarField,
    pub u: VectorField,
    /// Running value of the time integral of [`far_integrand`].
    pub far_accumulator: VectorField,
    /// Time up to which `far_accumulator` has been integrated.
    pub acc_time: f64,
    pub theta0: ScalarField,
    pub u0: VectorField,
}

impl SqgState {
    pub fn initial(theta0: ScalarField, dt: f64) -> Result<Self> {
        let u0 = constitutive_spectral(&theta0)?;
        Ok(Self {
            t: 0.0,
            dt,
            far_accumulator: VectorField::zeros(*theta0.grid()),
            acc_time: 0.0,
            theta: theta0.clone(),
            u: u0.clone(),
            theta0,
            u0,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.theta.grid()
    }
}

/// `u⁰ + (aΦ) ∗ ∇^⊥(θ(t) − θ⁰) − ∫₀ᵗ (∇∇^⊥((1−a)Φ)) ∗· (θu)`.
pub fn serfati_velocity(state: &SqgState, ks: &KernelSet) -> Result<VectorField> {
    if (state.acc_time - state.t).abs() > 0.5 * state.dt {
        return Err(Error::StaleAccumulator {
            acc_time: state.acc_time,
            t: state.t,
        });
    }
    let near = ks.near_conv_perp(&state.theta.sub(&state.theta0)?)?;
    state.u0.add(&near)?.sub(&state.far_accumulator)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SqgMode {
    /// RK4 pseudo-spectral reference; the far integral is accumulated alongside.
    Spectral,
    /// Semi-Lagrangian transport with the velocity from [`serfati_velocity`].
    Serfati,
}

/// Stop rule from the short-time bound: halt once `C·t·A₀` reaches the limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaltRule {
    pub constant: f64,
    pub a0: f64,
    pub limit: f64,
}

impl HaltRule {
    pub fn triggered(&self, t: f64) -> bool {
        self.constant * t * self.a0 >= self.limit
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub t_end: f64,
    pub dt: f64,
    pub mode: SqgMode,
    /// Store every `output_every`-th step (the initial and final states are always stored).
    pub output_every: usize,
    pub halt: Option<HaltRule>,
    /// Fixed-point sweeps for the implicit trapezoid in serfati mode.
    pub sweeps: usize,
}

impl RunOptions {
    pub fn new(t_end: f64, dt: f64, mode: SqgMode) -> Self {
        Self {
            t_end,
            dt,
            mode,
            output_every: 1,
            halt: None,
            sweeps: 4,
        }
    }
}

/// Stored states plus the reason the run stopped early, if it did.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<SqgState>,
    pub halted: Option<String>,
}

impl Trajectory {
    pub fn last(&self) -> &SqgState {
        self.states.last().expect("trajectory holds the initial state")
    }
}

/// Integrates SQG from `θ⁰` up to `t_end`.
pub fn run_sqg(theta0: &ScalarField, opts: &RunOptions, ks: &KernelSet) -> Result<Trajectory> {
    if !(opts.dt > 0.0 && opts.dt <= 0.1) {
        return Err(Error::Precondition(format!("dt = {} outside (0, 0.1]", opts.dt)));
    }
    if *ks.grid() != *theta0.grid() {
        return Err(Error::GridMismatch("θ⁰ and kernels differ".into()));
    }
    let steps = (opts.t_end / opts.dt).round() as usize;
    let mut state = SqgState::initial(theta0.clone(), opts.dt)?;
    let mut states = vec![state.clone()];
    let mut f_now = far_integrand(ks, &state.theta, &state.u)?;
    let mut u_prev: Option<VectorField> = None;
    let mut halted = None;
    for step in 1..=steps {
        let t_next = step as f64 * opts.dt;
        if let Some(rule) = opts.halt {
            if rule.triggered(t_next) {
                halted = Some(format!("short-time bound denominator reached at t = {t_next}"));
                break;
            }
        }
        let (theta, u, f_next) = match opts.mode {
            SqgMode::Spectral => {
                let theta = rk4_step(&state.theta, opts.dt)?;
                let u = constitutive_spectral(&theta)?;
                let f = far_integrand(ks, &theta, &u)?;
                (theta, u, f)
            }
            SqgMode::Serfati => serfati_step(&state, u_prev.as_ref(), &f_now, opts, ks)?,
        };
        if !theta.is_finite() || !u.is_finite() {
            return Err(Error::SolverHalt {
                t: t_next,
                reason: "non-finite state".into(),
            });
        }
        let acc = state
            .far_accumulator
            .add(&f_now.add(&f_next)?.scale(0.5 * opts.dt))?;
        u_prev = Some(std::mem::replace(&mut state.u, u));
        state.theta = theta;
        state.far_accumulator = acc;
        state.t = t_next;
        state.acc_time = t_next;
        f_now = f_next;
        if step % opts.output_every.max(1) == 0 || step == steps {
            states.push(state.clone());
        }
    }
    if halted.is_some() && states.last().map(|s| s.t) != Some(state.t) {
        states.push(state);
    }
    Ok(Trajectory { states, halted })
}

/// One step in serfati mode: the trapezoid rule makes the velocity update
/// implicit, so it is solved by a few fixed-point sweeps.
fn serfati_step(
    state: &SqgState,
    u_prev: Option<&VectorField>,
    f_now: &VectorField,
    opts: &RunOptions,
    ks: &KernelSet,
) -> Result<(ScalarField, VectorField, VectorField)> {
    let dt = opts.dt;
    let mut guess = match u_prev {
        Some(p) => state.u.scale(2.0).sub(p)?,
        None => state.u.clone(),
    };
    let scale = state.u.sup_norm().max(f64::MIN_POSITIVE);
    let mut out = None;
    for _ in 0..opts.sweeps.max(1) {
        let half = state.u.add(&guess)?.scale(0.5);
        let theta = transport_step(&state.theta, &half, dt)?;
        let f_next = far_integrand(ks, &theta, &guess)?;
        let acc = state
            .far_accumulator
            .add(&f_now.add(&f_next)?.scale(0.5 * dt))?;
        let near = ks.near_conv_perp(&theta.sub(&state.theta0)?)?;
        let u = state.u0.add(&near)?.sub(&acc)?;
        let change = u.sub(&guess)?.sup_norm() / scale;
        guess = u.clone();
        out = Some((theta, u, f_next));
        if change < 1e-13 {
            break;
        }
    }
    // Recompute the integrand with the converged velocity so the accumulator
    // uses the same (θ, u) pair that is stored.
    let (theta, u, _) = out.expect("at least one sweep");
    let f_next = far_integrand(ks, &theta, &u)?;
    Ok((theta, u, f_next))
}

/// Relative sup-norm residual of the kernel-split identity for one state,
/// measured against the spectral constitutive law applied to `θ(t)`.
pub fn identity_residual(state: &SqgState, ks: &KernelSet) -> Result<f64> {
    let reference = constitutive_spectral(&state.theta)?;
    let split = serfati_velocity(state, ks)?;
    let scale = reference.sup_norm();
    let err = split.sub(&reference)?.sup_norm();
    Ok(if scale > 0.0 { err / scale } else { err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelKind;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(2, 4.0 * PI, 64).unwrap()
    }

    #[test]
    fn sine_velocity_and_constant() {
        let g = grid();
        let th = ScalarField::from_fn(g, |x| x[0].sin());
        let u = constitutive_spectral(&th).unwrap();
        let want = ScalarField::from_fn(g, |x| x[0].cos());
        assert!(u.component(0).sup_norm() < 1e-14);
        assert!(u.component(1).sub(&want).unwrap().sup_norm() < 1e-13);
        let c = constitutive_spectral(&ScalarField::constant(g, 3.0)).unwrap();
        assert_eq!(c.sup_norm(), 0.0);
    }

    #[test]
    fn zero_velocity_and_translation() {
        let g = Grid::new(2, 2.0 * PI, 128).unwrap();
        let th = ScalarField::from_fn(g, |x| x[0].sin() + 0.3 * (0.5 * x[1]).cos());
        let out = transport_step(&th, &VectorField::zeros(g), 0.05).unwrap();
        assert_eq!(out, th);
        let u = VectorField::from_fn(g, |_| [1.0, 0.0, 0.0]);
        let dt = 0.05;
        let out = transport_step(&th, &u, dt).unwrap();
        let want = ScalarField::from_fn(g, |x| (x[0] - dt).sin() + 0.3 * (0.5 * x[1]).cos());
        assert!(out.sub(&want).unwrap().sup_norm() < 1e-4);
    }

    #[test]
    fn stale_accumulator_is_rejected_and_t0_is_exact() {
        let g = grid();
        let ks = KernelSet::new(g, 1.0, KernelKind::Sqg2d).unwrap();
        let th = ScalarField::from_fn(g, |x| (0.5 * x[0]).sin() * (0.5 * x[1]).cos());
        let mut st = SqgState::initial(th, 0.01).unwrap();
        assert_eq!(serfati_velocity(&st, &ks).unwrap(), st.u0);
        st.t = 0.1;
        assert!(matches!(
            serfati_velocity(&st, &ks),
            Err(Error::StaleAccumulator { .. })
        ));
    }
}
