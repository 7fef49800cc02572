//! Pseudo-spectral vorticity stepper on tiny 3D grids, the running far-field
//! integral of the kernel-split velocity identity, and the Sobolev monitors.

use serde::{Deserialize, Serialize};

use super::biot_savart;
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::kernels::KernelSet;
use crate::sqg::monitors::{cumulative_trapezoid, ratio, MonitorReport, MonitorSeries};
use crate::{spectral, ul};

#[derive(Debug, Clone)]
pub struct EulerState {
    pub t: f64,
    pub u: VectorField,
    pub omega: VectorField,
    /// Time integral of the far-field flux `−∇∇((1−a)K^k) ∗· (u⊗u) + ∇div((1−a)K) ∗· (u^k u)`.
    pub far_accumulator: VectorField,
    pub u0: VectorField,
    pub omega0: VectorField,
}

impl EulerState {
    pub fn initial(u0: VectorField) -> Result<Self> {
        if u0.grid().dim() != 3 {
            return Err(Error::GridMismatch("Euler state needs a 3D grid".into()));
        }
        let omega0 = spectral::curl(&u0)?;
        Ok(Self {
            t: 0.0,
            far_accumulator: VectorField::zeros(*u0.grid()),
            omega: omega0.clone(),
            u: u0.clone(),
            u0,
            omega0,
        })
    }

    pub fn energy(&self) -> f64 {
        self.u.l2_norm().powi(2)
    }
}

fn velocity_from(omega: &VectorField, mean: &[f64]) -> Result<VectorField> {
    let u = biot_savart(omega)?;
    VectorField::new(
        u.components()
            .iter()
            .zip(mean)
            .map(|(c, m)| c.map(|v| v + m))
            .collect(),
    )
}

/// `∂_t ω = curl P(u × ω)`.
fn vorticity_rhs(omega: &VectorField, mean: &[f64]) -> Result<VectorField> {
    let u = velocity_from(omega, mean)?;
    let flux = spectral::dealias_vector(&u.cross(omega)?);
    spectral::curl(&flux)
}

/// One RK4 step in vorticity form with 2/3 dealiasing of the nonlinear term.
pub fn step_euler3d(state: &EulerState, dt: f64) -> Result<EulerState> {
    let mean = state.u0.mean();
    let w = &state.omega;
    let k1 = vorticity_rhs(w, &mean)?;
    let k2 = vorticity_rhs(&w.axpy(0.5 * dt, &k1)?, &mean)?;
    let k3 = vorticity_rhs(&w.axpy(0.5 * dt, &k2)?, &mean)?;
    let k4 = vorticity_rhs(&w.axpy(dt, &k3)?, &mean)?;
    let incr = k1.add(&k2.scale(2.0))?.add(&k3.scale(2.0))?.add(&k4)?;
    let omega = w.axpy(dt / 6.0, &incr)?;
    let u = velocity_from(&omega, &mean)?;
    Ok(EulerState {
        t: state.t + dt,
        u,
        omega,
        far_accumulator: state.far_accumulator.clone(),
        u0: state.u0.clone(),
        omega0: state.omega0.clone(),
    })
}

/// Stored states of a run.
#[derive(Debug, Clone)]
pub struct EulerRun {
    pub states: Vec<EulerState>,
    pub dt: f64,
}

/// Integrates to `t_end`, accumulating the far flux by the trapezoid rule.
///
/// Fails if the energy drifts by more than 1% per unit time.
pub fn run_euler(u0: &VectorField, t_end: f64, dt: f64, output_every: usize, ks: &KernelSet) -> Result<EulerRun> {
    let steps = (t_end / dt).round() as usize;
    let mut state = EulerState::initial(u0.clone())?;
    let e0 = state.energy();
    let mut f_now = ks.far_flux_3d(&state.u)?;
    let mut states = vec![state.clone()];
    for step in 1..=steps {
        let mut next = step_euler3d(&state, dt)?;
        let f_next = ks.far_flux_3d(&next.u)?;
        next.far_accumulator = state.far_accumulator.add(&f_now.add(&f_next)?.scale(0.5 * dt))?;
        next.t = step as f64 * dt;
        if !next.omega.is_finite() {
            return Err(Error::SolverHalt {
                t: next.t,
                reason: "non-finite vorticity".into(),
            });
        }
        let drift = (next.energy() - e0).abs() / e0.max(f64::MIN_POSITIVE);
        if e0 > 0.0 && drift > 0.01 * next.t.max(dt) {
            return Err(Error::SolverHalt {
                t: next.t,
                reason: format!("energy drift {drift:.3e}"),
            });
        }
        state = next;
        f_now = f_next;
        if step % output_every.max(1) == 0 || step == steps {
            states.push(state.clone());
        }
    }
    Ok(EulerRun { states, dt })
}

/// Relative residual of
/// `u(t) = u⁰ + (a_λK) ∗× (ω(t) − ω⁰) + ∫₀ᵗ far flux`
/// at every stored time.
pub fn serfati3d_residual(run: &EulerRun, ks: &KernelSet) -> Result<Vec<(f64, f64)>> {
    run.states
        .iter()
        .map(|st| {
            let near = ks.near_cross(&st.omega.sub(&st.omega0)?)?;
            let rebuilt = st.u0.add(&near)?.add(&st.far_accumulator)?;
            let scale = st.u.max_component_sup();
            let err = rebuilt.sub(&st.u)?.max_component_sup();
            Ok((st.t, if scale > 0.0 { err / scale } else { err }))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerConstants {
    /// Vorticity Gronwall estimate.
    pub vorticity: f64,
    /// `‖u‖_{H^s_ul} ≤ C(‖ω‖_{H^{s−1}_ul} + ‖u‖_∞)`.
    pub velocity: f64,
}

/// Per-state norms for the 3D monitors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerNorms {
    pub t: Vec<f64>,
    pub omega_hs: Vec<f64>,
    pub u_hs: Vec<f64>,
    pub u_sup: Vec<f64>,
    pub u_c1: Vec<f64>,
}

impl EulerNorms {
    pub fn measure(run: &EulerRun, s: usize, lambda: f64) -> Result<Self> {
        if s < 1 {
            return Err(Error::Precondition("s must be at least 1".into()));
        }
        let mut out = EulerNorms {
            t: Vec::new(),
            omega_hs: Vec::new(),
            u_hs: Vec::new(),
            u_sup: Vec::new(),
            u_c1: Vec::new(),
        };
        for st in &run.states {
            out.t.push(st.t);
            out.omega_hs.push(ul::hs_ul_norm_vector(&st.omega, s - 1, lambda)?);
            out.u_hs.push(ul::hs_ul_norm_vector(&st.u, s, lambda)?);
            out.u_sup.push(st.u.max_component_sup());
            out.u_c1.push(ul::c_tilde_norm(st.u.components(), 1)?);
        }
        Ok(out)
    }

    fn integral(&self) -> Vec<f64> {
        let g: Vec<f64> = (0..self.t.len())
            .map(|k| self.u_c1[k] * (self.u_sup[k].powi(2) + 1.0))
            .collect();
        cumulative_trapezoid(&self.t, &g)
    }

    pub fn required_constants(&self) -> EulerConstants {
        let base = 1.0 + self.omega_hs[0].powi(2);
        let integral = self.integral();
        let mut vorticity: f64 = 0.0;
        for k in 0..self.t.len() {
            let l = self.omega_hs[k].powi(2);
            if l > base {
                vorticity = vorticity.max(if integral[k] > 0.0 {
                    (l / base).ln() / integral[k]
                } else {
                    f64::INFINITY
                });
            }
        }
        let velocity = (0..self.t.len())
            .map(|k| ratio(self.u_hs[k], self.omega_hs[k] + self.u_sup[k]))
            .fold(0.0, f64::max);
        EulerConstants { vorticity, velocity }
    }

    pub fn monitors(&self, c: &EulerConstants) -> MonitorReport {
        let base = 1.0 + self.omega_hs[0].powi(2);
        let integral = self.integral();
        let n = self.t.len();
        let gron = MonitorSeries::from_pairs(
            "gronwall_vorticity",
            &self.t,
            (0..n).map(|k| (self.omega_hs[k].powi(2), base * (c.vorticity * integral[k]).exp())),
        );
        let vel = MonitorSeries::from_pairs(
            "velocity_vorticity",
            &self.t,
            (0..n).map(|k| (self.u_hs[k], c.velocity * (self.omega_hs[k] + self.u_sup[k]))),
        );
        MonitorReport {
            series: vec![gron, vel],
            lp_residual: 0.0,
        }
    }
}

/// Measures a run and evaluates the 3D monitors with frozen constants.
pub fn uomega_bound_check(run: &EulerRun, s: usize, lambda: f64, c: &EulerConstants) -> Result<MonitorReport> {
    Ok(EulerNorms::measure(run, s, lambda)?.monitors(c))
}

/// Shear flow `(sin x₂, 0, 0)`, a steady solution.
pub fn shear_flow(grid: crate::grid::Grid) -> VectorField {
    VectorField::from_fn(grid, |x| [x[1].sin(), 0.0, 0.0])
}

/// Taylor-Green velocity `(cos x₁ sin x₂, −sin x₁ cos x₂, 0)`.
pub fn taylor_green(grid: crate::grid::Grid) -> VectorField {
    VectorField::from_fn(grid, |x| [x[0].cos() * x[1].sin(), -x[0].sin() * x[1].cos(), 0.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::kernels::KernelKind;
    use std::f64::consts::PI;

    #[test]
    fn shear_is_steady_and_identity_holds() {
        let g = Grid::new(3, PI, 16).unwrap();
        let ks = KernelSet::new(g, 0.35, KernelKind::Euler3d).unwrap();
        let u0 = shear_flow(g);
        let run = run_euler(&u0, 0.25, 1.0 / 32.0, 4, &ks).unwrap();
        let last = run.states.last().unwrap();
        assert!(last.u.sub(&u0).unwrap().max_component_sup() < 1e-6);
        for (_, r) in serfati3d_residual(&run, &ks).unwrap() {
            assert!(r < 1e-3, "{r}");
        }
    }
}
