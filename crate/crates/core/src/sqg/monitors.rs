//! Runtime checks of the SQG a priori estimates.
//!
//! Norms are measured once per stored state ([`SqgNorms`]); the same table
//! then yields either the smallest constants that make every estimate hold
//! (calibration) or the LHS/RHS series for frozen constants (monitoring).

use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::Result;
use crate::field::{ScalarField, VectorField};
use crate::lp::DyadicFamily;
use crate::spectral;
use crate::ul;

/// Constants standing in for the unspecified `C` of each estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqgConstants {
    pub short_time: f64,
    pub gronwall: f64,
    pub velocity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorParams {
    /// Hölder exponent of the short-time bound.
    pub r: f64,
    /// Sobolev index of the uniformly local estimates.
    pub s: usize,
    /// Bump radius of the uniformly local norms.
    pub lambda: f64,
}

/// Per-state norms feeding every monitor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqgNorms {
    pub t: Vec<f64>,
    pub u_sup: Vec<f64>,
    pub theta_cr: Vec<f64>,
    pub theta_hs: Vec<f64>,
    pub u_hs: Vec<f64>,
    pub u_c1: Vec<f64>,
    pub grad_theta_sup: Vec<f64>,
    /// `max_j ‖Δ̇_j u − Δ̇_j∇^⊥(−Δ)^{-1/2}θ‖_∞` per state.
    pub lp_residual: Vec<f64>,
}

fn lp_constitutive_residual(family: &DyadicFamily, theta: &ScalarField, u: &VectorField) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for j in family.block_range(true) {
        // ∇^⊥ = (−∂₂, ∂₁), so component 0 uses −R₂ and component 1 uses R₁.
        let r0 = family.riesz_block(theta, 1, j)?.scale(-1.0);
        let r1 = family.riesz_block(theta, 0, j)?;
        let b0 = family.block(u.component(0), j, true)?;
        let b1 = family.block(u.component(1), j, true)?;
        worst = worst.max(b0.sub(&r0)?.sup_norm()).max(b1.sub(&r1)?.sup_norm());
    }
    Ok(worst)
}

impl SqgNorms {
    pub fn measure(traj: &Trajectory, params: &MonitorParams, family: &DyadicFamily) -> Result<Self> {
        let mut out = SqgNorms {
            t: Vec::new(),
            u_sup: Vec::new(),
            theta_cr: Vec::new(),
            theta_hs: Vec::new(),
            u_hs: Vec::new(),
            u_c1: Vec::new(),
            grad_theta_sup: Vec::new(),
            lp_residual: Vec::new(),
        };
        for st in &traj.states {
            out.t.push(st.t);
            out.u_sup.push(st.u.max_component_sup());
            out.theta_cr.push(family.holder_norm(&st.theta, params.r, false)?.value);
            out.theta_hs.push(ul::hs_ul_norm(&st.theta, params.s, params.lambda)?.value);
            out.u_hs.push(ul::hs_ul_norm_vector(&st.u, params.s, params.lambda)?);
            out.u_c1.push(ul::c_tilde_norm(st.u.components(), 1)?);
            out.grad_theta_sup.push(spectral::grad(&st.theta).magnitude().sup_norm());
            out.lp_residual.push(lp_constitutive_residual(family, &st.theta, &st.u)?);
        }
        Ok(out)
    }

    fn a0(&self) -> f64 {
        self.u_sup[0] + self.theta_cr[0]
    }

    fn running_sup(&self) -> Vec<f64> {
        let mut m: f64 = 0.0;
        self.u_sup
            .iter()
            .zip(&self.theta_cr)
            .map(|(u, c)| {
                m = m.max(u + c);
                m
            })
            .collect()
    }

    /// `∫₀ᵗ (‖u‖_{C̃¹} + ‖∇θ‖_∞)` by the trapezoid rule over stored states.
    fn gronwall_integral(&self) -> Vec<f64> {
        let g: Vec<f64> = self.u_c1.iter().zip(&self.grad_theta_sup).map(|(a, b)| a + b).collect();
        cumulative_trapezoid(&self.t, &g)
    }

    /// Smallest constants for which every estimate holds on this run.
    pub fn required_constants(&self) -> SqgConstants {
        let a0 = self.a0();
        let sup = self.running_sup();
        let short_time = if a0 > 0.0 {
            sup.iter()
                .zip(&self.t)
                .map(|(l, t)| l / (a0 * (1.0 + t * l)))
                .fold(0.0, f64::max)
        } else {
            0.0
        };
        let integral = self.gronwall_integral();
        let l0 = self.theta_hs[0].powi(2);
        let mut gronwall: f64 = 0.0;
        for (k, th) in self.theta_hs.iter().enumerate() {
            let l = th.powi(2);
            if l > l0 {
                gronwall = gronwall.max(if integral[k] > 0.0 {
                    (l / l0).ln() / integral[k]
                } else {
                    f64::INFINITY
                });
            }
        }
        let velocity = (0..self.t.len())
            .map(|k| ratio(self.u_hs[k], self.theta_hs[k] + self.u_c1[k]))
            .fold(0.0, f64::max);
        SqgConstants {
            short_time,
            gronwall,
            velocity,
        }
    }

    /// LHS/RHS series with frozen constants.
    pub fn monitors(&self, c: &SqgConstants) -> MonitorReport {
        let a0 = self.a0();
        let sup = self.running_sup();
        let short = MonitorSeries::from_pairs(
            "short_time",
            &self.t,
            self.t.iter().zip(&sup).map(|(t, l)| {
                let den = 1.0 - c.short_time * t * a0;
                let rhs = if den > 0.0 { c.short_time * a0 / den } else { f64::INFINITY };
                (*l, rhs)
            }),
        );
        let integral = self.gronwall_integral();
        let l0 = self.theta_hs[0].powi(2);
        let gron = MonitorSeries::from_pairs(
            "gronwall_sqg",
            &self.t,
            (0..self.t.len()).map(|k| (self.theta_hs[k].powi(2), l0 * (c.gronwall * integral[k]).exp())),
        );
        let vel = MonitorSeries::from_pairs(
            "velocity_hsul",
            &self.t,
            (0..self.t.len()).map(|k| (self.u_hs[k], c.velocity * (self.theta_hs[k] + self.u_c1[k]))),
        );
        MonitorReport {
            series: vec![short, gron, vel],
            lp_residual: self.lp_residual.iter().copied().fold(0.0, f64::max),
        }
    }
}

/// `lhs/rhs`, with `0/0 = 0`.
pub fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs > 0.0 {
        lhs / rhs
    } else {
        f64::INFINITY
    }
}

pub fn cumulative_trapezoid(t: &[f64], g: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(t.len());
    for k in 0..t.len() {
        if k > 0 {
            acc += 0.5 * (t[k] - t[k - 1]) * (g[k] + g[k - 1]);
        }
        out.push(acc);
    }
    out
}

/// One estimate tracked along a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorSeries {
    pub name: String,
    pub t: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub ratio: Vec<f64>,
}

impl MonitorSeries {
    pub fn from_pairs<I: IntoIterator<Item = (f64, f64)>>(name: &str, t: &[f64], pairs: I) -> Self {
        let (lhs, rhs): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let ratio = lhs.iter().zip(&rhs).map(|(l, r)| ratio(*l, *r)).collect();
        Self {
            name: name.into(),
            t: t.to_vec(),
            lhs,
            rhs,
            ratio,
        }
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratio.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub series: Vec<MonitorSeries>,
    pub lp_residual: f64,
}

impl MonitorReport {
    pub fn max_ratio(&self) -> f64 {
        self.series.iter().map(MonitorSeries::max_ratio).fold(0.0, f64::max)
    }

    /// Rows `(t, name, lhs, rhs, ratio)` in time order per series.
    pub fn csv_rows(&self) -> Vec<(f64, String, f64, f64, f64)> {
        self.series
            .iter()
            .flat_map(|s| (0..s.t.len()).map(move |k| (s.t[k], s.name.clone(), s.lhs[k], s.rhs[k], s.ratio[k])))
            .collect()
    }
}

/// Measures a trajectory and evaluates every monitor with frozen constants.
pub fn estimate_monitors(
    traj: &Trajectory,
    params: &MonitorParams,
    constants: &SqgConstants,
    family: &DyadicFamily,
) -> Result<MonitorReport> {
    Ok(SqgNorms::measure(traj, params, family)?.monitors(constants))
}
