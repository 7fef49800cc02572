//! Successive approximations for SQG: each iterate transports its scalar by the
//! previous velocity and rebuilds its own velocity from the kernel-split
//! identity.

use serde::{Deserialize, Serialize};

use super::{far_integrand, transport_step};
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::kernels::KernelSet;
use crate::lp::DyadicFamily;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    pub n_max: usize,
    pub t_end: f64,
    pub dt: f64,
    /// Hölder exponent `r > 1`; differences are measured in `C^{r−1}`.
    pub r: f64,
}

/// One ledger row, evaluated at the final time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub n: usize,
    pub u_sup: f64,
    pub theta_cr: f64,
    /// `D_n(T) = ‖v^n(T)‖_∞ + ‖η^n(T)‖_{C^{r−1}}`.
    pub d_n: f64,
    /// `sup_t D_n(t)` over the time grid.
    pub d_n_sup: f64,
}

/// A single iterate sampled on the shared time grid.
#[derive(Debug, Clone)]
pub struct Iterate {
    pub theta: Vec<ScalarField>,
    pub u: Vec<VectorField>,
}

#[derive(Debug, Clone)]
pub struct IterationLedger {
    rows: Vec<LedgerRow>,
    /// Last two iterates, oldest first.
    pub previous: Iterate,
    pub current: Iterate,
}

impl IterationLedger {
    pub fn rows(&self) -> &[LedgerRow] {
        &self.rows
    }

    fn push(&mut self, row: LedgerRow) {
        self.rows.push(row);
    }

    /// `D_n(T)` for the given `n`, if recorded.
    pub fn d(&self, n: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.n == n).map(|r| r.d_n)
    }
}

fn difference(
    family: &DyadicFamily,
    r: f64,
    a: (&ScalarField, &VectorField),
    b: (&ScalarField, &VectorField),
) -> Result<f64> {
    let v = a.1.sub(b.1)?.max_component_sup();
    let eta = family.holder_norm(&a.0.sub(b.0)?, r - 1.0, false)?.value;
    Ok(v + eta)
}

/// Next iterate from the current one.
///
/// `θ^{n+1}` starts from `S_{n+2}θ⁰` and is carried by `u^n` (midpoint-in-time
/// velocity on each step); `u^{n+1}` follows the identity with the far
/// integral of `θ^{n+1}u^n` accumulated by the trapezoid rule.
pub fn next_iterate(
    prev: &Iterate,
    n: usize,
    theta0: &ScalarField,
    u0: &VectorField,
    dt: f64,
    family: &DyadicFamily,
    ks: &KernelSet,
) -> Result<Iterate> {
    let level = n as i32 + 2;
    let th_init = family.low_pass(theta0, level)?;
    let u_init = VectorField::new(
        u0.components()
            .iter()
            .map(|c| family.low_pass(c, level))
            .collect::<Result<_>>()?,
    )?;
    let steps = prev.theta.len() - 1;
    let mut theta = Vec::with_capacity(steps + 1);
    let mut u = Vec::with_capacity(steps + 1);
    let mut acc = VectorField::zeros(*theta0.grid());
    let mut f_now = far_integrand(ks, &th_init, &prev.u[0])?;
    theta.push(th_init.clone());
    u.push(u_init.clone());
    for k in 0..steps {
        let half = prev.u[k].add(&prev.u[k + 1])?.scale(0.5);
        let th = transport_step(&theta[k], &half, dt)?;
        let f_next = far_integrand(ks, &th, &prev.u[k + 1])?;
        acc = acc.add(&f_now.add(&f_next)?.scale(0.5 * dt))?;
        let near = ks.near_conv_perp(&th.sub(&th_init)?)?;
        let un = u_init.add(&near)?.sub(&acc)?;
        if !un.is_finite() || !th.is_finite() {
            return Err(Error::SolverHalt {
                t: (k + 1) as f64 * dt,
                reason: format!("iterate {} blew up", n + 1),
            });
        }
        theta.push(th);
        u.push(un);
        f_now = f_next;
    }
    Ok(Iterate { theta, u })
}

/// Runs the scheme up to iterate `n_max` and records `D_n` for each iterate.
pub fn picard_iterate(
    theta0: &ScalarField,
    u0: &VectorField,
    opts: &PicardOptions,
    family: &DyadicFamily,
    ks: &KernelSet,
) -> Result<IterationLedger> {
    if opts.n_max < 1 || opts.n_max > 64 {
        return Err(Error::Precondition(format!(
            "n_max = {} outside the resolvable range",
            opts.n_max
        )));
    }
    if !(opts.r > 1.0) {
        return Err(Error::Precondition("Hölder exponent must exceed 1".into()));
    }
    let steps = (opts.t_end / opts.dt).round() as usize;
    let th1 = family.low_pass(theta0, 2)?;
    let u1 = VectorField::new(
        u0.components()
            .iter()
            .map(|c| family.low_pass(c, 2))
            .collect::<Result<_>>()?,
    )?;
    let first = Iterate {
        theta: vec![th1.clone(); steps + 1],
        u: vec![u1.clone(); steps + 1],
    };
    let d1 = difference(family, opts.r, (&th1, &u1), (theta0, u0))?;
    let mut ledger = IterationLedger {
        rows: Vec::new(),
        previous: first.clone(),
        current: first,
    };
    ledger.push(LedgerRow {
        n: 1,
        u_sup: u1.max_component_sup(),
        theta_cr: family.holder_norm(&th1, opts.r, false)?.value,
        d_n: d1,
        d_n_sup: d1,
    });
    for n in 1..opts.n_max {
        let next = next_iterate(&ledger.current, n, theta0, u0, opts.dt, family, ks)?;
        let row = ledger_row(n + 1, &next, &ledger.current, family, opts.r)?;
        ledger.push(row);
        ledger.previous = std::mem::replace(&mut ledger.current, next);
    }
    Ok(ledger)
}

/// Ledger row for iterate `n` given its predecessor.
pub fn ledger_row(n: usize, cur: &Iterate, prev: &Iterate, family: &DyadicFamily, r: f64) -> Result<LedgerRow> {
    let last = cur.theta.len() - 1;
    let mut d_sup: f64 = 0.0;
    let mut d_end = 0.0;
    for k in 0..=last {
        let d = difference(family, r, (&cur.theta[k], &cur.u[k]), (&prev.theta[k], &prev.u[k]))?;
        d_sup = d_sup.max(d);
        if k == last {
            d_end = d;
        }
    }
    Ok(LedgerRow {
        n,
        u_sup: cur.u[last].max_component_sup(),
        theta_cr: family.holder_norm(&cur.theta[last], r, false)?.value,
        d_n: d_end,
        d_n_sup: d_sup,
    })
}

/// Relative sup-norm change produced by one more application of the scheme,
/// maximised over the time grid.
pub fn fixed_point_defect(
    ledger: &IterationLedger,
    n_max: usize,
    theta0: &ScalarField,
    u0: &VectorField,
    dt: f64,
    family: &DyadicFamily,
    ks: &KernelSet,
) -> Result<f64> {
    let cur = &ledger.current;
    let next = next_iterate(cur, n_max, theta0, u0, dt, family, ks)?;
    let mut worst: f64 = 0.0;
    for k in 0..cur.theta.len() {
        let ts = cur.theta[k].sup_norm().max(f64::MIN_POSITIVE);
        let us = cur.u[k].max_component_sup().max(f64::MIN_POSITIVE);
        let dth = next.theta[k].sub(&cur.theta[k])?.sup_norm() / ts;
        let du = next.u[k].sub(&cur.u[k])?.max_component_sup() / us;
        worst = worst.max(dth.max(du));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::kernels::KernelKind;
    use crate::sqg::constitutive_spectral;
    use std::f64::consts::PI;

    #[test]
    fn first_iterate_is_low_pass_and_sine_is_reproduced() {
        let g = Grid::new(2, 4.0 * PI, 64).unwrap();
        let family = DyadicFamily::new(g).unwrap();
        let ks = KernelSet::new(g, 1.0, KernelKind::Sqg2d).unwrap();
        let th0 = ScalarField::from_fn(g, |x| x[0].sin());
        let u0 = constitutive_spectral(&th0).unwrap();
        let opts = PicardOptions {
            n_max: 4,
            t_end: 0.2,
            dt: 0.02,
            r: 1.5,
        };
        let ledger = picard_iterate(&th0, &u0, &opts, &family, &ks).unwrap();
        assert_eq!(ledger.rows().len(), 4);
        for k in 0..ledger.current.theta.len() {
            assert!(ledger.current.theta[k].sub(&th0).unwrap().sup_norm() < 1e-5);
            assert!(ledger.current.u[k].sub(&u0).unwrap().sup_norm() < 1e-5);
        }
    }
}
