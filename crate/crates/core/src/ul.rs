//! Uniformly local norms.
//!
//! `sup_x` is taken over probe centers on a sub-lattice (every `stride`-th
//! node per axis), so every value here is a lower bound for the continuum
//! supremum. Integrals are lattice sums weighted by `dx^d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::par;
use crate::smooth::UNIT_STEP;
use crate::spectral::{self, MultiIndex};

/// Probe-center spacing (in lattice nodes) used unless stated otherwise.
pub const DEFAULT_STRIDE: usize = 4;

/// Sub-cell sampling per axis when weighting cells cut by the unit sphere.
const COVERAGE_SAMPLES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UlNormReport {
    pub norm: String,
    pub exponent: f64,
    pub lambda: f64,
    pub value: f64,
    /// Probe center attaining the largest localized contribution.
    pub argmax: [f64; 3],
    /// Per-multi-index contributions (empty for plain `L^p_ul`).
    pub breakdown: Vec<(String, f64)>,
}

/// Lattice offsets with quadrature weights (weights already include `dx^d`).
#[derive(Debug, Clone)]
struct Stencil {
    offsets: Vec<([i64; 3], f64)>,
}

impl Stencil {
    /// Unit ball, boundary cells weighted by their sampled coverage fraction.
    fn unit_ball(grid: &Grid) -> Self {
        let dx = grid.dx();
        let m = (1.0 / dx).ceil() as i64 + 1;
        let m3 = if grid.dim() == 3 { m } else { 0 };
        let s = COVERAGE_SAMPLES;
        let sub: Vec<f64> = (0..s).map(|i| (i as f64 + 0.5) / s as f64 - 0.5).collect();
        let sub3: Vec<f64> = if grid.dim() == 3 { sub.clone() } else { vec![0.0] };
        let per_cell = (s * s * sub3.len()) as f64;
        let mut offsets = Vec::new();
        for a in -m..=m {
            for b in -m..=m {
                for c in -m3..=m3 {
                    let mut hit = 0usize;
                    for &p in &sub {
                        for &q in &sub {
                            for &r in &sub3 {
                                let y = [(a as f64 + p) * dx, (b as f64 + q) * dx, (c as f64 + r) * dx];
                                if y[0] * y[0] + y[1] * y[1] + y[2] * y[2] < 1.0 {
                                    hit += 1;
                                }
                            }
                        }
                    }
                    if hit > 0 {
                        offsets.push(([a, b, c], hit as f64 / per_cell * grid.cell_volume()));
                    }
                }
            }
        }
        Self { offsets }
    }

    /// Squared bump `φ((y−x)/λ)²` sampled at lattice offsets.
    fn bump_squared(grid: &Grid, lambda: f64) -> Self {
        let dx = grid.dx();
        let m = (2.0 * lambda / dx).ceil() as i64;
        let m3 = if grid.dim() == 3 { m } else { 0 };
        let mut offsets = Vec::new();
        for a in -m..=m {
            for b in -m..=m {
                for c in -m3..=m3 {
                    let r = dx * ((a * a + b * b + c * c) as f64).sqrt();
                    let w = UNIT_STEP.eval(r / lambda);
                    if w > 0.0 {
                        offsets.push(([a, b, c], w * w * grid.cell_volume()));
                    }
                }
            }
        }
        Self { offsets }
    }

    /// `sup_probe Σ_o w_o · density(probe + o)` and the maximizing probe index.
    fn sup(&self, grid: &Grid, stride: usize, density: &[f64]) -> (f64, usize) {
        let probes = probe_indices(grid, stride);
        let sums = par::map_slice(&probes, |&i| {
            self.offsets
                .iter()
                .map(|(o, w)| w * density[grid.shifted(i, *o)])
                .sum::<f64>()
        });
        let mut best = (f64::NEG_INFINITY, probes[0]);
        for (s, &p) in sums.iter().zip(&probes) {
            if *s > best.0 {
                best = (*s, p);
            }
        }
        best
    }
}

fn probe_indices(grid: &Grid, stride: usize) -> Vec<usize> {
    let stride = stride.max(1);
    (0..grid.len())
        .filter(|&i| {
            let k = grid.unravel(i);
            (0..grid.dim()).all(|a| k[a].is_multiple_of(stride))
        })
        .collect()
}

fn check_components(comps: &[ScalarField]) -> Result<Grid> {
    let first = comps
        .first()
        .ok_or_else(|| Error::Precondition("no components".into()))?;
    for c in comps {
        first.check_same_grid(c)?;
    }
    Ok(*first.grid())
}

/// Pointwise `Σ_c |f_c|^p` (Euclidean magnitude for `p = 2`).
fn density(comps: &[ScalarField], p: f64) -> Vec<f64> {
    let g = *comps[0].grid();
    par::map_range(g.len(), |i| {
        let m2: f64 = comps.iter().map(|c| c.values()[i].powi(2)).sum();
        if p == 2.0 {
            m2
        } else {
            m2.sqrt().powf(p)
        }
    })
}

/// `‖f‖_{L^p_ul} = sup_x (∫_{|x−y|<1} |f|^p)^{1/p}` with probe stride `stride`.
pub fn lp_ul_norm_with(comps: &[ScalarField], p: f64, stride: usize) -> Result<UlNormReport> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Precondition(format!("p must lie in [1, ∞), got {p}")));
    }
    let g = check_components(comps)?;
    let st = Stencil::unit_ball(&g);
    let (v, at) = st.sup(&g, stride, &density(comps, p));
    Ok(UlNormReport {
        norm: "l2ul".into(),
        exponent: p,
        lambda: 1.0,
        value: v.max(0.0).powf(1.0 / p),
        argmax: g.point(at),
        breakdown: Vec::new(),
    })
}

pub fn lp_ul_norm(f: &ScalarField, p: f64) -> Result<UlNormReport> {
    lp_ul_norm_with(std::slice::from_ref(f), p, DEFAULT_STRIDE)
}

/// `sup_x ‖φ_{x,λ} f‖_{L²}` over the components jointly.
pub fn bump_l2_sup(comps: &[ScalarField], lambda: f64, stride: usize) -> Result<(f64, [f64; 3])> {
    let g = check_components(comps)?;
    check_lambda(&g, lambda)?;
    let st = Stencil::bump_squared(&g, lambda);
    let (v, at) = st.sup(&g, stride, &density(comps, 2.0));
    Ok((v.max(0.0).sqrt(), g.point(at)))
}

fn check_lambda(g: &Grid, lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || 2.0 * lambda >= g.half_width() {
        return Err(Error::Precondition(format!(
            "bump scale {lambda} must be positive with 2λ < L = {}",
            g.half_width()
        )));
    }
    Ok(())
}

fn alpha_label(a: MultiIndex, dim: usize) -> String {
    a.0[..dim].iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn derivatives(comps: &[ScalarField], alpha: MultiIndex) -> Result<Vec<ScalarField>> {
    comps.iter().map(|c| spectral::derivative(c, alpha)).collect()
}

/// `‖f‖_{H^s_{ul,λ}} = Σ_{|α|≤s} sup_x ‖φ_{x,λ} D^α f‖_{L²}`.
pub fn hs_ul_norm_with(comps: &[ScalarField], s: usize, lambda: f64, stride: usize) -> Result<UlNormReport> {
    if s > 6 {
        return Err(Error::Precondition(format!("s = {s} exceeds 6")));
    }
    let g = check_components(comps)?;
    check_lambda(&g, lambda)?;
    let st = Stencil::bump_squared(&g, lambda);
    let mut value = 0.0;
    let mut best = (f64::NEG_INFINITY, [0.0; 3]);
    let mut breakdown = Vec::new();
    for alpha in MultiIndex::up_to(g.dim(), s) {
        let d = derivatives(comps, alpha)?;
        let (v, at) = st.sup(&g, stride, &density(&d, 2.0));
        let v = v.max(0.0).sqrt();
        if v > best.0 {
            best = (v, g.point(at));
        }
        value += v;
        breakdown.push((alpha_label(alpha, g.dim()), v));
    }
    Ok(UlNormReport {
        norm: "hsul".into(),
        exponent: s as f64,
        lambda,
        value,
        argmax: best.1,
        breakdown,
    })
}

pub fn hs_ul_norm(f: &ScalarField, s: usize, lambda: f64) -> Result<UlNormReport> {
    hs_ul_norm_with(std::slice::from_ref(f), s, lambda, DEFAULT_STRIDE)
}

pub fn hs_ul_norm_vector(v: &VectorField, s: usize, lambda: f64) -> Result<f64> {
    Ok(hs_ul_norm_with(v.components(), s, lambda, DEFAULT_STRIDE)?.value)
}

/// `Σ_{|α|≤s} ‖D^α f‖_{L²_ul}` with sharp unit balls.
pub fn hs_ul_sum_norm_with(comps: &[ScalarField], s: usize, stride: usize) -> Result<UlNormReport> {
    let g = check_components(comps)?;
    let st = Stencil::unit_ball(&g);
    let mut value = 0.0;
    let mut best = (f64::NEG_INFINITY, [0.0; 3]);
    let mut breakdown = Vec::new();
    for alpha in MultiIndex::up_to(g.dim(), s) {
        let d = derivatives(comps, alpha)?;
        let (v, at) = st.sup(&g, stride, &density(&d, 2.0));
        let v = v.max(0.0).sqrt();
        if v > best.0 {
            best = (v, g.point(at));
        }
        value += v;
        breakdown.push((alpha_label(alpha, g.dim()), v));
    }
    Ok(UlNormReport {
        norm: "hsul-sum".into(),
        exponent: s as f64,
        lambda: 1.0,
        value,
        argmax: best.1,
        breakdown,
    })
}

/// `‖f‖_{C̃^k} = Σ_{|α|≤k} ‖D^α f‖_∞` (Euclidean magnitude over components).
pub fn c_tilde_norm(comps: &[ScalarField], k: usize) -> Result<f64> {
    let g = check_components(comps)?;
    let mut total = 0.0;
    for alpha in MultiIndex::up_to(g.dim(), k) {
        let d = derivatives(comps, alpha)?;
        let dens = density(&d, 2.0);
        total += par::max_range(dens.len(), |i| dens[i]).sqrt();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_ball_area() {
        let g = Grid::new(2, 2.0 * PI, 64).unwrap();
        let one = ScalarField::constant(g, 1.0);
        let r = lp_ul_norm(&one, 2.0).unwrap();
        assert!((r.value / PI.sqrt() - 1.0).abs() < 0.02, "{}", r.value);
        let zero = ScalarField::zeros(g);
        assert_eq!(lp_ul_norm(&zero, 2.0).unwrap().value, 0.0);
    }

    #[test]
    fn bump_norm_of_constant_is_bracketed() {
        let g = Grid::new(2, 2.0 * PI, 64).unwrap();
        let one = ScalarField::constant(g, 1.0);
        let v = hs_ul_norm(&one, 0, 1.0).unwrap().value;
        assert!(v >= PI.sqrt() && v <= (4.0 * PI).sqrt(), "{v}");
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = Grid::new(2, PI, 32).unwrap();
        let f = ScalarField::zeros(g);
        assert!(lp_ul_norm(&f, 0.5).is_err());
        assert!(hs_ul_norm(&f, 7, 1.0).is_err());
        assert!(hs_ul_norm(&f, 1, 2.0).is_err());
    }
}
