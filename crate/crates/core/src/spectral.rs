//! Fourier multipliers and the differential operators built from them.
//!
//! Every operator here acts on the raw DFT of the samples and returns the real
//! part of the inverse transform. Odd-order multipliers therefore annihilate
//! the Nyquist plane, which is the usual convention for real data.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::par;

/// Largest total derivative order accepted by [`derivative`].
pub const MAX_DERIVATIVE_ORDER: usize = 8;

/// Multi-index `α = (α₁, α₂, α₃)`; the third entry must be zero in 2D.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex(pub [u8; 3]);

impl MultiIndex {
    pub fn order(&self) -> usize {
        self.0.iter().map(|&a| a as usize).sum()
    }

    /// Unit index `e_axis`.
    pub fn unit(axis: usize) -> Self {
        let mut a = [0; 3];
        a[axis] = 1;
        Self(a)
    }

    /// All multi-indices in `dim` variables with `|α| = order`, in lexicographic order.
    pub fn of_order(dim: usize, order: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for a in (0..=order).rev() {
            if dim == 2 {
                out.push(Self([a as u8, (order - a) as u8, 0]));
            } else {
                for b in (0..=order - a).rev() {
                    out.push(Self([a as u8, b as u8, (order - a - b) as u8]));
                }
            }
        }
        out
    }

    /// All multi-indices with `|α| ≤ order`, grouped by increasing order.
    pub fn up_to(dim: usize, order: usize) -> Vec<Self> {
        (0..=order).flat_map(|k| Self::of_order(dim, k)).collect()
    }

    /// The symbol `(iξ)^α`.
    pub fn symbol(&self, xi: [f64; 3]) -> Complex64 {
        let mut re = 1.0;
        for a in 0..3 {
            re *= xi[a].powi(self.0[a] as i32);
        }
        // i^{|α|}
        match self.order() % 4 {
            0 => Complex64::new(re, 0.0),
            1 => Complex64::new(0.0, re),
            2 => Complex64::new(-re, 0.0),
            _ => Complex64::new(0.0, -re),
        }
    }
}

/// Multiplies the spectrum of `f` by `m(ξ)` and transforms back.
pub fn apply_multiplier<M>(f: &ScalarField, m: M) -> ScalarField
where
    M: Fn([f64; 3]) -> Complex64 + Sync + Send,
{
    let g = *f.grid();
    let spec = f.spectrum();
    let out = par::map_range(g.len(), |i| spec[i] * m(g.wave_vector(i)));
    ScalarField::from_spectrum(g, out)
}

/// Real-valued multiplier variant (no complex symbol construction).
pub fn apply_real_multiplier<M>(f: &ScalarField, m: M) -> ScalarField
where
    M: Fn([f64; 3]) -> f64 + Sync + Send,
{
    let g = *f.grid();
    let spec = f.spectrum();
    let out = par::map_range(g.len(), |i| spec[i] * m(g.wave_vector(i)));
    ScalarField::from_spectrum(g, out)
}

/// `Σ_c m_c(ξ) \hat{f_c}(ξ)` transformed back; all inputs must share one grid.
pub fn combine<M>(fields: &[&ScalarField], m: M) -> Result<ScalarField>
where
    M: Fn(usize, [f64; 3]) -> Complex64 + Sync + Send,
{
    let first = fields
        .first()
        .ok_or_else(|| Error::Precondition("combine needs at least one field".into()))?;
    for f in fields {
        first.check_same_grid(f)?;
    }
    let g = *first.grid();
    let specs: Vec<_> = fields.iter().map(|f| f.spectrum().clone()).collect();
    let out = par::map_range(g.len(), |i| {
        let xi = g.wave_vector(i);
        specs
            .iter()
            .enumerate()
            .map(|(c, s)| s[i] * m(c, xi))
            .sum::<Complex64>()
    });
    Ok(ScalarField::from_spectrum(g, out))
}

fn check_index(grid: &Grid, alpha: MultiIndex) -> Result<()> {
    if alpha.order() > MAX_DERIVATIVE_ORDER {
        return Err(Error::Precondition(format!(
            "derivative order {} exceeds {MAX_DERIVATIVE_ORDER}",
            alpha.order()
        )));
    }
    if grid.dim() == 2 && alpha.0[2] != 0 {
        return Err(Error::Precondition("third index on a 2D grid".into()));
    }
    Ok(())
}

/// `D^α f` through the multiplier `(iξ)^α`.
pub fn derivative(f: &ScalarField, alpha: MultiIndex) -> Result<ScalarField> {
    check_index(f.grid(), alpha)?;
    if alpha.order() == 0 {
        return Ok(f.clone());
    }
    Ok(apply_multiplier(f, |xi| alpha.symbol(xi)))
}

/// `∂_axis f`.
pub fn partial(f: &ScalarField, axis: usize) -> ScalarField {
    apply_multiplier(f, |xi| Complex64::new(0.0, xi[axis]))
}

pub fn grad(f: &ScalarField) -> VectorField {
    let comps = (0..f.grid().dim()).map(|a| partial(f, a)).collect();
    VectorField::new(comps).expect("components share the grid")
}

pub fn div(v: &VectorField) -> ScalarField {
    let refs: Vec<&ScalarField> = v.components().iter().collect();
    combine(&refs, |c, xi| Complex64::new(0.0, xi[c])).expect("components share the grid")
}

/// 3D curl.
pub fn curl(v: &VectorField) -> Result<VectorField> {
    if v.grid().dim() != 3 {
        return Err(Error::Precondition("curl needs a 3D field".into()));
    }
    let c = v.components();
    let d = |f: &ScalarField, a: usize, h: &ScalarField, b: usize| {
        combine(&[f, h], move |k, xi| {
            if k == 0 {
                Complex64::new(0.0, xi[a])
            } else {
                Complex64::new(0.0, -xi[b])
            }
        })
    };
    VectorField::new(vec![
        d(&c[2], 1, &c[1], 2)?,
        d(&c[0], 2, &c[2], 0)?,
        d(&c[1], 0, &c[0], 1)?,
    ])
}

/// Scalar 2D curl `∂₁v₂ − ∂₂v₁`.
pub fn curl2(v: &VectorField) -> Result<ScalarField> {
    if v.grid().dim() != 2 {
        return Err(Error::Precondition("curl2 needs a 2D field".into()));
    }
    let c = v.components();
    combine(&[&c[0], &c[1]], |k, xi| {
        if k == 0 {
            Complex64::new(0.0, -xi[1])
        } else {
            Complex64::new(0.0, xi[0])
        }
    })
}

/// `∇^⊥ f = (−∂₂f, ∂₁f)` in 2D.
pub fn perp_grad(f: &ScalarField) -> Result<VectorField> {
    if f.grid().dim() != 2 {
        return Err(Error::Precondition("perp_grad needs a 2D field".into()));
    }
    VectorField::new(vec![partial(f, 1).scale(-1.0), partial(f, 0)])
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    apply_real_multiplier(f, |xi| -norm2(xi))
}

/// `(−Δ)^{-1} f` with the zero mode set to zero.
pub fn inverse_neg_laplacian(f: &ScalarField) -> ScalarField {
    apply_real_multiplier(f, |xi| {
        let k2 = norm2(xi);
        if k2 == 0.0 {
            0.0
        } else {
            1.0 / k2
        }
    })
}

/// `(−Δ)^{s/2} f` with the zero mode set to zero for negative `s`.
pub fn fractional_laplacian(f: &ScalarField, s: f64) -> ScalarField {
    apply_real_multiplier(f, |xi| {
        let k = norm2(xi).sqrt();
        if k == 0.0 {
            if s > 0.0 {
                0.0
            } else if s == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            k.powf(s)
        }
    })
}

/// Removes every mode with some `|k_a| > N/3` (the 2/3 rule).
pub fn dealias(f: &ScalarField) -> ScalarField {
    let g = *f.grid();
    let cut = g.nyquist() * 2.0 / 3.0;
    apply_real_multiplier(f, |xi| {
        if xi.iter().any(|v| v.abs() > cut) {
            0.0
        } else {
            1.0
        }
    })
}

pub fn dealias_vector(v: &VectorField) -> VectorField {
    VectorField::new(v.components().iter().map(dealias).collect()).expect("same grid")
}

/// Fourier interpolation of `f` onto `target`, a grid on the same box with a
/// different resolution. Modes that do not fit, and the Nyquist modes of the
/// source, are dropped.
pub fn resample(f: &ScalarField, target: Grid) -> Result<ScalarField> {
    let src = *f.grid();
    if src.dim() != target.dim() || src.half_width() != target.half_width() {
        return Err(Error::GridMismatch("resampling needs the same box and dimension".into()));
    }
    let spec = f.spectrum();
    let ratio = (target.len() as f64) / (src.len() as f64);
    let (ns, nt) = (src.n() as i64, target.n() as i64);
    let out = par::map_range(target.len(), |i| {
        let k = target.unravel(i);
        let mut idx = [0usize; 3];
        for a in 0..src.dim() {
            let m = target.signed_index(k[a]);
            if 2 * m.abs() >= ns || 2 * m.abs() >= nt {
                return Complex64::new(0.0, 0.0);
            }
            idx[a] = m.rem_euclid(ns) as usize;
        }
        spec[src.ravel(idx)] * ratio
    });
    Ok(ScalarField::from_spectrum(target, out))
}

/// Fraction of spectral energy above the radial wavenumber `k_max`.
pub fn energy_above(f: &ScalarField, k_max: f64) -> f64 {
    let g = *f.grid();
    let spec = f.spectrum();
    let total = par::sum_range(g.len(), |i| spec[i].norm_sqr());
    if total == 0.0 {
        return 0.0;
    }
    let high = par::sum_range(g.len(), |i| {
        if norm2(g.wave_vector(i)).sqrt() > k_max {
            spec[i].norm_sqr()
        } else {
            0.0
        }
    });
    (high / total).sqrt()
}

pub(crate) fn norm2(xi: [f64; 3]) -> f64 {
    xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn multi_index_enumeration() {
        assert_eq!(MultiIndex::of_order(2, 2).len(), 3);
        assert_eq!(MultiIndex::of_order(3, 2).len(), 6);
        assert_eq!(MultiIndex::up_to(3, 2).len(), 10);
        assert!(MultiIndex::of_order(3, 3).iter().all(|a| a.order() == 3));
    }

    #[test]
    fn rejects_high_order_and_bad_axes() {
        let g = Grid::new(2, PI, 16).unwrap();
        let f = ScalarField::zeros(g);
        assert!(derivative(&f, MultiIndex([5, 4, 0])).is_err());
        assert!(derivative(&f, MultiIndex([0, 0, 1])).is_err());
        assert!(derivative(&f, MultiIndex([4, 4, 0])).is_ok());
    }

    #[test]
    fn perp_grad_and_curl2() {
        let g = Grid::new(2, PI, 32).unwrap();
        let f = ScalarField::from_fn(g, |x| (2.0 * x[0]).sin() * x[1].cos());
        let v = perp_grad(&f).unwrap();
        let want0 = ScalarField::from_fn(g, |x| (2.0 * x[0]).sin() * x[1].sin());
        assert!(v.component(0).sub(&want0).unwrap().sup_norm() < 1e-12);
        // curl ∇^⊥ f = Δ f
        let c = curl2(&v).unwrap();
        assert!(c.sub(&laplacian(&f)).unwrap().sup_norm() < 1e-11);
        assert!(div(&v).sup_norm() < 1e-12);
    }
}
