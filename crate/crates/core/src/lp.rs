//! Littlewood-Paley decomposition on the periodic box.
//!
//! `χ̂(ξ) = h(|ξ|)` with `h` the smooth step from 1 on `[0, 3/5]` to 0 on
//! `[5/6, ∞)`, and `φ̂(ξ) = χ̂(ξ/2) − χ̂(ξ)`, so that
//! `χ̂ + Σ_{0≤j≤n} φ̂(2^{-j}·) = χ̂(2^{-(n+1)}·)` telescopes exactly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::Grid;
use crate::par;
use crate::smooth::Step;
use crate::spectral::{self, norm2, MultiIndex};

/// Radius below which `χ̂ ≡ 1`.
pub const CHI_INNER: f64 = 3.0 / 5.0;
/// Radius beyond which `χ̂ ≡ 0`.
pub const CHI_OUTER: f64 = 5.0 / 6.0;
/// Outer edge of the support of `φ̂`.
pub const PHI_OUTER: f64 = 5.0 / 3.0;

const CHI: Step = Step::new(CHI_INNER, CHI_OUTER);

/// Sampled dyadic partition attached to a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicFamily {
    grid: Grid,
    j_max: i32,
    j_hom_min: i32,
}

impl DyadicFamily {
    pub fn new(grid: Grid) -> Result<Self> {
        let nyq = grid.nyquist();
        if nyq < PHI_OUTER * 2.0 {
            return Err(Error::InvalidGrid(format!(
                "Nyquist {nyq:.3} too small to resolve blocks -1, 0, 1"
            )));
        }
        let j_max = (nyq / PHI_OUTER).log2().floor() as i32;
        // Homogeneous blocks with 5/3·2^j < π/L see no lattice frequency and
        // vanish identically; below that index the sup over j ∈ Z is exact.
        let j_silent = ((3.0 * grid.dk() / 5.0).log2()).floor() as i32 + 1;
        Ok(Self {
            grid,
            j_max,
            j_hom_min: (-j_max).min(j_silent),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn j_min(&self) -> i32 {
        -1
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    /// Lowest homogeneous block index probed by the homogeneous norms.
    pub fn j_hom_min(&self) -> i32 {
        self.j_hom_min
    }

    pub fn chi_hat(&self, k: f64) -> f64 {
        CHI.eval(k)
    }

    pub fn phi_hat(&self, k: f64) -> f64 {
        CHI.eval(0.5 * k) - CHI.eval(k)
    }

    /// `φ̂_j(ξ) = φ̂(2^{-j}ξ)` at radial frequency `k`.
    pub fn phi_j(&self, j: i32, k: f64) -> f64 {
        self.phi_hat(k * 2f64.powi(-j))
    }

    /// Multiplier of `Δ_j` (inhomogeneous) or `Δ̇_j` (homogeneous).
    pub fn block_multiplier(&self, j: i32, homogeneous: bool, k: f64) -> f64 {
        if homogeneous {
            self.phi_j(j, k)
        } else if j < -1 {
            0.0
        } else if j == -1 {
            self.chi_hat(k)
        } else {
            self.phi_j(j, k)
        }
    }

    /// Multiplier of `S_n`: `χ̂(2^{-(n+1)}ξ)`, zero for `n < -1`.
    pub fn low_pass_multiplier(&self, n: i32, k: f64) -> f64 {
        if n < -1 {
            0.0
        } else {
            CHI.eval(k * 2f64.powi(-(n + 1)))
        }
    }

    pub fn block_range(&self, homogeneous: bool) -> std::ops::RangeInclusive<i32> {
        if homogeneous {
            self.j_hom_min..=self.j_max
        } else {
            -1..=self.j_max
        }
    }

    /// `max |χ̂ + Σ_{j=0}^{j_max} φ̂_j − 1|` over lattice frequencies with
    /// `|ξ| ≤ 5/6·2^{j_max}`, summing the blocks one by one.
    pub fn partition_error(&self) -> f64 {
        let g = self.grid;
        let limit = CHI_OUTER * 2f64.powi(self.j_max);
        par::max_range(g.len(), |i| {
            let k = norm2(g.wave_vector(i)).sqrt();
            if k > limit {
                return 0.0;
            }
            let mut s = self.chi_hat(k);
            for j in 0..=self.j_max {
                s += self.phi_j(j, k);
            }
            (s - 1.0).abs()
        })
    }

    fn check(&self, f: &ScalarField) -> Result<()> {
        if *f.grid() != self.grid {
            return Err(Error::GridMismatch("field and dyadic family differ".into()));
        }
        Ok(())
    }

    /// `Δ_j f` or `Δ̇_j f`.
    pub fn block(&self, f: &ScalarField, j: i32, homogeneous: bool) -> Result<ScalarField> {
        self.check(f)?;
        if j > self.j_max {
            return Err(Error::BlockOutOfRange { j, j_max: self.j_max });
        }
        Ok(spectral::apply_real_multiplier(f, |xi| {
            self.block_multiplier(j, homogeneous, norm2(xi).sqrt())
        }))
    }

    /// `S_n f = χ_n ∗ f`.
    ///
    /// Indices above `j_max` are accepted: the multiplier is then 1 on every
    /// frequency below `3/5·2^{n+1}`, which is all a Picard step needs.
    pub fn low_pass(&self, f: &ScalarField, n: i32) -> Result<ScalarField> {
        self.check(f)?;
        Ok(spectral::apply_real_multiplier(f, |xi| {
            self.low_pass_multiplier(n, norm2(xi).sqrt())
        }))
    }

    /// Hölder-Zygmund norm `sup_j 2^{jr}‖Δ_j f‖_∞` (or the homogeneous analogue).
    pub fn holder_norm(&self, f: &ScalarField, r: f64, homogeneous: bool) -> Result<NormReport> {
        self.check(f)?;
        let blocks: Vec<i32> = self.block_range(homogeneous).collect();
        let contributions: Vec<(i32, f64)> = blocks
            .iter()
            .map(|&j| {
                let b = self.block(f, j, homogeneous)?;
                Ok((j, 2f64.powf(j as f64 * r) * b.sup_norm()))
            })
            .collect::<Result<_>>()?;
        let value = contributions.iter().map(|c| c.1).fold(0.0, f64::max);
        Ok(NormReport {
            norm: if homogeneous { "crdot" } else { "cr" }.into(),
            exponent: r,
            value,
            contributions,
        })
    }

    /// Block-wise Riesz transform `Σ_j Δ̇_j ∂_k(−Δ)^{-1/2} f`.
    pub fn riesz(&self, f: &ScalarField, k: usize) -> Result<ScalarField> {
        self.check(f)?;
        let range = self.block_range(true);
        Ok(spectral::apply_multiplier(f, |xi| {
            let m = norm2(xi).sqrt();
            if m == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let w: f64 = range.clone().map(|j| self.phi_j(j, m)).sum();
            Complex64::new(0.0, w * xi[k] / m)
        }))
    }

    /// One block `Δ̇_j ∂_k(−Δ)^{-1/2} f`.
    pub fn riesz_block(&self, f: &ScalarField, k: usize, j: i32) -> Result<ScalarField> {
        self.check(f)?;
        Ok(spectral::apply_multiplier(f, |xi| {
            let m = norm2(xi).sqrt();
            if m == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            Complex64::new(0.0, self.phi_j(j, m) * xi[k] / m)
        }))
    }

    /// L² Bernstein bracket for a field whose spectrum lies in `2^j[3/5, 5/3]`.
    pub fn bernstein_bracket(&self, f: &ScalarField, j: i32, k: u32) -> Result<BernsteinReport> {
        self.check(f)?;
        let g = self.grid;
        let (lo, hi) = (CHI_INNER * 2f64.powi(j), PHI_OUTER * 2f64.powi(j));
        let spec = f.spectrum();
        let total = par::sum_range(g.len(), |i| spec[i].norm_sqr());
        let outside = par::sum_range(g.len(), |i| {
            let m = norm2(g.wave_vector(i)).sqrt();
            if m < lo * (1.0 - 1e-12) || m > hi * (1.0 + 1e-12) {
                spec[i].norm_sqr()
            } else {
                0.0
            }
        });
        let leakage = if total > 0.0 { (outside / total).sqrt() } else { 0.0 };
        if total == 0.0 || leakage > 1e-12 {
            return Err(Error::SpectrumSupport { leakage });
        }
        let weighted = par::sum_range(g.len(), |i| {
            norm2(g.wave_vector(i)).powi(k as i32) * spec[i].norm_sqr()
        });
        Ok(BernsteinReport {
            j,
            k,
            lower: lo.powi(k as i32),
            measured: (weighted / total).sqrt(),
            upper: hi.powi(k as i32),
        })
    }
}

/// A norm value together with the per-block table that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub norm: String,
    pub exponent: f64,
    pub value: f64,
    pub contributions: Vec<(i32, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernsteinReport {
    pub j: i32,
    pub k: u32,
    pub lower: f64,
    pub measured: f64,
    pub upper: f64,
}

impl BernsteinReport {
    pub fn holds(&self) -> bool {
        self.lower * (1.0 - 1e-12) <= self.measured && self.measured <= self.upper * (1.0 + 1e-12)
    }
}

/// Classical Hölder norm `Σ_{|α|≤[r]} ‖D^α f‖_∞ + max_{|α|=[r]} [D^α f]_{r−[r]}`.
///
/// The seminorm is maximized over lattice pairs at distance at most 2; larger
/// separations contribute at most `2‖g‖_∞ / 2^{r−[r]}`, which is added as a
/// competing bound.
pub fn classical_holder_norm(f: &ScalarField, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 4.0) || r.fract() == 0.0 {
        return Err(Error::Precondition(format!(
            "classical Hölder exponent must be non-integer in (0, 4), got {r}"
        )));
    }
    let g = *f.grid();
    let k = r.floor() as usize;
    let s = r - k as f64;
    let mut total = 0.0;
    for order in 0..=k {
        for alpha in MultiIndex::of_order(g.dim(), order) {
            total += spectral::derivative(f, alpha)?.sup_norm();
        }
    }
    let mut semi: f64 = 0.0;
    for alpha in MultiIndex::of_order(g.dim(), k) {
        let d = spectral::derivative(f, alpha)?;
        semi = semi.max(holder_seminorm(&d, s, 2.0));
    }
    Ok(total + semi)
}

/// Hölder seminorm of exponent `s` over lattice pairs with `|x − y| ≤ radius`,
/// combined with the far-pair bound `2‖g‖_∞ / radius^s`.
pub fn holder_seminorm(f: &ScalarField, s: f64, radius: f64) -> f64 {
    let g = *f.grid();
    let dx = g.dx();
    let m = (radius / dx).floor() as i64;
    let m3 = if g.dim() == 3 { m } else { 0 };
    let mut offsets = Vec::new();
    for a in 0..=m {
        for b in -m..=m {
            for c in -m3..=m3 {
                // half space: keep (a, b, c) lexicographically positive
                if (a, b, c) <= (0, 0, 0) {
                    continue;
                }
                let d = dx * ((a * a + b * b + c * c) as f64).sqrt();
                if d <= radius {
                    offsets.push(([a, b, c], d.powf(s)));
                }
            }
        }
    }
    let v = f.values();
    let local = par::max_range(g.len(), |i| {
        let mut best: f64 = 0.0;
        for (o, w) in &offsets {
            let j = g.shifted(i, *o);
            best = best.max((v[i] - v[j]).abs() / w);
        }
        best
    });
    local.max(2.0 * f.sup_norm() / radius.powf(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn default_grid_blocks() {
        let fam = DyadicFamily::new(Grid::default_2d()).unwrap();
        assert_eq!(fam.j_max(), 3);
        assert_eq!(fam.j_hom_min(), -3);
        assert!(DyadicFamily::new(Grid::new(2, 8.0 * PI, 16).unwrap()).is_err());
        assert_eq!(fam.chi_hat(0.0), 1.0);
        assert_eq!(fam.phi_hat(1.0), 1.0);
    }

    #[test]
    fn block_above_range_is_rejected() {
        let g = Grid::new(2, PI, 32).unwrap();
        let fam = DyadicFamily::new(g).unwrap();
        let f = ScalarField::zeros(g);
        assert!(matches!(
            fam.block(&f, fam.j_max() + 1, false),
            Err(Error::BlockOutOfRange { .. })
        ));
    }

    #[test]
    fn seminorm_matches_brute_force_pairs() {
        let g = Grid::new(2, PI, 32).unwrap();
        let f = ScalarField::from_fn(g, |x| (3.0 * x[0]).sin() * x[1].cos() * 0.2);
        let s = 0.5;
        let mut brute: f64 = 0.0;
        for i in 0..g.len() {
            for j in 0..g.len() {
                let d = g.periodic_delta(&g.point(i), &g.point(j));
                let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
                if r > 0.0 && r <= 2.0 + 1e-12 {
                    brute = brute.max((f.values()[i] - f.values()[j]).abs() / r.powf(s));
                }
            }
        }
        let bound = 2.0 * f.sup_norm() / 2f64.powf(s);
        assert!(brute > bound, "test field must exercise the local pairs");
        assert!((holder_seminorm(&f, s, 2.0) - brute.max(bound)).abs() < 1e-14);
    }
}
