//! Fundamental solutions, cutoffs and the near/far kernel splits.
//!
//! Conventions: `Φ(x) = 1/(2π|x|)` in 2D, so `\hat Φ = 1/|ξ|`; in 3D
//! `G(x) = 1/(4π|x|)` with `−ΔG = δ`, and the Biot-Savart kernel is
//! `K = ∇G = −x/(4π|x|³)`, so that `u = K ∗× ω = curl(−Δ)^{-1} ω`.
//!
//! Convolutions with the split kernels are applied as Fourier multipliers.
//! The symbols of the compactly supported pieces are radial transforms
//! evaluated by Gauss-Legendre quadrature:
//!
//! * `\widehat{a_λΦ}(k) = ∫_0^{2λ} a_λ(r) J₀(kr) dr`
//! * `\widehat{a_λG}(k) = ∫_0^{2λ} a_λ(r) r j₀(kr) dr`
//! * `\widehat{a_λK}(ξ) = i ξ/|ξ| ∫_0^{2λ} a_λ(r) j₁(kr) dr`
//!
//! and the far pieces follow as `\hat Φ − \widehat{a_λΦ}` and so on. The
//! physical-space tables in [`table`] are independent of these symbols and
//! serve as the cross-check.

pub mod table;

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::par;
use crate::quadrature;
use crate::smooth::{radius_jet, Cutoff, Jet};
use crate::spectral::{self, norm2};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
pub const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Sqg2d,
    Euler3d,
}

/// `Φ(x) = 1/(2π|x|)`.
pub fn phi(r: f64) -> f64 {
    1.0 / (TWO_PI * r)
}

/// `G(x) = 1/(4π|x|)`.
pub fn green3(r: f64) -> f64 {
    1.0 / (FOUR_PI * r)
}

/// Spherical Bessel `j₁(z) = sin z/z² − cos z/z`, with a series near 0.
pub fn sph_j1(z: f64) -> f64 {
    if z.abs() < 0.05 {
        let z2 = z * z;
        z / 3.0 * (1.0 - z2 / 10.0 * (1.0 - z2 / 28.0 * (1.0 - z2 / 54.0)))
    } else {
        let (s, c) = z.sin_cos();
        s / (z * z) - c / z
    }
}

/// Spherical Bessel `j₀(z) = sin z / z`.
pub fn sph_j0(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

/// `∫_0^{2λ} a_λ(r) w(r) dr`, split at `λ` where the cutoff leaves its plateau.
fn cutoff_integral<W: Fn(f64) -> f64>(cutoff: &Cutoff, k: f64, w: W) -> f64 {
    let l = cutoff.lambda;
    let panels = ((k * l) / 2.0).ceil() as usize + 2;
    let plateau = quadrature::composite(0.0, l, panels, 16, &w);
    let ramp = quadrature::composite(l, 2.0 * l, panels + 6, 16, |r| cutoff.radial(r) * w(r));
    plateau + ramp
}

/// `\widehat{a_λΦ}(k)` in 2D.
pub fn near_symbol_2d(cutoff: &Cutoff, k: f64) -> f64 {
    cutoff_integral(cutoff, k, |r| libm::j0(k * r))
}

/// `\widehat{a_λG}(k)` in 3D.
pub fn near_green_symbol_3d(cutoff: &Cutoff, k: f64) -> f64 {
    cutoff_integral(cutoff, k, |r| r * sph_j0(k * r))
}

/// Radial factor `I₁(k)` of `\widehat{a_λK}(ξ) = i ξ/|ξ| I₁(|ξ|)`.
pub fn near_bs_symbol_3d(cutoff: &Cutoff, k: f64) -> f64 {
    cutoff_integral(cutoff, k, |r| sph_j1(k * r))
}

/// Evaluates a radial symbol once per distinct lattice `|ξ|²`.
fn tabulate_radial<F>(grid: &Grid, f: F) -> Vec<f64>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let key = |i: usize| -> u64 {
        let k = grid.unravel(i);
        (0..grid.dim())
            .map(|a| grid.signed_index(k[a]).pow(2) as u64)
            .sum()
    };
    let mut keys: Vec<u64> = (0..grid.len()).map(key).collect();
    keys.sort_unstable();
    keys.dedup();
    let dk = grid.dk();
    let vals = par::map_slice(&keys, |&s| f(dk * (s as f64).sqrt()));
    let lookup: HashMap<u64, f64> = keys.into_iter().zip(vals).collect();
    par::map_range(grid.len(), |i| lookup[&key(i)])
}

/// L¹ norms of the kernel pieces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelL1 {
    /// Lattice sum of the near kernel with the singular cell averaged.
    pub near: f64,
    /// Closed form of the near-kernel norm.
    pub near_exact: f64,
    /// Far-kernel (Frobenius) norm: lattice sum over `|x| < L` plus the exact
    /// tail beyond.
    pub far: f64,
}

/// Precomputed split kernels for one grid and one cutoff radius.
#[derive(Debug, Clone)]
pub struct KernelSet {
    grid: Grid,
    kind: KernelKind,
    cutoff: Cutoff,
    /// 2D: `\widehat{a_λΦ}`; 3D: `\widehat{a_λG}`.
    near_hat: Arc<Vec<f64>>,
    /// 3D: `I₁` for `\widehat{a_λK}`; empty in 2D.
    near_bs_hat: Arc<Vec<f64>>,
}

impl KernelSet {
    pub fn new(grid: Grid, lambda: f64, kind: KernelKind) -> Result<Self> {
        let want = match kind {
            KernelKind::Sqg2d => 2,
            KernelKind::Euler3d => 3,
        };
        if grid.dim() != want {
            return Err(Error::GridMismatch(format!("{kind:?} kernels need a {want}D grid")));
        }
        let limit = grid.half_width() / 4.0;
        if !(lambda > 0.0) || 2.0 * lambda > limit * (1.0 + 1e-12) {
            return Err(Error::LambdaTooLarge {
                two_lambda: 2.0 * lambda,
                limit,
            });
        }
        let cutoff = Cutoff::new(lambda);
        let (near_hat, near_bs_hat) = match kind {
            KernelKind::Sqg2d => (tabulate_radial(&grid, |k| near_symbol_2d(&cutoff, k)), Vec::new()),
            KernelKind::Euler3d => (
                tabulate_radial(&grid, |k| near_green_symbol_3d(&cutoff, k)),
                tabulate_radial(&grid, |k| near_bs_symbol_3d(&cutoff, k)),
            ),
        };
        Ok(Self {
            grid,
            kind,
            cutoff,
            near_hat: Arc::new(near_hat),
            near_bs_hat: Arc::new(near_bs_hat),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn lambda(&self) -> f64 {
        self.cutoff.lambda
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn cutoff(&self) -> &Cutoff {
        &self.cutoff
    }

    /// Sampled near symbol (see the struct docs for its meaning per kind).
    pub fn near_symbol(&self) -> &[f64] {
        &self.near_hat
    }

    fn expect(&self, kind: KernelKind, g: &Grid) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Precondition(format!("operation needs {kind:?} kernels")));
        }
        if *g != self.grid {
            return Err(Error::GridMismatch("field grid differs from kernel grid".into()));
        }
        Ok(())
    }

    /// `(a_λΦ) ∗ ∇^⊥ f`.
    pub fn near_conv_perp(&self, f: &ScalarField) -> Result<VectorField> {
        self.expect(KernelKind::Sqg2d, f.grid())?;
        let m = &self.near_hat;
        let g = self.grid;
        let spec = f.spectrum();
        let comp = |c: usize| {
            let out = par::map_range(g.len(), |i| {
                let xi = g.wave_vector(i);
                let perp = if c == 0 { -xi[1] } else { xi[0] };
                spec[i] * Complex64::new(0.0, perp * m[i])
            });
            ScalarField::from_spectrum(g, out)
        };
        VectorField::new(vec![comp(0), comp(1)])
    }

    /// `\widehat{(1−a_λ)Φ}(ξ) = 1/|ξ| − \widehat{a_λΦ}`, zero at `ξ = 0`.
    fn far_scalar_2d(&self, i: usize, xi: [f64; 3]) -> f64 {
        let k = norm2(xi).sqrt();
        if k == 0.0 {
            0.0
        } else {
            1.0 / k - self.near_hat[i]
        }
    }

    /// `(∇∇^⊥((1−a_λ)Φ)) ∗· F`, i.e. `out^i = Σ_j ∂_j(∇^⊥ g)^i ∗ F^j`.
    pub fn far_conv_contract(&self, f: &VectorField) -> Result<VectorField> {
        self.expect(KernelKind::Sqg2d, f.grid())?;
        let g = self.grid;
        let s0 = f.component(0).spectrum().clone();
        let s1 = f.component(1).spectrum().clone();
        let comp = |c: usize| {
            let out = par::map_range(g.len(), |i| {
                let xi = g.wave_vector(i);
                let perp = if c == 0 { -xi[1] } else { xi[0] };
                let w = -perp * self.far_scalar_2d(i, xi);
                (s0[i] * xi[0] + s1[i] * xi[1]) * w
            });
            ScalarField::from_spectrum(g, out)
        };
        VectorField::new(vec![comp(0), comp(1)])
    }

    /// Far piece of the constitutive law, `∇^⊥((1−a_λ)Φ) ∗ θ`.
    pub fn far_perp(&self, f: &ScalarField) -> Result<VectorField> {
        self.expect(KernelKind::Sqg2d, f.grid())?;
        let g = self.grid;
        let spec = f.spectrum();
        let comp = |c: usize| {
            let out = par::map_range(g.len(), |i| {
                let xi = g.wave_vector(i);
                let perp = if c == 0 { -xi[1] } else { xi[0] };
                spec[i] * Complex64::new(0.0, perp * self.far_scalar_2d(i, xi))
            });
            ScalarField::from_spectrum(g, out)
        };
        VectorField::new(vec![comp(0), comp(1)])
    }

    /// Near Biot-Savart piece `(a_λK) ∗× ω`.
    pub fn near_cross(&self, w: &VectorField) -> Result<VectorField> {
        self.expect(KernelKind::Euler3d, w.grid())?;
        let g = self.grid;
        let i1 = &self.near_bs_hat;
        let s: Vec<_> = w.components().iter().map(|c| c.spectrum().clone()).collect();
        let comp = |c: usize| {
            let (a, b) = ((c + 1) % 3, (c + 2) % 3);
            let out = par::map_range(g.len(), |i| {
                let xi = g.wave_vector(i);
                let k = norm2(xi).sqrt();
                if k == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                // (i ξ̂ I₁ × ω̂)_c
                (s[b][i] * xi[a] - s[a][i] * xi[b]) * Complex64::new(0.0, i1[i] / k)
            });
            ScalarField::from_spectrum(g, out)
        };
        VectorField::new(vec![comp(0), comp(1), comp(2)])
    }

    /// `ℓ(k)` with `\widehat{(1−a_λ)K}(ξ) = i ξ ℓ(|ξ|)`.
    fn far_bs_radial(&self, i: usize, k: f64) -> f64 {
        if k == 0.0 {
            0.0
        } else {
            (1.0 / k - self.near_bs_hat[i]) / k
        }
    }

    /// Far integrand of the 3D Serfati identity, component `k`:
    /// `−∇∇((1−a_λ)K^k) ∗· (u⊗u) + ∇div((1−a_λ)K) ∗· (u^k u)`.
    ///
    /// The products are formed pointwise and dealiased with the 2/3 rule.
    pub fn far_flux_3d(&self, u: &VectorField) -> Result<VectorField> {
        self.expect(KernelKind::Euler3d, u.grid())?;
        let uu = tensor_products(u, true)?;
        let g = self.grid;
        let comp = |c: usize| {
            let out = par::map_range(g.len(), |i| {
                let xi = g.wave_vector(i);
                let k2 = norm2(xi);
                let l = self.far_bs_radial(i, k2.sqrt());
                let mut first = Complex64::new(0.0, 0.0);
                let mut second = Complex64::new(0.0, 0.0);
                for a in 0..3 {
                    for b in 0..3 {
                        first += uu[sym(a, b)][i] * (xi[a] * xi[b]);
                    }
                    second += uu[sym(c, a)][i] * xi[a];
                }
                Complex64::new(0.0, l) * (first * xi[c] - second * k2)
            });
            ScalarField::from_spectrum(g, out)
        };
        VectorField::new(vec![comp(0), comp(1), comp(2)])
    }

    /// The two pieces of `∇p`: `(a_λ∇G) ∗ div div(u⊗u)` and
    /// `∇∇[(1−a_λ)∇G] ∗· (u⊗u)`. Their sum is `∇(−Δ)^{-1} div div(u⊗u)`.
    pub fn pressure_gradient_parts(&self, u: &VectorField) -> Result<(VectorField, VectorField)> {
        self.expect(KernelKind::Euler3d, u.grid())?;
        let uu = tensor_products(u, true)?;
        let g = self.grid;
        let part = |near: bool, c: usize| {
            let out = par::map_range(g.len(), |i| {
                let xi = g.wave_vector(i);
                let k = norm2(xi).sqrt();
                if k == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let mut dd = Complex64::new(0.0, 0.0);
                for a in 0..3 {
                    for b in 0..3 {
                        dd -= uu[sym(a, b)][i] * (xi[a] * xi[b]);
                    }
                }
                let i1 = self.near_bs_hat[i];
                let radial = if near { i1 } else { 1.0 / k - i1 };
                dd * Complex64::new(0.0, xi[c] / k * radial)
            });
            ScalarField::from_spectrum(g, out)
        };
        let near = VectorField::new((0..3).map(|c| part(true, c)).collect())?;
        let far = VectorField::new((0..3).map(|c| part(false, c)).collect())?;
        Ok((near, far))
    }

    pub fn pressure_gradient(&self, u: &VectorField) -> Result<VectorField> {
        let (n, f) = self.pressure_gradient_parts(u)?;
        n.add(&f)
    }

    /// Kernel-split Biot-Savart law:
    /// `u^i = −(a_λK^k) ∗ ω^i_k − ∂_k((1−a_λ)K^k) ∗ u^i + ∂_i((1−a_λ)K^k) ∗ u^k`
    /// with `ω^i_k = ∂_k u^i − ∂_i u^k`. Returns the mean-free part of `u`.
    pub fn biot_savart_split(&self, u: &VectorField) -> Result<VectorField> {
        self.expect(KernelKind::Euler3d, u.grid())?;
        let g = self.grid;
        let s: Vec<_> = u.components().iter().map(|c| c.spectrum().clone()).collect();
        // ω^i_k built from spectral derivatives of u
        let omega = |i: usize, k: usize, idx: usize, xi: [f64; 3]| {
            Complex64::new(0.0, 1.0) * (s[i][idx] * xi[k] - s[k][idx] * xi[i])
        };
        let comp = |c: usize| {
            let out = par::map_range(g.len(), |idx| {
                let xi = g.wave_vector(idx);
                let k = norm2(xi).sqrt();
                if k == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let i1 = self.near_bs_hat[idx];
                let l = self.far_bs_radial(idx, k);
                let iunit = Complex64::new(0.0, 1.0);
                let mut near = Complex64::new(0.0, 0.0);
                let mut far2 = Complex64::new(0.0, 0.0);
                for a in 0..3 {
                    near -= iunit * (xi[a] / k * i1) * omega(c, a, idx, xi);
                    // ∂_i L^a ∗ u^a  →  (iξ_i)(iξ_a ℓ) û^a
                    far2 -= s[a][idx] * (xi[c] * xi[a] * l);
                }
                // −∂_a L^a ∗ u^c  →  +k² ℓ û^c
                let far1 = s[c][idx] * (k * k * l);
                near + far1 + far2
            });
            ScalarField::from_spectrum(g, out)
        };
        VectorField::new(vec![comp(0), comp(1), comp(2)])
    }

    /// L¹ norms measured on the lattice (see [`KernelL1`]).
    pub fn l1_norms(&self) -> KernelL1 {
        table::l1_norms(&self.grid, &self.cutoff, self.kind)
    }
}

fn sym(a: usize, b: usize) -> usize {
    match (a.min(b), a.max(b)) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

/// Spectra of `u^a u^b` (upper triangle, index via `sym`), optionally dealiased.
fn tensor_products(u: &VectorField, dealias: bool) -> Result<Vec<Arc<Vec<Complex64>>>> {
    let c = u.components();
    let mut out = Vec::with_capacity(6);
    for a in 0..3 {
        for b in a..3 {
            let mut p = c[a].mul(&c[b])?;
            if dealias {
                p = spectral::dealias(&p);
            }
            out.push(p.spectrum().clone());
        }
    }
    Ok(out)
}

/// Hessian of `(1 − a_λ)Φ` at a 2D point (exact via jets).
pub fn far_hessian_2d(cutoff: &Cutoff, x: [f64; 2]) -> [[f64; 2]; 2] {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    if r >= cutoff.support() {
        let r5 = r.powi(5);
        let c = 1.0 / TWO_PI;
        return [
            [c * (3.0 * x[0] * x[0] - r * r) / r5, c * 3.0 * x[0] * x[1] / r5],
            [c * 3.0 * x[0] * x[1] / r5, c * (3.0 * x[1] * x[1] - r * r) / r5],
        ];
    }
    if r <= cutoff.lambda {
        return [[0.0; 2]; 2];
    }
    let rj = radius_jet(x);
    let one_minus_a = (Jet::constant(1.0) - rj.map(|s| cutoff.radial_jet(s))) * (1.0 / TWO_PI);
    (one_minus_a * rj.recip()).h
}

/// Far matrix kernel `K_ij = ∂_j (∇^⊥ g)^i` with `g = (1−a_λ)Φ`.
pub fn far_matrix_2d(cutoff: &Cutoff, x: [f64; 2]) -> [[f64; 2]; 2] {
    let h = far_hessian_2d(cutoff, x);
    [[-h[1][0], -h[1][1]], [h[0][0], h[0][1]]]
}

/// Hessians of the three components of `(1 − a_λ)K`, `K = −x/(4π|x|³)`:
/// `out[m][i][j] = ∂_i∂_j((1−a_λ)K^m)`.
pub fn far_hessians_3d(cutoff: &Cutoff, x: [f64; 3]) -> [[[f64; 3]; 3]; 3] {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if r <= cutoff.lambda {
        return [[[0.0; 3]; 3]; 3];
    }
    let rj = radius_jet(x);
    let weight = (Jet::constant(1.0) - rj.map(|s| cutoff.radial_jet(s))) * rj.powi(3).recip() * (-1.0 / FOUR_PI);
    let mut out = [[[0.0; 3]; 3]; 3];
    for (m, o) in out.iter_mut().enumerate() {
        *o = (weight * Jet::variable(x[m], m)).h;
    }
    out
}

/// `(1 − a_λ)K` itself, for finite-difference checks.
pub fn far_bs_kernel_3d(cutoff: &Cutoff, x: [f64; 3]) -> [f64; 3] {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if r == 0.0 {
        return [0.0; 3];
    }
    let w = (1.0 - cutoff.radial(r)) * (-1.0 / (FOUR_PI * r * r * r));
    [w * x[0], w * x[1], w * x[2]]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson<F: Fn(f64) -> f64>(a: f64, b: f64, n: usize, f: F) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn radial_symbols_match_brute_force() {
        let c = Cutoff::new(1.3);
        for &k in &[0.0, 0.7, 5.0, 21.0] {
            let oracle = simpson(0.0, 2.6, 200_000, |r| c.radial(r) * libm::j0(k * r));
            assert!((near_symbol_2d(&c, k) - oracle).abs() < 1e-11, "k={k}");
            let oracle = simpson(0.0, 2.6, 200_000, |r| c.radial(r) * sph_j1(k * r));
            assert!((near_bs_symbol_3d(&c, k) - oracle).abs() < 1e-11, "k={k}");
        }
        assert!((near_symbol_2d(&c, 0.0) - c.radial_integral()).abs() < 1e-12);
    }

    #[test]
    fn far_kernel_vanishes_on_plateau() {
        let c = Cutoff::new(1.0);
        assert_eq!(far_matrix_2d(&c, [0.5, 0.7]), [[0.0; 2]; 2]);
        let h = far_hessians_3d(&c, [0.3, 0.2, -0.5]);
        assert!(h.iter().flatten().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn far_3d_hessians_match_finite_differences() {
        let c = Cutoff::new(0.5);
        let mut rng = crate::random::rng(11);
        use rand::Rng;
        // second differences with one Richardson step, error O(h⁴)
        let h = 2e-4;
        for _ in 0..100 {
            let x: [f64; 3] = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            if r < 0.3 {
                continue;
            }
            let hess = far_hessians_3d(&c, x);
            for i in 0..3 {
                for j in 0..3 {
                    let at = |di: f64, dj: f64| {
                        let mut y = x;
                        y[i] += di;
                        y[j] += dj;
                        far_bs_kernel_3d(&c, y)
                    };
                    let mixed = |h: f64, m: usize| {
                        (at(h, h)[m] - at(h, -h)[m] - at(-h, h)[m] + at(-h, -h)[m]) / (4.0 * h * h)
                    };
                    for m in 0..3 {
                        let fd = (4.0 * mixed(0.5 * h, m) - mixed(h, m)) / 3.0;
                        let scale = 1.0 + hess[m][i][j].abs();
                        assert!((fd - hess[m][i][j]).abs() < 1e-6 * scale, "{fd} {}", hess[m][i][j]);
                    }
                }
            }
        }
    }
}
