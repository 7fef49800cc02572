//! Physical-space kernel tables.
//!
//! Used for inspection dumps, L¹ measurements and as an oracle for the
//! Fourier symbols: the periodized far table is built by direct image
//! summation on a supersampled lattice, without any reference to the radial
//! transforms.

use num_complex::Complex64;

use super::{far_hessian_2d, far_hessians_3d, phi, KernelKind, KernelL1, FOUR_PI};
use crate::error::{Error, Result};
use crate::fft;
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::par;
use crate::smooth::Cutoff;

/// `∫_{[-1/2,1/2]²} |x|^{-1} dx = 4 ln(1 + √2)`.
pub fn unit_cell_inverse_radius_2d() -> f64 {
    4.0 * (1.0 + 2f64.sqrt()).ln()
}

/// `∫_{[-1/2,1/2]³} |x|^{-2} dx` (three times the integral of `1/(1+s²+t²)` over `[-1,1]²`).
pub const UNIT_CELL_INVERSE_SQUARE_3D: f64 = 7.674_124_222_443_732;

/// Near kernel sampled at the lattice points, singular cell replaced by its
/// exact cell average. 2D: `a_λΦ`; 3D: `|a_λK|` (the vector kernel's cell
/// average vanishes by oddness, so its magnitude is tabulated instead).
pub fn near_table(grid: &Grid, cutoff: &Cutoff, kind: KernelKind) -> ScalarField {
    let g = *grid;
    let dx = g.dx();
    let origin = g.origin_index();
    ScalarField::from_values_unchecked(
        g,
        par::map_range(g.len(), |i| {
            let x = g.point(i);
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            match kind {
                KernelKind::Sqg2d if i == origin => {
                    unit_cell_inverse_radius_2d() / (2.0 * std::f64::consts::PI * dx)
                }
                KernelKind::Euler3d if i == origin => UNIT_CELL_INVERSE_SQUARE_3D / (FOUR_PI * dx),
                KernelKind::Sqg2d => cutoff.radial(r) * phi(r),
                KernelKind::Euler3d => cutoff.radial(r) / (FOUR_PI * r * r),
            }
        }),
    )
}

/// Far matrix kernel `∂_j(∇^⊥((1−a_λ)Φ))^i` sampled at lattice points
/// (components `(0,0), (0,1), (1,0), (1,1)`).
pub fn far_table_2d(grid: &Grid, cutoff: &Cutoff) -> Vec<ScalarField> {
    let g = *grid;
    let samples = par::map_range(g.len(), |i| {
        let x = g.point(i);
        super::far_matrix_2d(cutoff, [x[0], x[1]])
    });
    (0..4)
        .map(|c| {
            ScalarField::from_values_unchecked(g, samples.iter().map(|m| m[c / 2][c % 2]).collect())
        })
        .collect()
}

fn frobenius_far(cutoff: &Cutoff, x: [f64; 3], kind: KernelKind) -> f64 {
    match kind {
        KernelKind::Sqg2d => {
            let h = far_hessian_2d(cutoff, [x[0], x[1]]);
            h.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
        }
        KernelKind::Euler3d => far_hessians_3d(cutoff, x)
            .iter()
            .flatten()
            .flatten()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt(),
    }
}

/// L¹ norms: lattice sums over `|x| < L`, plus the exact far tail beyond
/// (where the cutoff has vanished and the kernel is a pure power law).
pub fn l1_norms(grid: &Grid, cutoff: &Cutoff, kind: KernelKind) -> KernelL1 {
    let g = *grid;
    let l = g.half_width();
    let near_tab = near_table(&g, cutoff, kind);
    let near = near_tab.values().iter().map(|v| v.abs()).sum::<f64>() * g.cell_volume();
    let body = par::sum_range(g.len(), |i| {
        let x = g.point(i);
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if r < l {
            frobenius_far(cutoff, x, kind)
        } else {
            0.0
        }
    }) * g.cell_volume();
    // The Frobenius norm times r^{d+1} is constant outside the cutoff support.
    let probe = [3.0 * cutoff.lambda, 0.0, 0.0];
    let tail = match kind {
        KernelKind::Sqg2d => {
            let c = frobenius_far(cutoff, probe, kind) * probe[0].powi(3);
            2.0 * std::f64::consts::PI * c / l
        }
        KernelKind::Euler3d => {
            let c = frobenius_far(cutoff, probe, kind) * probe[0].powi(4);
            FOUR_PI * c / l
        }
    };
    KernelL1 {
        near,
        near_exact: cutoff.radial_integral(),
        far: body + tail,
    }
}

/// Periodized far kernel of the SQG split, as Fourier multipliers on the
/// coarse grid.
///
/// The Hessian of `(1−a_λ)Φ` is summed over `(2·shells+1)²` periodic images on
/// a lattice `supersample` times finer than the grid, transformed, restricted
/// to the coarse frequencies and stripped of its mean.
#[derive(Debug, Clone)]
pub struct PeriodizedFarTable {
    grid: Grid,
    /// Multipliers for `H₀₀`, `H₀₁`, `H₁₁`.
    hats: [Vec<Complex64>; 3],
}

impl PeriodizedFarTable {
    pub fn new(grid: &Grid, cutoff: &Cutoff, shells: i64, supersample: usize) -> Result<Self> {
        if grid.dim() != 2 {
            return Err(Error::Precondition("periodized far table is 2D only".into()));
        }
        let g = *grid;
        let m = g.n() * supersample.max(1);
        let h = g.dx() * g.n() as f64 / m as f64;
        let w = 2.0 * g.half_width();
        let signed = |k: usize| -> f64 {
            if k < m / 2 {
                k as f64
            } else {
                k as f64 - m as f64
            }
        };
        let fine = par::map_range(m * m, |idx| {
            let d = [signed(idx / m) * h, signed(idx % m) * h];
            let mut acc = [0.0; 3];
            for a in -shells..=shells {
                for b in -shells..=shells {
                    let hs = far_hessian_2d(cutoff, [d[0] + a as f64 * w, d[1] + b as f64 * w]);
                    acc[0] += hs[0][0];
                    acc[1] += hs[0][1];
                    acc[2] += hs[1][1];
                }
            }
            acc
        });
        let scale = h * h;
        let hats = [0usize, 1, 2].map(|c| {
            let mut buf: Vec<Complex64> = fine.iter().map(|v| Complex64::new(v[c], 0.0)).collect();
            fft::forward(&mut buf, m, 2);
            let mut out = par::map_range(g.len(), |i| {
                let k = g.unravel(i);
                let fi = |a: usize| g.signed_index(k[a]).rem_euclid(m as i64) as usize;
                buf[fi(0) * m + fi(1)] * scale
            });
            out[0] = Complex64::new(0.0, 0.0);
            out
        });
        Ok(Self { grid: g, hats })
    }

    /// `out^i = Σ_j K_ij ∗ F^j` with `K_0j = −H_1j`, `K_1j = H_0j`.
    pub fn contract(&self, f: &VectorField) -> Result<VectorField> {
        if *f.grid() != self.grid {
            return Err(Error::GridMismatch("field grid differs from table grid".into()));
        }
        let g = self.grid;
        let [h00, h01, h11] = &self.hats;
        let s0 = f.component(0).spectrum().clone();
        let s1 = f.component(1).spectrum().clone();
        let out0 = par::map_range(g.len(), |i| -(h01[i] * s0[i] + h11[i] * s1[i]));
        let out1 = par::map_range(g.len(), |i| h00[i] * s0[i] + h01[i] * s1[i]);
        VectorField::new(vec![
            ScalarField::from_spectrum(g, out0),
            ScalarField::from_spectrum(g, out1),
        ])
    }
}
