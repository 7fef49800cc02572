//! Off-lattice evaluation: local cubic Lagrange stencils and exact
//! trigonometric interpolation of band-limited samples.

use num_complex::Complex64;

use crate::field::ScalarField;
use crate::grid::Grid;
use crate::par;

/// Weights of the 4-point Lagrange stencil at offsets `-1, 0, 1, 2` for a
/// fractional position `s ∈ [0, 1)`.
fn cubic_weights(s: f64) -> [f64; 4] {
    [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ]
}

fn base_and_frac(grid: &Grid, x: f64) -> (i64, f64) {
    let t = (x + grid.half_width()) / grid.dx();
    let b = t.floor();
    (b as i64, t - b)
}

/// Tensor-product cubic Lagrange interpolation of a 2D periodic field.
pub fn cubic_2d(f: &ScalarField, x: [f64; 2]) -> f64 {
    let g = f.grid();
    let n = g.n() as i64;
    let (b0, s0) = base_and_frac(g, x[0]);
    let (b1, s1) = base_and_frac(g, x[1]);
    let (w0, w1) = (cubic_weights(s0), cubic_weights(s1));
    let v = f.values();
    let mut acc = 0.0;
    for (p, wp) in w0.iter().enumerate() {
        let i = (b0 + p as i64 - 1).rem_euclid(n) as usize;
        let row = &v[i * g.n()..(i + 1) * g.n()];
        let mut r = 0.0;
        for (q, wq) in w1.iter().enumerate() {
            let j = (b1 + q as i64 - 1).rem_euclid(n) as usize;
            r += wq * row[j];
        }
        acc += wp * r;
    }
    acc
}

/// Exact evaluation of the trigonometric interpolant of band-limited samples,
/// keeping only modes above a relative threshold.
#[derive(Debug, Clone)]
pub struct TrigInterpolant {
    grid: Grid,
    modes: Vec<([f64; 3], Complex64)>,
}

impl TrigInterpolant {
    /// Modes with `|c| ≤ rel_threshold · max|c|` are dropped; Nyquist modes are
    /// always dropped (their off-lattice continuation is ambiguous).
    pub fn new(f: &ScalarField, rel_threshold: f64) -> Self {
        let g = *f.grid();
        let spec = f.spectrum();
        let max = spec.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let scale = 1.0 / g.len() as f64;
        let modes = spec
            .iter()
            .enumerate()
            .filter(|(i, c)| !g.on_nyquist(*i) && c.norm() > rel_threshold * max)
            .map(|(i, c)| (g.wave_vector(i), c * scale))
            .collect();
        Self { grid: g, modes }
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        let l = self.grid.half_width();
        self.modes
            .iter()
            .map(|(xi, c)| {
                let phase = xi[0] * (x[0] + l) + xi[1] * (x[1] + l) + xi[2] * (x[2] + l);
                let (s, co) = phase.sin_cos();
                c.re * co - c.im * s
            })
            .sum()
    }
}

/// Samples of a band-limited field at the dilated lattice `τ·x`, for every
/// lattice point `x` at once.
///
/// The trigonometric sum factorises over axes, so each evaluation is three
/// successive small contractions instead of a full sum per point.
#[derive(Debug, Clone)]
pub struct DilatedSampler {
    grid: Grid,
    /// Largest retained signed index per axis.
    k: usize,
    /// Coefficients on the cube `[-k, k]^d`, row-major, already scaled by `1/N^d`.
    coeffs: Vec<Complex64>,
}

impl DilatedSampler {
    pub fn new(f: &ScalarField, rel_threshold: f64) -> Self {
        let g = *f.grid();
        let spec = f.spectrum();
        let max = spec.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let keep = |i: usize| !g.on_nyquist(i) && spec[i].norm() > rel_threshold * max;
        let mut k = 0usize;
        for i in (0..g.len()).filter(|&i| keep(i)) {
            let idx = g.unravel(i);
            for a in 0..g.dim() {
                k = k.max(g.signed_index(idx[a]).unsigned_abs() as usize);
            }
        }
        let m = 2 * k + 1;
        let d = g.dim();
        let scale = 1.0 / g.len() as f64;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); m.pow(d as u32)];
        for i in (0..g.len()).filter(|&i| keep(i)) {
            let idx = g.unravel(i);
            let mut flat = 0;
            for a in 0..d {
                flat = flat * m + (g.signed_index(idx[a]) + k as i64) as usize;
            }
            coeffs[flat] = spec[i] * scale;
        }
        Self { grid: g, k, coeffs }
    }

    /// `f(τ·x)` on the lattice.
    pub fn sample(&self, tau: f64) -> ScalarField {
        let g = self.grid;
        let (n, m, k) = (g.n(), 2 * self.k + 1, self.k as f64);
        let l = g.half_width();
        // e[mi * n + p] = exp(i ξ_mi (τ x_p + L))
        let e: Vec<Complex64> = (0..m * n)
            .map(|q| {
                let (mi, p) = (q / n, q % n);
                let xi = (mi as f64 - k) * g.dk();
                Complex64::from_polar(1.0, xi * (tau * g.coord(p) + l))
            })
            .collect();
        let zero = Complex64::new(0.0, 0.0);
        let values = if g.dim() == 2 {
            let t1: Vec<Complex64> = par::map_range(m * n, |q| {
                let (m1, p2) = (q / n, q % n);
                (0..m).fold(zero, |acc, m2| acc + self.coeffs[m1 * m + m2] * e[m2 * n + p2])
            });
            par::map_range(n * n, |q| {
                let (p1, p2) = (q / n, q % n);
                (0..m).fold(zero, |acc, m1| acc + t1[m1 * n + p2] * e[m1 * n + p1]).re
            })
        } else {
            let t1: Vec<Complex64> = par::map_range(m * m * n, |q| {
                let (mm, p3) = (q / n, q % n);
                (0..m).fold(zero, |acc, m3| acc + self.coeffs[mm * m + m3] * e[m3 * n + p3])
            });
            let t2: Vec<Complex64> = par::map_range(m * n * n, |q| {
                let (m1, p2, p3) = (q / (n * n), (q / n) % n, q % n);
                (0..m).fold(zero, |acc, m2| acc + t1[(m1 * m + m2) * n + p3] * e[m2 * n + p2])
            });
            par::map_range(n * n * n, |q| {
                let (p1, rest) = (q / (n * n), q % (n * n));
                (0..m).fold(zero, |acc, m1| acc + t2[m1 * n * n + rest] * e[m1 * n + p1]).re
            })
        };
        ScalarField::from_values_unchecked(g, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cubic_reproduces_cubics_locally() {
        let g = Grid::new(2, PI, 64).unwrap();
        let f = ScalarField::from_fn(g, |x| x[0].sin() * (2.0 * x[1]).cos());
        let p = [0.123, -0.456];
        let err = (cubic_2d(&f, p) - p[0].sin() * (2.0 * p[1]).cos()).abs();
        assert!(err < 1e-5, "{err}");
        // exact at nodes
        let idx = g.ravel([10, 20, 0]);
        let x = g.point(idx);
        assert!((cubic_2d(&f, [x[0], x[1]]) - f.values()[idx]).abs() < 1e-14);
    }

    #[test]
    fn trig_interpolant_is_exact_off_lattice() {
        let g = Grid::new(3, PI, 16).unwrap();
        let f = ScalarField::from_fn(g, |x| (x[0] + 2.0 * x[2]).cos() + x[1].sin());
        let t = TrigInterpolant::new(&f, 1e-13);
        assert_eq!(t.mode_count(), 4);
        let p = [0.31, -1.7, 2.2];
        assert!((t.eval(p) - ((p[0] + 2.0 * p[2]).cos() + p[1].sin())).abs() < 1e-13);
    }

    #[test]
    fn dilated_sampler_matches_pointwise_evaluation() {
        for dim in [2, 3] {
            let g = Grid::new(dim, PI, 16).unwrap();
            let f = ScalarField::from_fn(g, |x| (x[0] - 2.0 * x[1]).cos() + (x[1] + x[2]).sin());
            let t = TrigInterpolant::new(&f, 1e-13);
            let s = DilatedSampler::new(&f, 1e-13).sample(0.37);
            for i in (0..g.len()).step_by(7) {
                let x = g.point(i);
                let want = t.eval([0.37 * x[0], 0.37 * x[1], 0.37 * x[2]]);
                assert!((s.values()[i] - want).abs() < 1e-13);
            }
        }
    }
}
