//! Uniform periodic lattices on `[-L, L)^d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A periodic box `[-L, L)^d` sampled with `n` points per axis.
///
/// The box stands in for `R^d`: periodic data are bounded and do not decay.
/// Axis 0 is the slowest-varying index in the row-major layout and carries
/// the coordinate `x_1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    n: usize,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, n: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dimension must be 2 or 3, got {dim}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half width must be positive and finite, got {half_width}"
            )));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 16, got {n}"
            )));
        }
        Ok(Self { dim, half_width, n })
    }

    /// Default 2D grid: `N = 256`, `L = 8π`.
    pub fn default_2d() -> Self {
        Self::new(2, 8.0 * std::f64::consts::PI, 256).expect("valid default")
    }

    /// Default 3D grid: `N = 32`, `L = π`.
    pub fn default_3d() -> Self {
        Self::new(3, std::f64::consts::PI, 32).expect("valid default")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Lattice spacing `2L/N`. Exact because `N` is a power of two.
    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Total number of lattice points.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume of one lattice cell, `dx^d`.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    /// Volume of the box, `(2L)^d`.
    pub fn volume(&self) -> f64 {
        (2.0 * self.half_width).powi(self.dim as i32)
    }

    /// Coordinate of lattice index `k` along any axis.
    pub fn coord(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.dx()
    }

    /// Per-axis lattice indices of flat index `idx` (unused axes are zero).
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        match self.dim {
            2 => [idx / n, idx % n, 0],
            _ => [idx / (n * n), (idx / n) % n, idx % n],
        }
    }

    pub fn ravel(&self, k: [usize; 3]) -> usize {
        let n = self.n;
        match self.dim {
            2 => k[0] * n + k[1],
            _ => (k[0] * n + k[1]) * n + k[2],
        }
    }

    /// Physical position of flat index `idx`.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let k = self.unravel(idx);
        let mut x = [0.0; 3];
        for (a, xa) in x.iter_mut().enumerate().take(self.dim) {
            *xa = self.coord(k[a]);
        }
        x
    }

    /// Flat index of the lattice node at the origin.
    pub fn origin_index(&self) -> usize {
        let h = self.n / 2;
        self.ravel([h, h, if self.dim == 3 { h } else { 0 }])
    }

    /// Signed integer frequency of spectral index `k` (Nyquist maps to `-n/2`).
    pub fn signed_index(&self, k: usize) -> i64 {
        let n = self.n as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Fundamental wavenumber `π/L`.
    pub fn dk(&self) -> f64 {
        std::f64::consts::PI / self.half_width
    }

    /// Angular wavenumber of spectral index `k` along one axis.
    pub fn wavenumber(&self, k: usize) -> f64 {
        self.signed_index(k) as f64 * self.dk()
    }

    /// Wave vector of flat spectral index `idx`.
    pub fn wave_vector(&self, idx: usize) -> [f64; 3] {
        let k = self.unravel(idx);
        let mut xi = [0.0; 3];
        for (a, v) in xi.iter_mut().enumerate().take(self.dim) {
            *v = self.wavenumber(k[a]);
        }
        xi
    }

    /// True when any component of the spectral index sits on the Nyquist plane.
    pub fn on_nyquist(&self, idx: usize) -> bool {
        let k = self.unravel(idx);
        (0..self.dim).any(|a| k[a] == self.n / 2)
    }

    /// Largest wavenumber resolved along an axis, `N/2 · π/L`.
    pub fn nyquist(&self) -> f64 {
        (self.n / 2) as f64 * self.dk()
    }

    /// Minimum-image displacement `x - y` on the periodic box.
    pub fn periodic_delta(&self, x: &[f64; 3], y: &[f64; 3]) -> [f64; 3] {
        let w = 2.0 * self.half_width;
        let mut d = [0.0; 3];
        for a in 0..self.dim {
            let mut v = x[a] - y[a];
            v -= w * (v / w).round();
            d[a] = v;
        }
        d
    }

    /// Lattice shift of flat index `idx` by integer offsets, wrapping periodically.
    pub fn shifted(&self, idx: usize, shift: [i64; 3]) -> usize {
        let k = self.unravel(idx);
        let n = self.n as i64;
        let mut out = [0usize; 3];
        for a in 0..self.dim {
            out[a] = (k[a] as i64 + shift[a]).rem_euclid(n) as usize;
        }
        self.ravel(out)
    }
}
