//! Sampled scalar and vector fields with a lazily cached spectrum.

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::Grid;
use crate::par;

/// Real samples on a [`Grid`], row-major, plus the forward DFT computed on demand.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
    spectrum: OnceLock<Arc<Vec<Complex64>>>,
}

impl PartialEq for ScalarField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl ScalarField {
    /// Wraps samples, rejecting wrong lengths and non-finite values.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("ScalarField::new"));
        }
        Ok(Self::from_values_unchecked(grid, values))
    }

    pub(crate) fn from_values_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid,
            values,
            spectrum: OnceLock::new(),
        }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::from_values_unchecked(grid, vec![0.0; grid.len()])
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self::from_values_unchecked(grid, vec![c; grid.len()])
    }

    /// Samples `f` at every lattice point.
    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn([f64; 3]) -> f64 + Sync + Send,
    {
        Self::from_values_unchecked(grid, par::map_range(grid.len(), |i| f(grid.point(i))))
    }

    /// Builds a field from DFT coefficients, keeping the real part of the inverse.
    pub fn from_spectrum(grid: Grid, spectrum: Vec<Complex64>) -> Self {
        debug_assert_eq!(spectrum.len(), grid.len());
        Self::from_values_unchecked(grid, fft::inverse_real(spectrum, grid.n(), grid.dim()))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn has_spectrum(&self) -> bool {
        self.spectrum.get().is_some()
    }

    /// Raw forward DFT of the samples (cached).
    pub fn spectrum(&self) -> &Arc<Vec<Complex64>> {
        self.spectrum.get_or_init(|| {
            Arc::new(fft::forward_real(&self.values, self.grid.n(), self.grid.dim()))
        })
    }

    /// Coefficients normalized so that `Σ|c|² = Σ|f|² dx^d`.
    pub fn parseval_coefficients(&self) -> Vec<Complex64> {
        let scale = self.grid.cell_volume() / self.grid.volume().sqrt();
        par::map_slice(self.spectrum(), |c| c * scale)
    }

    /// Forward-then-inverse transform.
    pub fn dft_roundtrip(&self) -> Self {
        Self::from_spectrum(self.grid, self.spectrum().as_ref().clone())
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Sync + Send,
    {
        Self::from_values_unchecked(self.grid, par::map_slice(&self.values, |&v| f(v)))
    }

    pub fn zip_map<F>(&self, other: &Self, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Sync + Send,
    {
        self.check_same_grid(other)?;
        let (a, b) = (&self.values, &other.values);
        Ok(Self::from_values_unchecked(
            self.grid,
            par::map_range(a.len(), |i| f(a[i], b[i])),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `self + c * other`
    pub fn axpy(&self, c: f64, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + c * b)
    }

    pub fn sup_norm(&self) -> f64 {
        let v = &self.values;
        par::max_range(v.len(), |i| v[i].abs()).max(0.0)
    }

    /// `(Σ |f|² dx^d)^{1/2}` over the box.
    pub fn l2_norm(&self) -> f64 {
        let v = &self.values;
        (par::sum_range(v.len(), |i| v[i] * v[i]) * self.grid.cell_volume()).sqrt()
    }

    /// Box integral `Σ f dx^d`.
    pub fn integral(&self) -> f64 {
        let v = &self.values;
        par::sum_range(v.len(), |i| v[i]) * self.grid.cell_volume()
    }

    pub fn mean(&self) -> f64 {
        let v = &self.values;
        par::sum_range(v.len(), |i| v[i]) / v.len() as f64
    }

    pub fn min(&self) -> f64 {
        let v = &self.values;
        -par::max_range(v.len(), |i| -v[i])
    }

    pub fn max(&self) -> f64 {
        let v = &self.values;
        par::max_range(v.len(), |i| v[i])
    }

    /// Oscillation `max - min`.
    pub fn osc(&self) -> f64 {
        self.max() - self.min()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Periodic lattice shift: `out(x) = self(x - h)` with `h = shift · dx`.
    pub fn shift(&self, shift: [i64; 3]) -> Self {
        let g = self.grid;
        let neg = [-shift[0], -shift[1], -shift[2]];
        Self::from_values_unchecked(
            g,
            par::map_range(g.len(), |i| self.values[g.shifted(i, neg)]),
        )
    }

    /// Value at a lattice node given by per-axis indices.
    pub fn at(&self, k: [usize; 3]) -> f64 {
        self.values[self.grid.ravel(k)]
    }
}

/// `dim` scalar components sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::GridMismatch("vector field needs components".into()))?;
        let grid = *first.grid();
        if components.len() != grid.dim() {
            return Err(Error::GridMismatch(format!(
                "{} components on a {}-dimensional grid",
                components.len(),
                grid.dim()
            )));
        }
        for c in &components {
            first.check_same_grid(c)?;
        }
        Ok(Self { grid, components })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            components: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn([f64; 3]) -> [f64; 3] + Sync + Send,
    {
        let samples = par::map_range(grid.len(), |i| f(grid.point(i)));
        let components = (0..grid.dim())
            .map(|a| {
                ScalarField::from_values_unchecked(grid, samples.iter().map(|s| s[a]).collect())
            })
            .collect();
        Self { grid, components }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component(&self, a: usize) -> &ScalarField {
        &self.components[a]
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.components
    }

    pub fn zip_map<F>(&self, other: &Self, f: F) -> Result<Self>
    where
        F: Fn(&ScalarField, &ScalarField) -> Result<ScalarField>,
    {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("vector fields on different grids".into()));
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| f(a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: self.grid,
            components,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a.sub(b))
    }

    pub fn axpy(&self, c: f64, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a.axpy(c, b))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            components: self.components.iter().map(|f| f.scale(c)).collect(),
        }
    }

    /// Multiplies every component by a scalar field.
    pub fn mul_scalar(&self, s: &ScalarField) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|c| c.mul(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: self.grid,
            components,
        })
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let g = self.grid;
        let comps = &self.components;
        ScalarField::from_values_unchecked(
            g,
            par::map_range(g.len(), |i| {
                comps.iter().map(|c| c.values()[i].powi(2)).sum::<f64>().sqrt()
            }),
        )
    }

    /// `sup_x |v(x)|` with the Euclidean norm.
    pub fn sup_norm(&self) -> f64 {
        self.magnitude().sup_norm()
    }

    /// Largest sup norm over components.
    pub fn max_component_sup(&self) -> f64 {
        self.components
            .iter()
            .map(ScalarField::sup_norm)
            .fold(0.0, f64::max)
    }

    pub fn l2_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.l2_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Component-wise means.
    pub fn mean(&self) -> Vec<f64> {
        self.components.iter().map(ScalarField::mean).collect()
    }

    /// Pointwise dot product.
    pub fn dot(&self, other: &Self) -> Result<ScalarField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("dot of fields on different grids".into()));
        }
        let g = self.grid;
        let (a, b) = (&self.components, &other.components);
        Ok(ScalarField::from_values_unchecked(
            g,
            par::map_range(g.len(), |i| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| x.values()[i] * y.values()[i])
                    .sum()
            }),
        ))
    }

    /// Pointwise cross product (3D only).
    pub fn cross(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid || self.grid.dim() != 3 {
            return Err(Error::GridMismatch("cross product needs two 3D fields".into()));
        }
        let (a, b) = (&self.components, &other.components);
        let comp = |i: usize, j: usize| {
            a[i].mul(&b[j])
                .and_then(|p| p.sub(&a[j].mul(&b[i])?))
        };
        Self::new(vec![comp(1, 2)?, comp(2, 0)?, comp(0, 1)?])
    }

    pub fn shift(&self, shift: [i64; 3]) -> Self {
        Self {
            grid: self.grid,
            components: self.components.iter().map(|c| c.shift(shift)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(ScalarField::is_finite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_bad_samples() {
        let g = Grid::new(2, PI, 16).unwrap();
        assert!(ScalarField::new(g, vec![0.0; 10]).is_err());
        let mut v = vec![0.0; g.len()];
        v[3] = f64::NAN;
        assert!(matches!(ScalarField::new(g, v), Err(Error::NonFinite(_))));
    }

    #[test]
    fn roundtrip_and_cache() {
        let g = Grid::new(2, PI, 32).unwrap();
        let f = ScalarField::from_fn(g, |x| (x[0] * 3.0).sin() + x[1].cos().powi(3));
        assert!(!f.has_spectrum());
        let r = f.dft_roundtrip();
        assert!(f.has_spectrum());
        let err = r.sub(&f).unwrap().sup_norm();
        assert!(err <= 1e-12 * f.sup_norm());
    }

    #[test]
    fn shift_moves_samples() {
        let g = Grid::new(2, PI, 16).unwrap();
        let f = ScalarField::from_fn(g, |x| x[0] + 10.0 * x[1]);
        let s = f.shift([1, 0, 0]);
        assert_eq!(s.at([5, 3, 0]), f.at([4, 3, 0]));
        assert_eq!(s.at([0, 3, 0]), f.at([15, 3, 0]));
    }

    #[test]
    fn vector_components_share_grid() {
        let g2 = Grid::new(2, PI, 16).unwrap();
        let g3 = Grid::new(2, PI, 32).unwrap();
        assert!(VectorField::new(vec![ScalarField::zeros(g2), ScalarField::zeros(g3)]).is_err());
        assert!(VectorField::new(vec![ScalarField::zeros(g2)]).is_err());
        assert!(VectorField::new(vec![ScalarField::zeros(g2), ScalarField::zeros(g2)]).is_ok());
    }
}
