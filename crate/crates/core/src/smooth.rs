//! The one smooth step profile used everywhere (Fourier partition, kernel
//! cutoffs, localizing bumps), plus a second-order forward-mode jet used to
//! differentiate kernels in closed form.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// `exp(-1/t)` for `t > 0`, zero otherwise.
pub fn flat_exp(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Radial step equal to 1 on `[0, inner]` and 0 on `[outer, ∞)`.
///
/// In between it is `q((outer−r)/δ) / (q((outer−r)/δ) + q((r−inner)/δ))`
/// with `q = flat_exp` and `δ = outer − inner`; the profile satisfies
/// `step(inner + s) + step(outer − s) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub inner: f64,
    pub outer: f64,
}

impl Step {
    pub const fn new(inner: f64, outer: f64) -> Self {
        Self { inner, outer }
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r <= self.inner {
            return 1.0;
        }
        if r >= self.outer {
            return 0.0;
        }
        let d = self.outer - self.inner;
        let a = flat_exp((self.outer - r) / d);
        let b = flat_exp((r - self.inner) / d);
        a / (a + b)
    }

    /// Value and first two derivatives at `r`.
    pub fn jet(&self, r: f64) -> [f64; 3] {
        if r <= self.inner || r >= self.outer {
            return [self.eval(r), 0.0, 0.0];
        }
        let d = self.outer - self.inner;
        let x = Jet::<1>::variable(r, 0);
        let a = flat_exp_jet((Jet::constant(self.outer) - x) / d);
        let b = flat_exp_jet((x - self.inner) / d);
        let h = a / (a + b);
        [h.v, h.g[0], h.h[0][0]]
    }
}

fn flat_exp_jet<const D: usize>(t: Jet<D>) -> Jet<D> {
    t.map(|s| {
        let e = flat_exp(s);
        [e, e / (s * s), e * (1.0 - 2.0 * s) / s.powi(4)]
    })
}

/// Value, gradient and Hessian of a function of `D` variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<const D: usize> {
    pub v: f64,
    pub g: [f64; D],
    pub h: [[f64; D]; D],
}

impl<const D: usize> Jet<D> {
    pub fn constant(v: f64) -> Self {
        Self {
            v,
            g: [0.0; D],
            h: [[0.0; D]; D],
        }
    }

    /// The coordinate function `x_axis` evaluated at `v`.
    pub fn variable(v: f64, axis: usize) -> Self {
        let mut j = Self::constant(v);
        j.g[axis] = 1.0;
        j
    }

    /// Chain rule with `[f(v), f'(v), f''(v)]` supplied by `f`.
    pub fn map<F: Fn(f64) -> [f64; 3]>(self, f: F) -> Self {
        let [f0, f1, f2] = f(self.v);
        let mut out = Self::constant(f0);
        for i in 0..D {
            out.g[i] = f1 * self.g[i];
            for k in 0..D {
                out.h[i][k] = f2 * self.g[i] * self.g[k] + f1 * self.h[i][k];
            }
        }
        out
    }

    pub fn sqrt(self) -> Self {
        self.map(|x| {
            let s = x.sqrt();
            [s, 0.5 / s, -0.25 / (s * x)]
        })
    }

    pub fn recip(self) -> Self {
        self.map(|x| [1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x)])
    }

    pub fn powi(self, n: i32) -> Self {
        let nf = n as f64;
        self.map(|x| {
            [
                x.powi(n),
                nf * x.powi(n - 1),
                nf * (nf - 1.0) * x.powi(n - 2),
            ]
        })
    }
}

impl<const D: usize> Add for Jet<D> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        self.v += o.v;
        for i in 0..D {
            self.g[i] += o.g[i];
            for k in 0..D {
                self.h[i][k] += o.h[i][k];
            }
        }
        self
    }
}

impl<const D: usize> Neg for Jet<D> {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl<const D: usize> Sub for Jet<D> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<const D: usize> Sub<f64> for Jet<D> {
    type Output = Self;
    fn sub(mut self, c: f64) -> Self {
        self.v -= c;
        self
    }
}

impl<const D: usize> Mul for Jet<D> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = Self::constant(self.v * o.v);
        for i in 0..D {
            out.g[i] = self.g[i] * o.v + self.v * o.g[i];
            for k in 0..D {
                out.h[i][k] = self.h[i][k] * o.v
                    + self.g[i] * o.g[k]
                    + self.g[k] * o.g[i]
                    + self.v * o.h[i][k];
            }
        }
        out
    }
}

impl<const D: usize> Mul<f64> for Jet<D> {
    type Output = Self;
    fn mul(mut self, c: f64) -> Self {
        self.v *= c;
        for i in 0..D {
            self.g[i] *= c;
            for k in 0..D {
                self.h[i][k] *= c;
            }
        }
        self
    }
}

impl<const D: usize> Div for Jet<D> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<const D: usize> Div<f64> for Jet<D> {
    type Output = Self;
    fn div(self, c: f64) -> Self {
        self * (1.0 / c)
    }
}

/// Euclidean norm of a point as a jet in its coordinates.
pub fn radius_jet<const D: usize>(x: [f64; D]) -> Jet<D> {
    let mut r2 = Jet::constant(0.0);
    for (a, &xa) in x.iter().enumerate() {
        let c = Jet::variable(xa, a);
        r2 = r2 + c * c;
    }
    r2.sqrt()
}

/// Unit-scale profile shared by cutoffs and bumps: 1 on `B₁`, 0 off `B₂`.
pub const UNIT_STEP: Step = Step::new(1.0, 2.0);

/// Radial cutoff `a_λ(x) = a(|x|/λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub lambda: f64,
}

impl Cutoff {
    pub fn new(lambda: f64) -> Self {
        Self { lambda }
    }

    pub fn radial(&self, r: f64) -> f64 {
        UNIT_STEP.eval(r / self.lambda)
    }

    /// `[a_λ, a_λ', a_λ'']` as functions of `r`.
    pub fn radial_jet(&self, r: f64) -> [f64; 3] {
        let l = self.lambda;
        let [a0, a1, a2] = UNIT_STEP.jet(r / l);
        [a0, a1 / l, a2 / (l * l)]
    }

    /// Support radius `2λ`.
    pub fn support(&self) -> f64 {
        2.0 * self.lambda
    }

    /// `∫_0^∞ a_λ(r) dr = 1.5 λ` by the reflection symmetry of the step.
    pub fn radial_integral(&self) -> f64 {
        1.5 * self.lambda
    }
}

/// Localizing bump `φ_{x₀,λ}(y) = a(|y − x₀|/λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: [f64; 3],
    pub lambda: f64,
}

impl Bump {
    pub fn new(center: [f64; 3], lambda: f64) -> Self {
        Self { center, lambda }
    }

    pub fn eval(&self, y: [f64; 3]) -> f64 {
        let r = ((y[0] - self.center[0]).powi(2)
            + (y[1] - self.center[1]).powi(2)
            + (y[2] - self.center[2]).powi(2))
        .sqrt();
        UNIT_STEP.eval(r / self.lambda)
    }

    /// Gradient of the bump at `y`.
    pub fn grad(&self, y: [f64; 3]) -> [f64; 3] {
        let d = [
            y[0] - self.center[0],
            y[1] - self.center[1],
            y[2] - self.center[2],
        ];
        let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        if r == 0.0 {
            return [0.0; 3];
        }
        let slope = UNIT_STEP.jet(r / self.lambda)[1] / self.lambda;
        [slope * d[0] / r, slope * d[1] / r, slope * d[2] / r]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_plateaus_and_symmetry() {
        let s = Step::new(0.6, 5.0 / 6.0);
        assert_eq!(s.eval(0.0), 1.0);
        assert_eq!(s.eval(0.6), 1.0);
        assert_eq!(s.eval(5.0 / 6.0), 0.0);
        for k in 1..20 {
            let t = k as f64 / 20.0 * (5.0 / 6.0 - 0.6);
            let sum = s.eval(0.6 + t) + s.eval(5.0 / 6.0 - t);
            assert!((sum - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn step_jet_matches_differences() {
        let s = UNIT_STEP;
        let h = 1e-5;
        for &r in &[1.1, 1.3, 1.5, 1.77, 1.95] {
            let [v, d1, d2] = s.jet(r);
            assert_eq!(v, s.eval(r));
            let fd1 = (s.eval(r + h) - s.eval(r - h)) / (2.0 * h);
            let fd2 = (s.eval(r + h) - 2.0 * v + s.eval(r - h)) / (h * h);
            assert!((d1 - fd1).abs() < 1e-8, "{d1} {fd1}");
            assert!((d2 - fd2).abs() < 1e-4, "{d2} {fd2}");
        }
    }

    #[test]
    fn jet_hessian_of_inverse_radius() {
        // 1/r in 3D: ∂_i∂_j (1/r) = (3 x_i x_j − r² δ_ij) / r^5
        let x = [0.3, -0.7, 1.1];
        let j = radius_jet(x).recip();
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let r5 = r2.powf(2.5);
        for i in 0..3 {
            for k in 0..3 {
                let want = (3.0 * x[i] * x[k] - if i == k { r2 } else { 0.0 }) / r5;
                assert!((j.h[i][k] - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn cutoff_integral_is_three_halves_lambda() {
        let c = Cutoff::new(0.75);
        let n = 200_000;
        let h = c.support() / n as f64;
        let sum: f64 = (0..n).map(|i| c.radial((i as f64 + 0.5) * h)).sum::<f64>() * h;
        assert!((sum - c.radial_integral()).abs() < 1e-9);
    }
}
