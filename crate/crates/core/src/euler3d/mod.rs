//! Three-dimensional Euler components: the Biot-Savart law, a stream function
//! for non-decaying velocities, localized initial data, the pressure formula,
//! vector integration-by-parts identities and a small vorticity stepper.

pub mod stepper;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::interp::{DilatedSampler, TrigInterpolant};
use crate::kernels::KernelSet;
use crate::lp::DyadicFamily;
use crate::quadrature::legendre_on;
use crate::smooth::Cutoff;
use crate::spectral::{self, norm2};
use crate::ul;

pub use stepper::{
    run_euler, serfati3d_residual, shear_flow, step_euler3d, taylor_green, uomega_bound_check, EulerConstants, EulerNorms, EulerRun,
    EulerState,
};

/// Default number of Gauss-Legendre nodes in the dilation variable.
pub const STREAM_ORDER: usize = 64;

fn require_3d(v: &VectorField) -> Result<()> {
    if v.grid().dim() != 3 || v.components().len() != 3 {
        return Err(Error::GridMismatch("3D vector field required".into()));
    }
    Ok(())
}

/// `u = curl(−Δ)^{-1}ω` on the periodic box.
pub fn biot_savart(omega: &VectorField) -> Result<VectorField> {
    require_3d(omega)?;
    let scale = omega.max_component_sup();
    let mean = omega.mean().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if mean > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Precondition(format!("vorticity has nonzero mean {mean:.3e}")));
    }
    let psi = VectorField::new(omega.components().iter().map(spectral::inverse_neg_laplacian).collect())?;
    spectral::curl(&psi)
}

/// `ψ(x) = −∫₀¹ τ x × u(τx) dτ`, evaluated pointwise from the exact
/// trigonometric interpolant of `u`.
#[derive(Debug, Clone)]
pub struct StreamFunction {
    u: [TrigInterpolant; 3],
    curl_u: [TrigInterpolant; 3],
    nodes: Vec<(f64, f64)>,
}

impl StreamFunction {
    pub fn new(u: &VectorField, order: usize) -> Result<Self> {
        require_3d(u)?;
        let w = spectral::curl(u)?;
        let interp = |v: &VectorField| {
            [0, 1, 2].map(|a| TrigInterpolant::new(v.component(a), 1e-14))
        };
        Ok(Self {
            u: interp(u),
            curl_u: interp(&w),
            nodes: legendre_on(order, 0.0, 1.0),
        })
    }

    fn weighted(&self, fields: &[TrigInterpolant; 3], x: [f64; 3], power: i32) -> [f64; 3] {
        let mut acc = [0.0; 3];
        for &(tau, w) in &self.nodes {
            let p = [tau * x[0], tau * x[1], tau * x[2]];
            let c = w * tau.powi(power);
            for (a, f) in fields.iter().enumerate() {
                acc[a] += c * f.eval(p);
            }
        }
        acc
    }

    pub fn eval(&self, x: [f64; 3]) -> [f64; 3] {
        let m = self.weighted(&self.u, x, 1);
        let c = cross(x, m);
        [-c[0], -c[1], -c[2]]
    }

    /// Fourth-order central differences of `ψ` at `x`: returns `(curl ψ, div ψ)`.
    pub fn derivatives_fd(&self, x: [f64; 3], h: f64) -> ([f64; 3], f64) {
        let mut jac = [[0.0; 3]; 3]; // jac[i][j] = ∂_j ψ^i
        for j in 0..3 {
            let at = |s: f64| {
                let mut y = x;
                y[j] += s * h;
                self.eval(y)
            };
            let (p1, m1, p2, m2) = (at(1.0), at(-1.0), at(2.0), at(-2.0));
            for i in 0..3 {
                jac[i][j] = (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * h);
            }
        }
        let curl = [
            jac[2][1] - jac[1][2],
            jac[0][2] - jac[2][0],
            jac[1][0] - jac[0][1],
        ];
        (curl, jac[0][0] + jac[1][1] + jac[2][2])
    }

    /// `∫₀¹ τ² x·(curl u)(τx) dτ`.
    pub fn div_formula(&self, x: [f64; 3]) -> f64 {
        let m = self.weighted(&self.curl_u, x, 2);
        x[0] * m[0] + x[1] * m[1] + x[2] * m[2]
    }

    pub fn velocity(&self, x: [f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|a| self.u[a].eval(x))
    }
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// `ψ` on every lattice point of the box (lattice coordinates taken in `[−L, L)`).
pub fn stream_function(u: &VectorField, order: usize) -> Result<VectorField> {
    require_3d(u)?;
    let g = *u.grid();
    let samplers: Vec<DilatedSampler> = u.components().iter().map(|c| DilatedSampler::new(c, 1e-14)).collect();
    let mut m = vec![vec![0.0; g.len()]; 3];
    for (tau, w) in legendre_on(order, 0.0, 1.0) {
        for (a, s) in samplers.iter().enumerate() {
            let vals = s.sample(tau);
            for (acc, v) in m[a].iter_mut().zip(vals.values()) {
                *acc += w * tau * v;
            }
        }
    }
    // ψ = −x × M with M = ∫ τ u(τx) dτ
    let comp = |c: usize| {
        let (a, b) = ((c + 1) % 3, (c + 2) % 3);
        let vals = (0..g.len())
            .map(|i| {
                let x = g.point(i);
                -(x[a] * m[b][i] - x[b] * m[a][i])
            })
            .collect();
        ScalarField::new(g, vals)
    };
    VectorField::new(vec![comp(0)?, comp(1)?, comp(2)?])
}

/// Result of the div-ψ comparison at a set of probe points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivStreamReport {
    pub probes: usize,
    pub max_abs_error: f64,
    pub scale: f64,
    pub relative_error: f64,
}

/// Compares finite-difference `div ψ` with the dilation formula at probes.
pub fn div_stream_check(u: &VectorField, probes: &[[f64; 3]], h: f64) -> Result<DivStreamReport> {
    let sf = StreamFunction::new(u, STREAM_ORDER)?;
    let mut err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &x in probes {
        let (_, d) = sf.derivatives_fd(x, h);
        let f = sf.div_formula(x);
        err = err.max((d - f).abs());
        scale = scale.max(f.abs());
    }
    let base = scale.max(u.max_component_sup() * h);
    Ok(DivStreamReport {
        probes: probes.len(),
        max_abs_error: err,
        scale,
        relative_error: if base > 0.0 { err / base } else { 0.0 },
    })
}

/// Spectral Sobolev norm on the box, `(∫ |(1−Δ)^{s/2} f|²)^{1/2}`.
pub fn box_sobolev_norm(comps: &[ScalarField], s: f64) -> f64 {
    let mut total = 0.0;
    for f in comps {
        let g = f.grid();
        let spec = f.spectrum();
        let w = g.volume() / (g.len() as f64).powi(2);
        total += (0..g.len())
            .map(|i| (1.0 + norm2(g.wave_vector(i))).powf(s) * spec[i].norm_sqr())
            .sum::<f64>()
            * w;
    }
    total.sqrt()
}

/// Localized, band-limited version of `u⁰` and the diagnostics that go with it.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub n: usize,
    pub m_n: i32,
    /// `S_{m_n}(curl(φ_n ψ))`.
    pub u_n: VectorField,
    /// `S_{m_n}(φ_n u⁰) + S_{m_n}(∇φ_n × ψ)`.
    pub product_form: VectorField,
    /// `‖curl form − product form‖_∞ / ‖curl form‖_∞`.
    pub form_mismatch: f64,
    /// `‖div u_n‖_∞ / ‖∇u_n‖_∞`.
    pub divergence: f64,
    pub hs_ul: f64,
    pub hs_ul_ratio: f64,
}

fn low_pass_vector(family: &DyadicFamily, v: &VectorField, m: i32) -> Result<VectorField> {
    VectorField::new(v.components().iter().map(|c| family.low_pass(c, m)).collect::<Result<_>>()?)
}

/// Smallest index `m` for which `S_m` is the identity on the lattice.
fn identity_level(family: &DyadicFamily) -> i32 {
    let g = family.grid();
    let k_max = g.nyquist() * (g.dim() as f64).sqrt();
    let mut m = 0;
    while 0.6 * 2f64.powi(m + 1) < k_max {
        m += 1;
    }
    m
}

/// `u⁰_n = S_{m_n}(curl(φ_n ψ))` with `φ_n` the cutoff of radius `n` and `ψ`
/// the stream function of `u⁰`.
///
/// `m_n` is the smallest `m ≥ n` whose low-pass error on `curl(φ_n ψ)` is at
/// most `1/n` in `H^s` on the box.
pub fn prepare_initial_data(
    u0: &VectorField,
    n: usize,
    family: &DyadicFamily,
    s: usize,
    lambda: f64,
) -> Result<PreparedData> {
    require_3d(u0)?;
    if n == 0 {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    let g = *u0.grid();
    let cutoff = Cutoff::new(n as f64);
    if cutoff.support() >= g.half_width() {
        return Err(Error::Precondition(format!(
            "cutoff support {} does not fit in the box half-width {}",
            cutoff.support(),
            g.half_width()
        )));
    }
    let top = identity_level(family);
    if n as i32 > top {
        return Err(Error::BlockOutOfRange { j: n as i32, j_max: top });
    }
    let psi = stream_function(u0, STREAM_ORDER)?;
    let phi = ScalarField::from_fn(g, |x| cutoff.radial(norm2(x).sqrt()));
    let grad_phi = VectorField::from_fn(g, |x| {
        let r = norm2(x).sqrt();
        if r == 0.0 {
            return [0.0; 3];
        }
        let d = cutoff.radial_jet(r)[1] / r;
        [d * x[0], d * x[1], d * x[2]]
    });
    let full = spectral::curl(&psi.mul_scalar(&phi)?)?;
    let mut m_n = n as i32;
    loop {
        let tail = full.sub(&low_pass_vector(family, &full, m_n)?)?;
        if box_sobolev_norm(tail.components(), s as f64) <= 1.0 / n as f64 || m_n >= top {
            break;
        }
        m_n += 1;
    }
    let u_n = low_pass_vector(family, &full, m_n)?;
    let product_form = low_pass_vector(family, &u0.mul_scalar(&phi)?, m_n)?
        .add(&low_pass_vector(family, &grad_phi.cross(&psi)?, m_n)?)?;
    let scale = u_n.max_component_sup();
    let form_mismatch = u_n.sub(&product_form)?.max_component_sup() / scale.max(f64::MIN_POSITIVE);
    let grad_scale = u_n
        .components()
        .iter()
        .map(|c| spectral::grad(c).max_component_sup())
        .fold(0.0, f64::max);
    let divergence = spectral::div(&u_n).sup_norm() / grad_scale.max(f64::MIN_POSITIVE);
    let hs_ul = ul::hs_ul_norm_vector(&u_n, s, lambda)?;
    let base = ul::hs_ul_norm_vector(u0, s, lambda)?;
    Ok(PreparedData {
        n,
        m_n,
        u_n,
        product_form,
        form_mismatch,
        divergence,
        hs_ul,
        hs_ul_ratio: if base > 0.0 { hs_ul / base } else { 0.0 },
    })
}

/// `∇p` from the kernel-split formula.
pub fn pressure_gradient(u: &VectorField, ks: &KernelSet) -> Result<VectorField> {
    ks.pressure_gradient(u)
}

/// Spectral Poisson oracle `∇(−Δ)^{-1} div div(u⊗u)`.
pub fn pressure_gradient_oracle(u: &VectorField) -> Result<VectorField> {
    require_3d(u)?;
    let mut dd = ScalarField::zeros(*u.grid());
    for a in 0..3 {
        for b in 0..3 {
            let prod = spectral::dealias(&u.component(a).mul(u.component(b))?);
            let term = spectral::partial(&spectral::partial(&prod, b), a);
            dd = dd.add(&term)?;
        }
    }
    Ok(spectral::grad(&spectral::inverse_neg_laplacian(&dd)))
}

/// Both sides of the vector integration-by-parts identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IbpReport {
    /// `∫ u × curl v` against `∫ (−∂_k u^i v^i + div u v^k) e_k`.
    pub cross_lhs: [f64; 3],
    pub cross_rhs: [f64; 3],
    /// `∫ (u·∇u)·V` against `−∫ (u·∇V)·u`.
    pub advect_lhs: f64,
    pub advect_rhs: f64,
    pub relative_error: f64,
}

fn box_integral(f: &ScalarField) -> f64 {
    f.integral()
}

/// Evaluates both identities; `u` must be divergence-free for the second.
pub fn ibp_identity_suite(u: &VectorField, v: &VectorField, big_v: &VectorField) -> Result<IbpReport> {
    require_3d(u)?;
    require_3d(v)?;
    require_3d(big_v)?;
    let lhs_field = u.cross(&spectral::curl(v)?)?;
    let cross_lhs = [0, 1, 2].map(|k| box_integral(lhs_field.component(k)));
    let div_u = spectral::div(u);
    let mut cross_rhs = [0.0; 3];
    for (k, out) in cross_rhs.iter_mut().enumerate() {
        let mut acc = div_u.mul(v.component(k))?;
        for i in 0..3 {
            acc = acc.sub(&spectral::partial(u.component(i), k).mul(v.component(i))?)?;
        }
        *out = box_integral(&acc);
    }
    let advect = |w: &VectorField, target: &VectorField| -> Result<f64> {
        // ∫ (u·∇w)·target
        let mut total = 0.0;
        for k in 0..3 {
            let mut d = ScalarField::zeros(*u.grid());
            for i in 0..3 {
                d = d.add(&u.component(i).mul(&spectral::partial(w.component(k), i))?)?;
            }
            total += box_integral(&d.mul(target.component(k))?);
        }
        Ok(total)
    };
    let advect_lhs = advect(u, big_v)?;
    let advect_rhs = -advect(big_v, u)?;
    let cross_scale = cross_lhs
        .iter()
        .chain(&cross_rhs)
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let cross_err = (0..3).map(|k| (cross_lhs[k] - cross_rhs[k]).abs()).fold(0.0, f64::max);
    let adv_scale = advect_lhs.abs().max(advect_rhs.abs());
    let rel = |e: f64, s: f64| if s > 0.0 { e / s } else { e };
    Ok(IbpReport {
        cross_lhs,
        cross_rhs,
        advect_lhs,
        advect_rhs,
        relative_error: rel(cross_err, cross_scale).max(rel((advect_lhs - advect_rhs).abs(), adv_scale)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    #[test]
    fn constant_velocity_stream_function_closed_form() {
        let g = Grid::new(3, PI, 16).unwrap();
        let u = VectorField::from_fn(g, |_| [0.0, 0.0, 1.0]);
        let sf = StreamFunction::new(&u, STREAM_ORDER).unwrap();
        let p = sf.eval([1.0, 0.0, 0.0]);
        assert!((p[1] - 0.5).abs() < 1e-12 && p[0].abs() < 1e-12 && p[2].abs() < 1e-12);
        assert_eq!(sf.eval([0.0; 3]), [0.0; 3]);
    }

    #[test]
    fn biot_savart_roundtrip_and_mean_rejection() {
        let g = Grid::new(3, PI, 16).unwrap();
        let u = VectorField::from_fn(g, |x| [x[1].sin(), 0.0, 0.0]);
        let w = spectral::curl(&u).unwrap();
        let back = biot_savart(&w).unwrap();
        assert!(back.sub(&u).unwrap().max_component_sup() < 1e-12);
        let bad = VectorField::from_fn(g, |_| [1.0, 0.0, 0.0]);
        assert!(biot_savart(&bad).is_err());
    }
}
