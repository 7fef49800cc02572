//! Multi-dimensional complex FFTs over row-major lattices.
//!
//! Normalization: the forward transform is the raw DFT
//! `F[k] = Σ_j f[j] e^{-2πi k·j/N}` and the inverse divides by `N^d`, so
//! `inverse(forward(f)) = f`. Multiplying a forward coefficient by `dx^d`
//! approximates the continuous Fourier transform `∫ f(x) e^{-iξ·x} dx` up to
//! the phase `e^{iξ·L}` from the lattice starting at `-L`; see
//! [`crate::field::ScalarField::parseval_coefficients`] for the unitary
//! scaling used in Parseval checks.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::par;

type Plan = Arc<dyn Fft<f64>>;

fn plan(n: usize, direction: FftDirection) -> Plan {
    static PLANS: OnceLock<Mutex<(FftPlanner<f64>, HashMap<(usize, bool), Plan>)>> =
        OnceLock::new();
    let cell = PLANS.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cell.lock().expect("fft plan cache poisoned");
    let (planner, cache) = &mut *guard;
    let key = (n, direction == FftDirection::Forward);
    cache
        .entry(key)
        .or_insert_with(|| planner.plan_fft(n, direction))
        .clone()
}

/// Lines handed to one task when transforming the contiguous axis.
const LINES_PER_TASK: usize = 16;

fn transform_axis(data: &mut [Complex64], n: usize, dim: usize, axis: usize, fft: &Plan) {
    // Layout: [outer][n][inner] with `inner = n^(dim-1-axis)`.
    let inner = n.pow((dim - 1 - axis) as u32);
    if inner == 1 {
        par::for_each_chunk_mut(data, n * LINES_PER_TASK, |_, chunk| fft.process(chunk));
        return;
    }
    let outer = data.len() / (n * inner);
    let lines = outer * inner;
    let mut gathered = vec![Complex64::new(0.0, 0.0); data.len()];
    {
        let src: &[Complex64] = data;
        par::for_each_chunk_mut(&mut gathered, n * LINES_PER_TASK, |task, chunk| {
            let first = task * LINES_PER_TASK;
            for (l, line) in chunk.chunks_mut(n).enumerate() {
                let id = first + l;
                let (o, i) = (id / inner, id % inner);
                let base = o * n * inner + i;
                for (k, v) in line.iter_mut().enumerate() {
                    *v = src[base + k * inner];
                }
            }
            fft.process(chunk);
        });
    }
    debug_assert_eq!(lines * n, data.len());
    par::for_each_chunk_mut(data, n * inner, |o, block| {
        for i in 0..inner {
            let line = &gathered[(o * inner + i) * n..(o * inner + i + 1) * n];
            for (k, v) in line.iter().enumerate() {
                block[k * inner + i] = *v;
            }
        }
    });
}

/// In-place forward DFT of a `dim`-dimensional cube with side `n`.
pub fn forward(data: &mut [Complex64], n: usize, dim: usize) {
    let fft = plan(n, FftDirection::Forward);
    for axis in 0..dim {
        transform_axis(data, n, dim, axis, &fft);
    }
}

/// In-place inverse DFT including the `1/N^d` factor.
pub fn inverse(data: &mut [Complex64], n: usize, dim: usize) {
    let fft = plan(n, FftDirection::Inverse);
    for axis in 0..dim {
        transform_axis(data, n, dim, axis, &fft);
    }
    let scale = 1.0 / data.len() as f64;
    par::for_each_mut(data, |_, v| *v *= scale);
}

/// Forward transform of real samples.
pub fn forward_real(values: &[f64], n: usize, dim: usize) -> Vec<Complex64> {
    let mut buf = par::map_slice(values, |&v| Complex64::new(v, 0.0));
    forward(&mut buf, n, dim);
    buf
}

/// Inverse transform keeping the real part (the Hermitian projection).
pub fn inverse_real(mut spectrum: Vec<Complex64>, n: usize, dim: usize) -> Vec<f64> {
    inverse(&mut spectrum, n, dim);
    par::map_slice(&spectrum, |c| c.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(data: &[Complex64], n: usize, dim: usize) -> Vec<Complex64> {
        let len = data.len();
        let idx = |f: usize| -> Vec<usize> {
            let mut v = vec![0; dim];
            let mut r = f;
            for a in (0..dim).rev() {
                v[a] = r % n;
                r /= n;
            }
            v
        };
        (0..len)
            .map(|k| {
                let kk = idx(k);
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &d) in data.iter().enumerate() {
                    let jj = idx(j);
                    let phase: f64 = (0..dim).map(|a| (kk[a] * jj[a]) as f64).sum::<f64>()
                        * -2.0
                        * std::f64::consts::PI
                        / n as f64;
                    acc += d * Complex64::from_polar(1.0, phase);
                }
                acc
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_in_2d_and_3d() {
        for &(n, dim) in &[(8usize, 2usize), (4, 3)] {
            let len = n.pow(dim as u32);
            let data: Vec<Complex64> = (0..len)
                .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
                .collect();
            let expect = naive_dft(&data, n, dim);
            let mut got = data.clone();
            forward(&mut got, n, dim);
            for (a, b) in got.iter().zip(&expect) {
                assert!((a - b).norm() < 1e-10, "{a} vs {b}");
            }
            inverse(&mut got, n, dim);
            for (a, b) in got.iter().zip(&data) {
                assert!((a - b).norm() < 1e-13);
            }
        }
    }
}
