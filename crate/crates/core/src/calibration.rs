//! Frozen estimate constants and the corpora they were fitted on.
//!
//! The analytic estimates carry unspecified constants. Each one is replaced by
//! the smallest value that makes the estimate hold on every member of a fixed
//! calibration corpus (seeds [`CALIBRATION_SEEDS`]); the monitors are then
//! checked on the disjoint [`TEST_SEEDS`]. Re-fit with
//! `cargo run --release -p serfati-core --example calibrate`.

use rand::Rng;
use std::f64::consts::PI;

use crate::error::Result;
use crate::euler3d::{self, EulerConstants, EulerNorms};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::kernels::{KernelKind, KernelSet};
use crate::lp::DyadicFamily;
use crate::random::{band_limited, divergence_free, rng, Band};
use crate::sqg::monitors::{MonitorParams, SqgConstants, SqgNorms};
use crate::sqg::{run_sqg, HaltRule, RunOptions, SqgMode};
use crate::ul;

pub const CALIBRATION_SEEDS: [u64; 10] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9];
pub const TEST_SEEDS: [u64; 10] = [100, 101, 102, 103, 104, 105, 106, 107, 108, 109];

pub const SQG: SqgConstants = SqgConstants {
    short_time: 1.0,
    gronwall: 0.020_02,
    velocity: 0.893_1,
};

pub const EULER: EulerConstants = EulerConstants {
    vorticity: 0.128_2,
    velocity: 1.163_1,
};

/// `‖∇p‖_∞ ≤ C ‖u‖²_{C̃¹}`.
pub const PRESSURE: f64 = 0.020_98;

/// `‖u⁰_n‖_{H^s_ul} ≤ C ‖u⁰‖_{H^s_ul}` for the localized initial data.
pub const INITIAL_DATA: f64 = 43.50;

/// Fraction of the short-time denominator at which SQG runs stop.
pub const HALT_LIMIT: f64 = 0.9;

pub const SQG_PARAMS: MonitorParams = MonitorParams {
    r: 1.5,
    s: 3,
    lambda: 1.0,
};

pub fn sqg_grid() -> Grid {
    Grid::new(2, 4.0 * PI, 128).expect("valid grid")
}

pub fn sqg_member(seed: u64) -> ScalarField {
    let mut r = rng(seed);
    let amp = 0.2 + 0.6 * r.gen::<f64>();
    band_limited(sqg_grid(), Band::new(0.25, 3.0), 1.0, amp, &mut r)
}

pub fn sqg_run_options(halt: Option<HaltRule>) -> RunOptions {
    let mut o = RunOptions::new(0.5, 1.0 / 64.0, SqgMode::Spectral);
    o.output_every = 4;
    o.halt = halt;
    o
}

/// Norm table of one SQG corpus member; `frozen` enables the short-time halt.
pub fn sqg_norms(seed: u64, frozen: Option<&SqgConstants>) -> Result<SqgNorms> {
    let g = sqg_grid();
    let theta0 = sqg_member(seed);
    let family = DyadicFamily::new(g)?;
    let ks = KernelSet::new(g, 1.0, KernelKind::Sqg2d)?;
    let halt = match frozen {
        Some(c) => {
            let u0 = crate::sqg::constitutive_spectral(&theta0)?;
            let a0 = u0.max_component_sup() + family.holder_norm(&theta0, SQG_PARAMS.r, false)?.value;
            Some(HaltRule {
                constant: c.short_time,
                a0,
                limit: HALT_LIMIT,
            })
        }
        None => None,
    };
    let traj = run_sqg(&theta0, &sqg_run_options(halt), &ks)?;
    SqgNorms::measure(&traj, &SQG_PARAMS, &family)
}

pub const EULER_S: usize = 3;
pub const EULER_UL_LAMBDA: f64 = 0.75;

pub fn euler_grid() -> Grid {
    Grid::new(3, PI, 16).expect("valid grid")
}

pub fn euler_member(seed: u64) -> VectorField {
    let mut r = rng(seed);
    let amp = 0.2 + 0.6 * r.gen::<f64>();
    divergence_free(euler_grid(), Band::new(1.0, 3.0), 1.0, amp, &mut r)
}

pub fn euler_norms(seed: u64) -> Result<EulerNorms> {
    let g = euler_grid();
    let ks = KernelSet::new(g, 0.35, KernelKind::Euler3d)?;
    let run = euler3d::run_euler(&euler_member(seed), 0.25, 1.0 / 32.0, 2, &ks)?;
    EulerNorms::measure(&run, EULER_S, EULER_UL_LAMBDA)
}

/// Pressure bound ratio `‖∇p‖_∞ / ‖u‖²_{C̃¹}` for one member.
pub fn pressure_ratio(seed: u64) -> Result<f64> {
    let u = euler_member(seed);
    let ks = KernelSet::new(euler_grid(), 0.35, KernelKind::Euler3d)?;
    let gp = ks.pressure_gradient(&u)?;
    let c1 = ul::c_tilde_norm(u.components(), 1)?;
    Ok(gp.max_component_sup() / (c1 * c1))
}

pub const PREP_S: usize = 3;
pub const PREP_UL_LAMBDA: f64 = 1.0;
pub const PREP_LEVELS: [usize; 3] = [1, 2, 4];

pub fn prep_grid() -> Grid {
    Grid::new(3, 3.0 * PI, 64).expect("valid grid")
}

pub fn prep_member(seed: u64) -> VectorField {
    let mut r = rng(seed);
    divergence_free(prep_grid(), Band::new(0.3, 1.2), 1.0, 1.0, &mut r)
}

/// Worst `‖u⁰_n‖_{H^s_ul}/‖u⁰‖_{H^s_ul}` over the levels for one member.
pub fn prep_ratio(seed: u64) -> Result<f64> {
    let g = prep_grid();
    let family = DyadicFamily::new(g)?;
    let u0 = prep_member(seed);
    let mut worst: f64 = 0.0;
    for n in PREP_LEVELS {
        let p = euler3d::prepare_initial_data(&u0, n, &family, PREP_S, PREP_UL_LAMBDA)?;
        worst = worst.max(p.hs_ul_ratio);
    }
    Ok(worst)
}
