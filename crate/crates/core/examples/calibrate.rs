//! Fits the frozen estimate constants on the calibration corpus and reports
//! the monitor ratios they produce on the test corpus.

use serfati_core::calibration::*;
use serfati_core::euler3d::EulerConstants;
use serfati_core::sqg::monitors::SqgConstants;

fn main() -> anyhow::Result<()> {
    let mut sqg = SqgConstants { short_time: 0.0, gronwall: 0.0, velocity: 0.0 };
    let mut euler = EulerConstants { vorticity: 0.0, velocity: 0.0 };
    let (mut pressure, mut prep) = (0.0f64, 0.0f64);
    // The initial-data fit is slow; request it explicitly.
    let with_prep = std::env::args().any(|a| a == "--prep");
    for seed in CALIBRATION_SEEDS {
        let c = sqg_norms(seed, None)?.required_constants();
        sqg.short_time = sqg.short_time.max(c.short_time);
        sqg.gronwall = sqg.gronwall.max(c.gronwall);
        sqg.velocity = sqg.velocity.max(c.velocity);
        let e = euler_norms(seed)?.required_constants();
        euler.vorticity = euler.vorticity.max(e.vorticity);
        euler.velocity = euler.velocity.max(e.velocity);
        pressure = pressure.max(pressure_ratio(seed)?);
        if with_prep {
            prep = prep.max(prep_ratio(seed)?);
        }
        println!("seed {seed}: sqg {c:?} euler {e:?}");
    }
    println!("fitted sqg {sqg:?}\nfitted euler {euler:?}\npressure {pressure}\ninitial data {prep}");
    let mut worst: f64 = 0.0;
    for seed in TEST_SEEDS {
        let s = sqg_norms(seed, Some(&sqg))?.monitors(&sqg).max_ratio();
        let e = euler_norms(seed)?.monitors(&euler).max_ratio();
        let p = pressure_ratio(seed)? / pressure;
        println!("test seed {seed}: sqg {s:.4} euler {e:.4} pressure {p:.4}");
        worst = worst.max(s).max(e).max(p);
    }
    println!("worst test ratio {worst:.4}");
    Ok(())
}
