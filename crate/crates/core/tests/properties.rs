use proptest::prelude::*;
use serfati_core::harness::{Experiment, InitSpec, RunConfig};
use serfati_core::random::{band_limited, rng, Band};
use serfati_core::{fieldio, spectral, Grid, ScalarField};

fn grid_2d() -> impl Strategy<Value = Grid> {
    (prop_oneof![Just(16usize), Just(32), Just(64)], 1.0f64..20.0).prop_map(|(n, l)| Grid::new(2, l, n).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn field_files_roundtrip_bit_exact(g in grid_2d(), seed in any::<u64>(), prov in "[a-z ]{0,20}") {
        let f = ScalarField::from_fn(g, |x| (x[0] * 0.3 + seed as f64 * 1e-3).sin() * x[1]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.sfld");
        fieldio::write_scalar(&path, &f, &prov).unwrap();
        let back = fieldio::read_scalar(&path).unwrap();
        prop_assert_eq!(back.grid(), f.grid());
        prop_assert!(back.values().iter().zip(f.values()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn refining_then_coarsening_is_the_identity(seed in any::<u64>(), l in 2.0f64..10.0) {
        let coarse = Grid::new(2, l, 16).unwrap();
        let top = 0.4 * coarse.nyquist();
        let f = band_limited(coarse, Band::new(0.0, top), 1.0, 1.0, &mut rng(seed));
        let fine = spectral::resample(&f, Grid::new(2, l, 32).unwrap()).unwrap();
        let back = spectral::resample(&fine, coarse).unwrap();
        prop_assert!(back.sub(&f).unwrap().sup_norm() <= 1e-12 * f.sup_norm().max(1.0));
        // Point values on the shared lattice are preserved by interpolation.
        for i in 0..coarse.len() {
            let k = coarse.unravel(i);
            prop_assert!((fine.at([2 * k[0], 2 * k[1], 0]) - f.values()[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn configs_roundtrip_through_json(n in 4u32..8, dt in 1e-3f64..0.1, seed in any::<u64>(), every in 1usize..10, sqg in any::<bool>()) {
        let mut c = RunConfig::default_for(if sqg { Experiment::Sqg } else { Experiment::Euler3d });
        c.grid.n = 1 << n;
        c.time.dt = dt;
        c.seed = seed;
        c.output_every = every;
        c.init = InitSpec::Random(Some(seed / 2));
        prop_assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }
}

#[test]
fn malformed_configs_are_rejected_with_a_position() {
    let good = RunConfig::default_for(Experiment::Sqg).to_json();
    let cases = [
        good.replace("\"version\": 1", "\"version\": 2"),
        good.replace("\"mode\"", "\"extra\": 3,\n  \"mode\""),
        good.replacen('{', "[", 1),
        good.replace("\"random\"", "\"spiral\""),
    ];
    for text in &cases {
        let err = RunConfig::from_json(text).unwrap_err();
        assert!(matches!(err, serfati_core::Error::Config(_)), "{err}");
    }
    let unknown = RunConfig::from_json(&cases[1]).unwrap_err().to_string();
    assert!(unknown.contains("line") && unknown.contains("extra"), "{unknown}");
}
