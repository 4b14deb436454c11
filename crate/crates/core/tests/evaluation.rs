//! Estimator invariants over random sample sets.

use lyromel_core::eval::{mmd2_unbiased, sequence_features};
use lyromel_core::melody::{NoteTriplet, DURATION_VALUES, REST_VALUES};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn points(dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-5.0..5.0f64, dim), 2..25)
}

fn random_features(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let notes: Vec<NoteTriplet> = (0..20)
                .map(|_| NoteTriplet {
                    midi: rng.gen_range(55..80),
                    duration: DURATION_VALUES[rng.gen_range(0..6)],
                    rest: REST_VALUES[rng.gen_range(0..3)],
                })
                .collect();
            sequence_features(&notes)
        })
        .collect()
}

proptest! {
    #[test]
    fn mmd_is_symmetric((x, y) in (1usize..5).prop_flat_map(|d| (points(d), points(d)))) {
        let a = mmd2_unbiased(&x, &y).unwrap();
        let b = mmd2_unbiased(&y, &x).unwrap();
        prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }
}

#[test]
fn a_set_against_itself_is_slightly_negative() {
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_features(120, &mut rng);
        let v = mmd2_unbiased(&x, &x).unwrap();
        assert!(v <= 0.0 && v.abs() < 0.01, "{v}");
    }
}

#[test]
fn same_distribution_draws_are_near_zero() {
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let x = random_features(150, &mut rng);
        let y = random_features(150, &mut rng);
        assert!(mmd2_unbiased(&x, &y).unwrap().abs() < 0.01);
    }
}
