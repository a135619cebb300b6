//! Property and calibration tests for the distance-covariance test.

use proptest::prelude::*;

use pdcov::rng::{child_seed, SplitMix64};
use pdcov::{dcov_components, pairwise_distances, permutation_test, DataMatrix};

fn matrix_from_flat(n: usize, d: usize, values: Vec<f64>) -> DataMatrix {
    DataMatrix::new(n, d, values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn v2_clamped_nonnegative_and_close_to_raw(
        values in proptest::collection::vec(-50.0_f64..50.0, 24),
        others in proptest::collection::vec(-50.0_f64..50.0, 12),
    ) {
        let x = matrix_from_flat(12, 2, values);
        let y = matrix_from_flat(12, 1, others);
        let dx = pairwise_distances(&x).unwrap();
        let dy = pairwise_distances(&y).unwrap();
        let c = dcov_components(&dx, &dy).unwrap();
        prop_assert!(c.v2 >= 0.0);
        prop_assert!(c.s1 >= 0.0 && c.s2 >= 0.0 && c.s3 >= 0.0);
        prop_assert!(c.v2_unclamped() >= -1e-10);
        if c.v2_unclamped() >= 0.0 {
            prop_assert!((c.v2 - c.v2_unclamped()).abs() <= 1e-12);
        }
    }

    #[test]
    fn permutation_p_value_in_bounds(
        seed in any::<u64>(),
        r in 1usize..80,
    ) {
        let mut rng = SplitMix64::new(seed);
        let x = matrix_from_flat(15, 1, rng.normals(15));
        let y = matrix_from_flat(15, 1, rng.normals(15));
        let res = permutation_test(&x, &y, r, child_seed(seed, 9), 0.1).unwrap();
        let p = res.p_value.unwrap();
        prop_assert!(p >= 1.0 / (r as f64 + 1.0) - 1e-15);
        prop_assert!(p <= 1.0);
        prop_assert!(res.statistic >= 0.0);
    }

    #[test]
    fn components_symmetric_in_sample_order(
        seed in any::<u64>(),
    ) {
        let mut rng = SplitMix64::new(seed);
        let x = matrix_from_flat(10, 2, rng.normals(20));
        let y = matrix_from_flat(10, 3, rng.normals(30));
        let dx = pairwise_distances(&x).unwrap();
        let dy = pairwise_distances(&y).unwrap();
        let a = dcov_components(&dx, &dy).unwrap();
        let b = dcov_components(&dy, &dx).unwrap();
        prop_assert_eq!(a.s1, b.s1);
        prop_assert_eq!(a.s2, b.s2);
        prop_assert_eq!(a.s3, b.s3);
        prop_assert_eq!(a.v2, b.v2);
    }
}

/// Independent uniform samples at n = 60: the permutation test at nominal
/// alpha = 0.1 rejects at close to the nominal rate.
#[test]
fn null_rejection_rate_close_to_nominal_uniform() {
    use rayon::prelude::*;
    let reps = 1000;
    let n = 60;
    let alpha = 0.1;
    let hits: usize = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = SplitMix64::new(child_seed(77_000, rep as u64));
            let x: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
            let x = DataMatrix::from_column(x).unwrap();
            let y = DataMatrix::from_column(y).unwrap();
            let res = permutation_test(&x, &y, pdcov::default_permutations(n),
                child_seed(88_000, rep as u64), alpha).unwrap();
            usize::from(res.p_value.unwrap() <= alpha)
        })
        .sum();
    let rate = hits as f64 / reps as f64;
    assert!(
        (rate - alpha).abs() <= 0.03,
        "null rejection rate {rate} vs nominal {alpha}"
    );
}
