//! Shared fixtures for the criterion benches.

use pdcov::rng::SplitMix64;
use pdcov::DataMatrix;

pub fn gaussian_matrix(n: usize, d: usize, seed: u64) -> DataMatrix {
    let mut rng = SplitMix64::new(seed);
    DataMatrix::new(n, d, rng.normals(n * d)).expect("finite draws")
}

pub fn linear_response(f: &DataMatrix, active: &[usize], seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::new(seed);
    (0..f.n_rows())
        .map(|i| {
            active
                .iter()
                .map(|&j| 2.0 * f.get(i, j))
                .sum::<f64>()
                + rng.normal()
        })
        .collect()
}
