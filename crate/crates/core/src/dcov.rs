//! Empirical distance covariance, the projected test statistic, asymptotic
//! critical values and permutation-calibrated p-values.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::matrix::DataMatrix;
use crate::norm::inverse_normal_cdf;
use crate::rng::{child_seed, SplitMix64};

/// Upper bound on alpha for the asymptotic rejection rule.
pub const MAX_ASYMPTOTIC_ALPHA: f64 = 0.215;

/// Symmetric matrix of pairwise Euclidean distances between observations.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    values: Vec<f64>, // row-major n x n
    n: usize,
}

impl DistanceMatrix {
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, k: usize, l: usize) -> f64 {
        self.values[k * self.n + l]
    }

    #[inline]
    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.n..(k + 1) * self.n]
    }

    /// Per-row sums; the building block for the O(n^2) form of S3.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.row(k).iter().sum()).collect()
    }
}

/// Pairwise Euclidean distances between the rows of `x`.
///
/// Accumulates squared differences column by column so each pass streams over
/// contiguous memory, then takes a single square root per pair.
pub fn pairwise_distances(x: &DataMatrix) -> Result<DistanceMatrix> {
    x.check_sample()?;
    let n = x.n_rows();
    let mut sq = vec![0.0; n * n];
    for j in 0..x.n_cols() {
        let col = x.column(j);
        for k in 0..n {
            let ck = col[k];
            let row = &mut sq[k * n + k + 1..(k + 1) * n];
            for (off, e) in row.iter_mut().enumerate() {
                let d = ck - col[k + 1 + off];
                *e += d * d;
            }
        }
    }
    let mut values = vec![0.0; n * n];
    for k in 0..n {
        for l in k + 1..n {
            let d = sq[k * n + l].sqrt();
            values[k * n + l] = d;
            values[l * n + k] = d;
        }
    }
    Ok(DistanceMatrix { values, n })
}

/// The three distance sums and the resulting squared distance covariance.
#[derive(Debug, Clone, Copy)]
pub struct DcovComponents {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    /// V^2 = max(0, s1 + s2 - 2 s3); clamping absorbs negative floating-point
    /// residue of what is a squared norm in exact arithmetic.
    pub v2: f64,
    pub n: usize,
}

impl DcovComponents {
    /// The unclamped value s1 + s2 - 2 s3, kept for equivalence checks
    /// against direct-summation implementations.
    pub fn v2_unclamped(&self) -> f64 {
        self.s1 + self.s2 - 2.0 * self.s3
    }
}

/// Empirical distance covariance of a sample pair from cached distances.
///
/// S1 is the mean of elementwise products, S2 the product of the two mean
/// distances, and S3 is evaluated through row sums in O(n^2).
pub fn dcov_components(dx: &DistanceMatrix, dy: &DistanceMatrix) -> Result<DcovComponents> {
    if dx.n != dy.n {
        return Err(Error::DimensionMismatch(format!(
            "distance matrices have {} and {} rows",
            dx.n, dy.n
        )));
    }
    let n = dx.n;
    let nf = n as f64;
    let mut s1 = 0.0;
    for k in 0..n {
        s1 += dot(dx.row(k), dy.row(k));
    }
    s1 /= nf * nf;
    let rx = dx.row_sums();
    let ry = dy.row_sums();
    let sum_x: f64 = rx.iter().sum();
    let sum_y: f64 = ry.iter().sum();
    let s2 = (sum_x / (nf * nf)) * (sum_y / (nf * nf));
    let s3 = dot(&rx, &ry) / (nf * nf * nf);
    let v2 = (s1 + s2 - 2.0 * s3).max(0.0);
    Ok(DcovComponents { s1, s2, s3, v2, n })
}

/// The test statistic T = n V^2 / S2 together with its components.
///
/// Errors with [`Error::DegenerateSample`] when S2 = 0 (a constant sample);
/// callers decide how to record such pairs.
pub fn test_statistic(ex: &DataMatrix, ey: &DataMatrix) -> Result<(f64, DcovComponents)> {
    if ex.n_rows() != ey.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "samples have {} and {} rows",
            ex.n_rows(),
            ey.n_rows()
        )));
    }
    let dx = pairwise_distances(ex)?;
    let dy = pairwise_distances(ey)?;
    let comp = dcov_components(&dx, &dy)?;
    if comp.s2 <= 0.0 {
        return Err(Error::DegenerateSample);
    }
    Ok((comp.n as f64 * comp.v2 / comp.s2, comp))
}

/// Squared upper-(alpha/2) standard normal quantile: the asymptotic critical
/// value for T. Valid for 0 < alpha <= 0.215.
pub fn critical_value(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= MAX_ASYMPTOTIC_ALPHA) {
        return Err(Error::InvalidAlpha {
            alpha,
            max: MAX_ASYMPTOTIC_ALPHA,
        });
    }
    let q = inverse_normal_cdf(1.0 - alpha / 2.0);
    Ok(q * q)
}

/// Default permutation count R(n) = floor(200 + 5000/n).
pub fn default_permutations(n: usize) -> usize {
    (200.0 + 5000.0 / n as f64).floor() as usize
}

/// Outcome of a single conditional independence test.
#[derive(Debug, Clone)]
pub struct TestResult {
    /// T = n V^2 / S2 on the original pairing.
    pub statistic: f64,
    /// Permutation p-value; `None` when no permutations were requested.
    /// Always at least 1/(R+1) by the add-one convention.
    pub p_value: Option<f64>,
    /// Asymptotic decision T > (Phi^{-1}(1-alpha/2))^2; `None` when alpha
    /// exceeds the 0.215 validity bound of the asymptotic rule.
    pub reject_asymptotic: Option<bool>,
    pub n_permutations: usize,
    pub seed: u64,
    pub alpha: f64,
}

impl TestResult {
    /// Rejection decision at the result's alpha: permutation p-value when
    /// available, otherwise the asymptotic rule.
    pub fn rejected(&self) -> Option<bool> {
        match self.p_value {
            Some(p) => Some(p <= self.alpha),
            None => self.reject_asymptotic,
        }
    }
}

fn check_alpha_open_unit(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha { alpha, max: 1.0 });
    }
    Ok(())
}

/// T for a permuted pairing, reusing cached distances. Only the rows and
/// columns of Dx are re-indexed; S2 is invariant under the permutation and
/// the S3 row sums permute along with the rows.
fn permuted_statistic(
    dx: &DistanceMatrix,
    dy: &DistanceMatrix,
    rx: &[f64],
    ry: &[f64],
    s2: f64,
    perm: &[usize],
) -> f64 {
    let n = dx.n;
    let nf = n as f64;
    let mut s1 = 0.0;
    for k in 0..n {
        let xrow = dx.row(perm[k]);
        let yrow = dy.row(k);
        let mut acc = 0.0;
        for l in 0..n {
            acc += xrow[perm[l]] * yrow[l];
        }
        s1 += acc;
    }
    s1 /= nf * nf;
    let mut s3 = 0.0;
    for k in 0..n {
        s3 += rx[perm[k]] * ry[k];
    }
    s3 /= nf * nf * nf;
    let v2 = (s1 + s2 - 2.0 * s3).max(0.0);
    nf * v2 / s2
}

/// Permutation-calibrated P-DCov test.
///
/// Computes T on the original pairing, then for r = 1..=R re-pairs the rows
/// of `ex` through a Fisher-Yates permutation drawn from stream (seed, r) and
/// recomputes T from the cached distance matrices. The p-value uses the
/// add-one convention (1 + #{T_r >= T_0}) / (R + 1), counting ties as
/// exceedances. Permutations are evaluated in parallel; determinism comes
/// from the per-permutation streams, not the schedule.
pub fn permutation_test(
    ex: &DataMatrix,
    ey: &DataMatrix,
    n_permutations: usize,
    seed: u64,
    alpha: f64,
) -> Result<TestResult> {
    if n_permutations == 0 {
        return Err(Error::InvalidConfiguration(
            "permutation test needs at least one permutation".into(),
        ));
    }
    if ex.n_rows() != ey.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "samples have {} and {} rows",
            ex.n_rows(),
            ey.n_rows()
        )));
    }
    let dx = pairwise_distances(ex)?;
    let dy = pairwise_distances(ey)?;
    permutation_test_cached(&dx, &dy, n_permutations, seed, alpha)
}

/// Permutation test given precomputed distance matrices. Used by the graph
/// builder to share distances across the pairs touching a node.
pub fn permutation_test_cached(
    dx: &DistanceMatrix,
    dy: &DistanceMatrix,
    n_permutations: usize,
    seed: u64,
    alpha: f64,
) -> Result<TestResult> {
    check_alpha_open_unit(alpha)?;
    let comp = dcov_components(dx, dy)?;
    if comp.s2 <= 0.0 {
        return Err(Error::DegenerateSample);
    }
    let n = comp.n;
    let t0 = n as f64 * comp.v2 / comp.s2;
    let rx = dx.row_sums();
    let ry = dy.row_sums();

    let exceed: usize = (0..n_permutations)
        .into_par_iter()
        .with_min_len(8)
        .map(|idx| {
            let mut rng = SplitMix64::new(child_seed(seed, idx as u64 + 1));
            let perm = rng.permutation(n);
            let tr = permuted_statistic(dx, dy, &rx, &ry, comp.s2, &perm);
            usize::from(tr >= t0)
        })
        .sum();

    let p = (1 + exceed) as f64 / (n_permutations + 1) as f64;
    let reject_asymptotic = if alpha <= MAX_ASYMPTOTIC_ALPHA {
        Some(t0 > critical_value(alpha)?)
    } else {
        None
    };
    Ok(TestResult {
        statistic: t0,
        p_value: Some(p),
        reject_asymptotic,
        n_permutations,
        seed,
        alpha,
    })
}
