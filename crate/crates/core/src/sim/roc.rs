//! ROC curves and AUC for structure recovery from p-value matrices.

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

/// Symmetric adjacency with an all-false diagonal.
#[derive(Debug, Clone)]
pub struct Adjacency {
    d: usize,
    data: Vec<bool>,
}

impl Adjacency {
    pub fn new(d: usize) -> Self {
        Self {
            d,
            data: vec![false; d * d],
        }
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> bool {
        self.data[i * self.d + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert_ne!(i, j, "diagonal entries stay false");
        self.data[i * self.d + j] = value;
        self.data[j * self.d + i] = value;
    }

    /// Number of true edges among the d(d-1)/2 unordered pairs.
    pub fn positive_pairs(&self) -> usize {
        let mut count = 0;
        for i in 0..self.d {
            for j in i + 1..self.d {
                if self.at(i, j) {
                    count += 1;
                }
            }
        }
        count
    }
}

/// ROC points (one per swept threshold) and the trapezoidal AUC.
#[derive(Debug, Clone)]
pub struct RocSummary {
    /// Thresholds in increasing order; a pair is called an edge when its
    /// p-value is at most the threshold.
    pub thresholds: Vec<f64>,
    /// (fpr, tpr) per threshold, nondecreasing in both coordinates.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
    pub truth: Adjacency,
}

/// ROC over scored pairs: (p-value, is-true-edge).
pub(crate) fn roc_from_pairs(pairs: &[(f64, bool)], truth: Adjacency) -> Result<RocSummary> {
    let positives = pairs.iter().filter(|(_, t)| *t).count();
    let negatives = pairs.len() - positives;
    if positives == 0 {
        return Err(Error::AucUndefined(
            "the truth has no positive pairs".into(),
        ));
    }
    if negatives == 0 {
        return Err(Error::AucUndefined(
            "the truth has no negative pairs".into(),
        ));
    }

    let mut sorted: Vec<(f64, bool)> = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut thresholds = vec![0.0];
    let mut points = vec![(0.0, 0.0)];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut idx = 0;
    while idx < sorted.len() {
        let t = sorted[idx].0;
        while idx < sorted.len() && sorted[idx].0 == t {
            if sorted[idx].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            idx += 1;
        }
        thresholds.push(t);
        points.push((fp as f64 / negatives as f64, tp as f64 / positives as f64));
    }
    if *thresholds.last().unwrap() < 1.0 {
        thresholds.push(1.0);
        points.push((1.0, 1.0));
    }

    let mut auc = 0.0;
    for w in points.windows(2) {
        let (x1, y1) = w[0];
        let (x2, y2) = w[1];
        auc += (x2 - x1) * (y1 + y2) / 2.0;
    }
    Ok(RocSummary {
        thresholds,
        points,
        auc,
        truth,
    })
}

/// Sweeps thresholds over the distinct p-values (plus 0 and 1) of a
/// symmetric p-value matrix and compares the implied edge calls against
/// `truth`. Diagonal entries are ignored.
pub fn roc_from_pvalues(p: &DataMatrix, truth: &Adjacency) -> Result<RocSummary> {
    let d = truth.d();
    if p.n_rows() != d || p.n_cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "p-value matrix is {}x{}, truth has {d} nodes",
            p.n_rows(),
            p.n_cols()
        )));
    }
    let mut pairs = Vec::with_capacity(d * (d - 1) / 2);
    for i in 0..d {
        for j in i + 1..d {
            let pij = p.get(i, j);
            if !(pij > 0.0 && pij <= 1.0) {
                return Err(Error::InvalidInput(format!(
                    "p-value at ({i}, {j}) out of (0,1]: {pij}"
                )));
            }
            if (pij - p.get(j, i)).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "p-value matrix not symmetric at ({i}, {j})"
                )));
            }
            pairs.push((pij, truth.at(i, j)));
        }
    }
    roc_from_pairs(&pairs, truth.clone())
}
