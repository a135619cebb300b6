//! Group lasso over per-factor basis blocks.
//!
//! Block coordinate descent with the exact block minimizer: after column
//! standardization, each block update solves
//!     min (1/(2n)) ||r - X_g b||^2 + lambda ||b||
//! in closed form through the eigendecomposition of the block Gram matrix.
//! Whole blocks are zeroed or kept together.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, sym_eigen};
use crate::matrix::DataMatrix;
use crate::projection::lasso::{lambda_grid, CvPath, GRID_RATIO, GRID_SIZE};
use crate::projection::{AdditiveBasis, LinearFit};
use crate::rng::{child_seed, SplitMix64};

const TOL: f64 = 1e-7;
const MAX_SWEEPS: usize = 100_000;

struct GroupProblem {
    x: DataMatrix, // standardized expanded design
    x_mean: Vec<f64>,
    x_scale: Vec<f64>,
    y_mean: f64,
    yc: Vec<f64>,
    groups: Vec<Range<usize>>,
    /// Per group: eigenvalues and eigenvectors (row-major) of X_g'X_g/n.
    eigens: Vec<(Vec<f64>, Vec<f64>)>,
}

impl GroupProblem {
    fn new(design: &DataMatrix, groups: &[Range<usize>], y: &[f64]) -> Self {
        let n = design.n_rows();
        let nf = n as f64;
        let k = design.n_cols();
        let mut x = DataMatrix::zeros(n, k);
        let mut x_mean = vec![0.0; k];
        let mut x_scale = vec![0.0; k];
        for j in 0..k {
            let src = design.column(j);
            let mean = src.iter().sum::<f64>() / nf;
            let var = src.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
            let scale = var.sqrt();
            x_mean[j] = mean;
            x_scale[j] = scale;
            if scale > 0.0 {
                let dst = x.column_mut(j);
                for i in 0..n {
                    dst[i] = (src[i] - mean) / scale;
                }
            }
        }
        let y_mean = y.iter().sum::<f64>() / nf;
        let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

        let eigens = groups
            .iter()
            .map(|g| {
                let m = g.len();
                let mut gram = vec![0.0; m * m];
                for (a, ja) in g.clone().enumerate() {
                    for (b, jb) in g.clone().enumerate() {
                        if b < a {
                            gram[a * m + b] = gram[b * m + a];
                        } else {
                            gram[a * m + b] = dot(x.column(ja), x.column(jb)) / nf;
                        }
                    }
                }
                sym_eigen(&gram, m)
            })
            .collect();

        GroupProblem {
            x,
            x_mean,
            x_scale,
            y_mean,
            yc,
            groups: groups.to_vec(),
            eigens,
        }
    }

    /// max_g ||X_g' y|| / n on the standardized design: the smallest lambda
    /// at which every block is zero.
    fn lambda_max(&self) -> f64 {
        let nf = self.yc.len() as f64;
        self.groups
            .iter()
            .map(|g| {
                g.clone()
                    .map(|j| (dot(self.x.column(j), &self.yc) / nf).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0_f64, f64::max)
    }

    fn unstandardize(&self, beta_std: &[f64], lambda: f64) -> LinearFit {
        let k = beta_std.len();
        let mut coefficients = vec![0.0; k];
        let mut support = Vec::new();
        let mut intercept = self.y_mean;
        for g in &self.groups {
            let live = g.clone().any(|j| beta_std[j] != 0.0);
            if !live {
                continue;
            }
            for j in g.clone() {
                if self.x_scale[j] > 0.0 {
                    let c = beta_std[j] / self.x_scale[j];
                    coefficients[j] = c;
                    intercept -= c * self.x_mean[j];
                }
                support.push(j);
            }
        }
        LinearFit {
            coefficients,
            intercept,
            support,
            lambda,
            cv_folds: 0,
        }
    }
}

/// Solves ||(G + (lambda/nu) I)^{-1} c|| = nu for nu > 0 by bisection in the
/// eigenbasis of G. Requires ||c|| > lambda.
fn block_norm_root(eigvals: &[f64], w: &[f64], lambda: f64) -> f64 {
    let h = |nu: f64| -> f64 {
        w.iter()
            .zip(eigvals)
            .map(|(&wi, &li)| {
                let den = li.max(0.0) * nu + lambda;
                (wi / den) * (wi / den)
            })
            .sum::<f64>()
            - 1.0
    };
    let min_pos = eigvals
        .iter()
        .zip(w)
        .filter(|(&li, &wi)| li > 1e-12 && wi != 0.0)
        .map(|(&li, _)| li)
        .fold(f64::INFINITY, f64::min);
    let wnorm = dot(w, w).sqrt();
    let mut lo = 0.0;
    let mut hi = if min_pos.is_finite() {
        (wnorm - lambda).max(0.0) / min_pos + 1.0
    } else {
        1.0
    };
    while h(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Exact minimizer over one block given c = X_g'r/n + G b_old.
fn block_update(eigvals: &[f64], eigvecs: &[f64], c: &[f64], lambda: f64, out: &mut [f64]) {
    let m = c.len();
    let cnorm = dot(c, c).sqrt();
    if cnorm <= lambda {
        out.fill(0.0);
        return;
    }
    // w = V'c
    let mut w = vec![0.0; m];
    for j in 0..m {
        let mut s = 0.0;
        for i in 0..m {
            s += eigvecs[i * m + j] * c[i];
        }
        w[j] = s;
    }
    if lambda == 0.0 {
        // Unpenalized block solve via the pseudo-inverse.
        for j in 0..m {
            w[j] = if eigvals[j] > 1e-12 { w[j] / eigvals[j] } else { 0.0 };
        }
    } else {
        let nu = block_norm_root(eigvals, &w, lambda);
        for j in 0..m {
            w[j] = nu * w[j] / (eigvals[j].max(0.0) * nu + lambda);
        }
    }
    // back to the original block coordinates
    for i in 0..m {
        let mut s = 0.0;
        for j in 0..m {
            s += eigvecs[i * m + j] * w[j];
        }
        out[i] = s;
    }
}

fn fit_grouped_path(
    prob: &GroupProblem,
    lambdas: &[f64],
    mut on_solution: impl FnMut(usize, &[f64]),
) -> Result<()> {
    let n = prob.yc.len();
    let nf = n as f64;
    let k = prob.x.n_cols();
    let mut beta = vec![0.0; k];
    let mut resid = prob.yc.clone();

    for (li, &lam) in lambdas.iter().enumerate() {
        let mut sweeps = 0usize;
        loop {
            let mut max_delta = 0.0_f64;
            for (gi, g) in prob.groups.iter().enumerate() {
                let m = g.len();
                let (eigvals, eigvecs) = &prob.eigens[gi];
                // c = X_g' r / n + G b_g
                let mut c = vec![0.0; m];
                for (a, j) in g.clone().enumerate() {
                    c[a] = dot(prob.x.column(j), &resid) / nf;
                }
                let old: Vec<f64> = g.clone().map(|j| beta[j]).collect();
                // c += G b_g, with G = V diag(l) V' from the cached eigens.
                let mut tmp = vec![0.0; m];
                for j in 0..m {
                    let mut s = 0.0;
                    for i in 0..m {
                        s += eigvecs[i * m + j] * old[i];
                    }
                    tmp[j] = eigvals[j] * s;
                }
                for i in 0..m {
                    let mut s = 0.0;
                    for j in 0..m {
                        s += eigvecs[i * m + j] * tmp[j];
                    }
                    c[i] += s;
                }

                let mut fresh = vec![0.0; m];
                block_update(eigvals, eigvecs, &c, lam, &mut fresh);
                for (a, j) in g.clone().enumerate() {
                    let delta = fresh[a] - old[a];
                    if delta != 0.0 {
                        axpy(-delta, prob.x.column(j), &mut resid);
                        beta[j] = fresh[a];
                        max_delta = max_delta.max(delta.abs());
                    }
                }
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::ConvergenceFailure {
                    sweeps,
                    last: Box::new(prob.unstandardize(&beta, lam)),
                });
            }
            if max_delta < TOL {
                break;
            }
        }
        on_solution(li, &beta);
    }
    Ok(())
}

/// Group lasso fit of `y` on the expanded basis at penalty `lambda`.
/// Support is reported at factor granularity: all columns of a selected
/// block enter the support together.
pub fn group_lasso_fit(basis: &AdditiveBasis, y: &[f64], lambda: f64) -> Result<LinearFit> {
    if y.len() != basis.expanded.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "response has {} entries, basis has {} rows",
            y.len(),
            basis.expanded.n_rows()
        )));
    }
    if lambda < 0.0 {
        return Err(Error::InvalidConfiguration(format!(
            "lambda must be nonnegative, got {lambda}"
        )));
    }
    let groups = basis.groups();
    let prob = GroupProblem::new(&basis.expanded, &groups, y);
    let mut beta_out = vec![0.0; basis.expanded.n_cols()];
    fit_grouped_path(&prob, &[lambda], |_, b| beta_out.copy_from_slice(b))?;
    Ok(prob.unstandardize(&beta_out, lambda))
}

/// Cross-validated lambda for the group lasso, mirroring the plain-lasso
/// grid and fold rules.
pub fn cv_select_lambda_grouped(
    basis: &AdditiveBasis,
    y: &[f64],
    folds: usize,
    seed: u64,
) -> Result<(f64, CvPath)> {
    let n = basis.expanded.n_rows();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "response has {} entries, basis has {} rows",
            y.len(),
            n
        )));
    }
    if folds < 2 {
        return Err(Error::InvalidConfiguration(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    if n < folds {
        return Err(Error::InvalidConfiguration(format!(
            "cannot split {n} observations into {folds} folds"
        )));
    }
    let groups = basis.groups();
    let full = GroupProblem::new(&basis.expanded, &groups, y);
    let grid = lambda_grid(full.lambda_max(), GRID_SIZE, GRID_RATIO);

    let mut order: Vec<usize> = (0..n).collect();
    SplitMix64::new(child_seed(seed, 0)).shuffle(&mut order);
    let mut fold_of = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % folds;
    }

    let mut sse = vec![0.0; grid.len()];
    for fold in 0..folds {
        let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != fold).collect();
        let test: Vec<usize> = (0..n).filter(|&i| fold_of[i] == fold).collect();
        let design = basis.expanded.select_rows(&train);
        let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let prob = GroupProblem::new(&design, &groups, &y_train);
        fit_grouped_path(&prob, &grid, |li, beta| {
            let fit = prob.unstandardize(beta, grid[li]);
            for &i in &test {
                let mut pred = fit.intercept;
                for &j in &fit.support {
                    pred += fit.coefficients[j] * basis.expanded.get(i, j);
                }
                let err = y[i] - pred;
                sse[li] += err * err;
            }
        })?;
    }

    let path: CvPath = grid
        .iter()
        .zip(&sse)
        .map(|(&l, &s)| (l, s / n as f64))
        .collect();
    let mut best = 0;
    for li in 1..path.len() {
        if path[li].1 < path[best].1 {
            best = li;
        }
    }
    Ok((path[best].0, path))
}

/// Factors whose blocks carry nonzero coefficients.
pub fn selected_factors(basis: &AdditiveBasis, fit: &LinearFit) -> Vec<usize> {
    let mut out = Vec::new();
    for (gi, g) in basis.groups().into_iter().enumerate() {
        if g.into_iter().any(|j| fit.coefficients[j] != 0.0) {
            out.push(gi);
        }
    }
    out
}
