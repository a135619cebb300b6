//! Projection of responses onto the (linear or additive) span of factors via
//! penalized least squares, producing the residuals fed to the distance
//! covariance test.

mod group;
mod lasso;
mod ols;
mod spline;

pub use group::{cv_select_lambda_grouped, group_lasso_fit, selected_factors};
pub use lasso::{cv_select_lambda, lasso_coordinate_descent, CvPath};
pub use ols::refit_ols;
pub use spline::{additive_expand, AdditiveBasis};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::axpy;
use crate::matrix::DataMatrix;
use crate::rng::child_seed;

/// One per-response regression fit. Coefficients are on the original
/// predictor scale and are exactly zero off the support.
#[derive(Debug, Clone)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// Indices of columns allowed to carry nonzero coefficients, ascending.
    pub support: Vec<usize>,
    pub lambda: f64,
    pub cv_folds: usize,
}

impl LinearFit {
    pub fn intercept_only(intercept: f64, n_cols: usize) -> Self {
        Self {
            coefficients: vec![0.0; n_cols],
            intercept,
            support: Vec::new(),
            lambda: 0.0,
            cv_folds: 0,
        }
    }

    /// Fitted values over the rows of `design` (the matrix the fit was
    /// trained on, or any matrix with compatible columns).
    pub fn predict(&self, design: &DataMatrix) -> Vec<f64> {
        let mut out = vec![self.intercept; design.n_rows()];
        for &j in &self.support {
            let c = self.coefficients[j];
            if c != 0.0 {
                axpy(c, design.column(j), &mut out);
            }
        }
        out
    }

    pub fn residuals(&self, design: &DataMatrix, y: &[f64]) -> Vec<f64> {
        let mut fitted = self.predict(design);
        for (f, yi) in fitted.iter_mut().zip(y) {
            *f = yi - *f;
        }
        fitted
    }
}

/// How responses are projected onto the factor span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Unpenalized least squares on all factors (small K).
    Ols,
    /// Lasso with 10-fold CV, then OLS refit on the selected support.
    LassoCvRefit,
    /// Quantile-knot B-spline expansion with a group lasso over per-factor
    /// blocks.
    AdditiveSpline,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Ols => "ols",
            Method::LassoCvRefit => "lasso_cv_refit",
            Method::AdditiveSpline => "additive_spline",
        }
    }
}

/// Knobs for [`residualize_with`]. The defaults match the reference pipeline:
/// 10-fold CV, cubic splines with three internal knots.
#[derive(Debug, Clone)]
pub struct ResidualOptions {
    pub method: Method,
    pub cv_folds: usize,
    pub spline_degree: usize,
    pub spline_knots: usize,
}

impl ResidualOptions {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            cv_folds: 10,
            spline_degree: 3,
            spline_knots: 3,
        }
    }
}

/// Residual matrix plus the per-column fits that produced it.
#[derive(Debug, Clone)]
pub struct ResidualSet {
    /// n x p matrix of residuals, one column per response column.
    pub residuals: DataMatrix,
    /// One fit per response column. For `AdditiveSpline` the coefficients
    /// refer to the columns of the shared basis expansion.
    pub fits: Vec<LinearFit>,
    pub method: Method,
    /// Data quirks encountered while fitting (constant columns, fallbacks).
    pub notes: Vec<String>,
}

/// Projects every column of `x` onto the span of `f` and returns residuals.
///
/// Per-column work is independent and runs in parallel; column `j` draws all
/// its randomness (CV folds) from stream (seed, j), so results do not depend
/// on scheduling.
pub fn residualize(x: &DataMatrix, f: &DataMatrix, method: Method, seed: u64) -> Result<ResidualSet> {
    residualize_with(x, f, &ResidualOptions::new(method), seed)
}

pub fn residualize_with(
    x: &DataMatrix,
    f: &DataMatrix,
    opts: &ResidualOptions,
    seed: u64,
) -> Result<ResidualSet> {
    if x.n_rows() != f.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "responses have {} rows, factors {}",
            x.n_rows(),
            f.n_rows()
        )));
    }
    let n = x.n_rows();
    let p = x.n_cols();
    if f.n_cols() == 0 {
        // No factors to project on: center each response column.
        let mut residuals = DataMatrix::zeros(n, p);
        let mut fits = Vec::with_capacity(p);
        for j in 0..p {
            let y = x.column(j);
            let mean = y.iter().sum::<f64>() / n as f64;
            for (i, v) in y.iter().enumerate() {
                residuals.set(i, j, v - mean);
            }
            fits.push(LinearFit::intercept_only(mean, 0));
        }
        return Ok(ResidualSet {
            residuals,
            fits,
            method: opts.method,
            notes: Vec::new(),
        });
    }
    let mut notes = Vec::new();

    let basis = if opts.method == Method::AdditiveSpline {
        let b = additive_expand(f, opts.spline_degree, opts.spline_knots)?;
        for (j, fell_back) in b.linear_fallback.iter().enumerate() {
            if *fell_back {
                notes.push(format!(
                    "factor {j}: too few distinct values for a spline block, using a linear term"
                ));
            }
        }
        Some(b)
    } else {
        None
    };

    let per_column: Vec<Result<(Vec<f64>, LinearFit)>> = (0..p)
        .into_par_iter()
        .map(|j| {
            let y = x.column(j);
            let col_seed = child_seed(seed, j as u64);
            fit_one_column(f, basis.as_ref(), y, opts, col_seed)
        })
        .collect();

    let mut fits = Vec::with_capacity(p);
    let mut residuals = DataMatrix::zeros(n, p);
    for (j, item) in per_column.into_iter().enumerate() {
        let (res, fit) = item?;
        residuals.column_mut(j).copy_from_slice(&res);
        fits.push(fit);
    }
    Ok(ResidualSet {
        residuals,
        fits,
        method: opts.method,
        notes,
    })
}

fn fit_one_column(
    f: &DataMatrix,
    basis: Option<&AdditiveBasis>,
    y: &[f64],
    opts: &ResidualOptions,
    seed: u64,
) -> Result<(Vec<f64>, LinearFit)> {
    match opts.method {
        Method::Ols => {
            let all: Vec<usize> = (0..f.n_cols()).collect();
            let fit = refit_ols(f, y, &all)?;
            let res = fit.residuals(f, y);
            Ok((res, fit))
        }
        Method::LassoCvRefit => {
            let (lambda, _path) = cv_select_lambda(f, y, opts.cv_folds, seed)?;
            let lasso = lasso_coordinate_descent(f, y, lambda, 1e-7, 100_000)?;
            let mut fit = refit_ols(f, y, &lasso.support)?;
            fit.lambda = lambda;
            fit.cv_folds = opts.cv_folds;
            let res = fit.residuals(f, y);
            Ok((res, fit))
        }
        Method::AdditiveSpline => {
            let basis = basis.expect("basis expanded for additive method");
            let (lambda, _path) = cv_select_lambda_grouped(basis, y, opts.cv_folds, seed)?;
            let mut fit = group_lasso_fit(basis, y, lambda)?;
            fit.cv_folds = opts.cv_folds;
            let res = fit.residuals(&basis.expanded, y);
            Ok((res, fit))
        }
    }
}
