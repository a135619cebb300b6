//! Post-selection OLS refit.

use crate::error::{Error, Result};
use crate::linalg::min_norm_lstsq;
use crate::matrix::DataMatrix;
use crate::projection::LinearFit;

/// Unpenalized least squares restricted to the support columns plus an
/// intercept, solved by pivoted QR. Rank-deficient supports get the
/// minimum-norm solution, so predictions stay well defined.
///
/// An empty support is not an error: it yields the intercept-only fit.
pub fn refit_ols(f: &DataMatrix, y: &[f64], support: &[usize]) -> Result<LinearFit> {
    let n = f.n_rows();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "response has {} entries, design has {} rows",
            y.len(),
            n
        )));
    }
    let mut cols: Vec<usize> = support.to_vec();
    cols.sort_unstable();
    cols.dedup();
    if let Some(&bad) = cols.iter().find(|&&j| j >= f.n_cols()) {
        return Err(Error::InvalidConfiguration(format!(
            "support column {bad} out of range for {} factors",
            f.n_cols()
        )));
    }
    if cols.len() >= n {
        return Err(Error::InvalidConfiguration(format!(
            "support size {} must be smaller than the sample size {n}",
            cols.len()
        )));
    }
    if cols.is_empty() {
        let mean = y.iter().sum::<f64>() / n as f64;
        return Ok(LinearFit::intercept_only(mean, f.n_cols()));
    }

    let mut design: Vec<Vec<f64>> = Vec::with_capacity(cols.len() + 1);
    design.push(vec![1.0; n]);
    for &j in &cols {
        design.push(f.column(j).to_vec());
    }
    let sol = min_norm_lstsq(design, y);

    let mut coefficients = vec![0.0; f.n_cols()];
    for (idx, &j) in cols.iter().enumerate() {
        coefficients[j] = sol.coef[idx + 1];
    }
    Ok(LinearFit {
        coefficients,
        intercept: sol.coef[0],
        support: cols,
        lambda: 0.0,
        cv_folds: 0,
    })
}
