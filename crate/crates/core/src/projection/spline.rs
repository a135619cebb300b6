//! B-spline basis expansion for additive projection.

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

/// Per-factor B-spline expansion with centered columns.
///
/// Factor `g` owns a contiguous block of expanded columns; `group_index[c]`
/// names the factor behind expanded column `c`. Factors with too few distinct
/// values fall back to a single (centered) linear column.
#[derive(Debug, Clone)]
pub struct AdditiveBasis {
    pub degree: usize,
    /// Internal knot locations per factor (empty for fallback factors).
    pub internal_knots: Vec<Vec<f64>>,
    /// Boundary knots (min, max) per factor.
    pub boundaries: Vec<(f64, f64)>,
    /// n x (total expanded columns), each column centered.
    pub expanded: DataMatrix,
    pub group_index: Vec<usize>,
    /// Column means subtracted during centering.
    pub column_means: Vec<f64>,
    pub linear_fallback: Vec<bool>,
}

impl AdditiveBasis {
    pub fn n_factors(&self) -> usize {
        self.internal_knots.len()
    }

    /// Expanded-column ranges, one per factor, in factor order.
    pub fn groups(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::with_capacity(self.n_factors());
        let mut start = 0;
        for g in 0..self.n_factors() {
            let width = self
                .group_index
                .iter()
                .filter(|&&gi| gi == g)
                .count();
            out.push(start..start + width);
            start += width;
        }
        out
    }
}

/// Evaluates the full B-spline basis (clamped knot vector) at `x`.
///
/// `knots` must contain `degree + 1` copies of each boundary around the
/// strictly increasing internal knots. Returns `knots.len() - degree - 1`
/// values. The rightmost nonempty interval is treated as closed so the upper
/// boundary belongs to the last basis function.
fn bspline_row(knots: &[f64], degree: usize, x: f64, out: &mut [f64]) {
    let n_intervals = knots.len() - 1;
    let mut level = vec![0.0; n_intervals];
    let last_nonempty = (0..n_intervals)
        .rev()
        .find(|&j| knots[j] < knots[j + 1])
        .expect("knot vector must span a nonempty range");
    for j in 0..n_intervals {
        let hit = if j == last_nonempty {
            x >= knots[j] && x <= knots[j + 1]
        } else {
            x >= knots[j] && x < knots[j + 1]
        };
        if hit {
            level[j] = 1.0;
            break;
        }
    }
    for k in 1..=degree {
        for j in 0..n_intervals - k {
            let d1 = knots[j + k] - knots[j];
            let left = if d1 > 0.0 {
                (x - knots[j]) / d1 * level[j]
            } else {
                0.0
            };
            let d2 = knots[j + k + 1] - knots[j + 1];
            let right = if d2 > 0.0 {
                (knots[j + k + 1] - x) / d2 * level[j + 1]
            } else {
                0.0
            };
            level[j] = left + right;
        }
    }
    out.copy_from_slice(&level[..knots.len() - degree - 1]);
}

/// Builds the clamped knot vector for one factor.
fn clamped_knots(a: f64, b: f64, internal: &[f64], degree: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(internal.len() + 2 * (degree + 1));
    t.extend(std::iter::repeat(a).take(degree + 1));
    t.extend_from_slice(internal);
    t.extend(std::iter::repeat(b).take(degree + 1));
    t
}

/// Linear-interpolation quantile of a sorted slice.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if lo + 1 < n {
        sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
    } else {
        sorted[n - 1]
    }
}

/// Expands every factor column into a centered B-spline block of the given
/// degree with `n_knots` internal knots at equally spaced quantiles.
///
/// A factor whose column has fewer than `n_knots + 2` distinct values falls
/// back to a single centered linear column (width 1). Each spline block has
/// width `degree + #internal_knots + 1`.
pub fn additive_expand(f: &DataMatrix, degree: usize, n_knots: usize) -> Result<AdditiveBasis> {
    if degree == 0 {
        return Err(Error::InvalidConfiguration(
            "spline degree must be at least 1".into(),
        ));
    }
    f.check_sample()?;
    let n = f.n_rows();
    let k = f.n_cols();

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut group_index = Vec::new();
    let mut internal_knots = Vec::with_capacity(k);
    let mut boundaries = Vec::with_capacity(k);
    let mut linear_fallback = Vec::with_capacity(k);

    for g in 0..k {
        let v = f.column(g);
        let mut sorted = v.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut distinct = 1;
        for w in sorted.windows(2) {
            if w[1] > w[0] {
                distinct += 1;
            }
        }
        let a = sorted[0];
        let b = sorted[n - 1];
        if distinct < n_knots + 2 {
            columns.push(v.to_vec());
            group_index.push(g);
            internal_knots.push(Vec::new());
            boundaries.push((a, b));
            linear_fallback.push(true);
            continue;
        }

        let mut internal = Vec::with_capacity(n_knots);
        for ki in 1..=n_knots {
            let q = ki as f64 / (n_knots + 1) as f64;
            let knot = quantile_sorted(&sorted, q);
            let strictly_inside = knot > a && knot < b;
            let increasing = internal.last().map_or(true, |&last| knot > last);
            if strictly_inside && increasing {
                internal.push(knot);
            }
        }
        let knots = clamped_knots(a, b, &internal, degree);
        let m = knots.len() - degree - 1;
        let mut block: Vec<Vec<f64>> = vec![vec![0.0; n]; m];
        let mut row = vec![0.0; m];
        for (i, &x) in v.iter().enumerate() {
            bspline_row(&knots, degree, x, &mut row);
            for (j, col) in block.iter_mut().enumerate() {
                col[i] = row[j];
            }
        }
        for col in block {
            columns.push(col);
            group_index.push(g);
        }
        internal_knots.push(internal);
        boundaries.push((a, b));
        linear_fallback.push(false);
    }

    // Center every expanded column.
    let nf = n as f64;
    let mut column_means = Vec::with_capacity(columns.len());
    for col in &mut columns {
        let mean = col.iter().sum::<f64>() / nf;
        for v in col.iter_mut() {
            *v -= mean;
        }
        column_means.push(mean);
    }

    let expanded = DataMatrix::from_columns(columns)?;
    Ok(AdditiveBasis {
        degree,
        internal_knots,
        boundaries,
        expanded,
        group_index,
        column_means,
        linear_fallback,
    })
}
