//! Small dense linear algebra: Cholesky, pivoted-QR least squares with a
//! minimum-norm completion for rank-deficient systems, and a Jacobi
//! eigensolver for small symmetric matrices.
//!
//! Everything here is written for modest sizes (tens to a few hundred
//! columns) and bit-reproducible results; no BLAS is involved.

use crate::error::{Error, Result};

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for i in 0..x.len() {
        y[i] += alpha * x[i];
    }
}

/// Cholesky factor L (row-major lower triangle) of a symmetric
/// positive-definite matrix given in row-major order.
pub fn cholesky(a: &[f64], n: usize) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not positive definite (pivot {i} = {sum})"
                    )));
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// Solves A x = b given the Cholesky factor L of A.
pub fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * y[k];
        }
        y[i] = sum / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l[k * n + i] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    x
}

/// Inverse of a symmetric positive-definite matrix via Cholesky.
pub fn spd_inverse(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let l = cholesky(a, n)?;
    let mut inv = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.fill(0.0);
        e[j] = 1.0;
        let col = cholesky_solve(&l, n, &e);
        for i in 0..n {
            inv[i * n + j] = col[i];
        }
    }
    Ok(inv)
}

/// Least-squares solution of min ||A beta - y|| for a design given as owned
/// columns. Uses Householder QR with column pivoting; when the design is
/// rank-deficient the minimum-norm solution is returned.
pub struct Lstsq {
    pub coef: Vec<f64>,
    pub rank: usize,
}

pub fn min_norm_lstsq(mut cols: Vec<Vec<f64>>, y: &[f64]) -> Lstsq {
    let m = cols.len();
    let n = y.len();
    debug_assert!(cols.iter().all(|c| c.len() == n));
    let mut qty = y.to_vec();
    let mut perm: Vec<usize> = (0..m).collect();

    let max_norm0 = cols
        .iter()
        .map(|c| dot(c, c).sqrt())
        .fold(0.0_f64, f64::max);
    let tol = (n.max(m) as f64) * f64::EPSILON * max_norm0.max(1e-300);

    let steps = m.min(n);
    let mut rank = steps;
    for k in 0..steps {
        // Pivot on the column with the largest remaining tail norm.
        let (piv, piv_norm) = (k..m)
            .map(|j| (j, dot(&cols[j][k..], &cols[j][k..]).sqrt()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_norm <= tol {
            rank = k;
            break;
        }
        cols.swap(k, piv);
        perm.swap(k, piv);

        // Householder reflection zeroing rows k+1.. of column k.
        let alpha = if cols[k][k] >= 0.0 { -piv_norm } else { piv_norm };
        let mut v = cols[k][k..].to_vec();
        v[0] -= alpha;
        let vtv = dot(&v, &v);
        cols[k][k] = alpha;
        for e in cols[k][k + 1..].iter_mut() {
            *e = 0.0;
        }
        if vtv > 0.0 {
            let scale = 2.0 / vtv;
            for col in cols.iter_mut().skip(k + 1) {
                let w = dot(&v, &col[k..]) * scale;
                axpy(-w, &v, &mut col[k..]);
            }
            let w = dot(&v, &qty[k..]) * scale;
            axpy(-w, &v, &mut qty[k..]);
        }
    }

    let mut beta_perm = vec![0.0; m];
    if rank == m {
        // Full rank: back-substitute R beta = Q'y.
        for i in (0..m).rev() {
            let mut sum = qty[i];
            for j in i + 1..m {
                sum -= cols[j][i] * beta_perm[j];
            }
            beta_perm[i] = sum / cols[i][i];
        }
    } else {
        // Minimum-norm solution of the underdetermined top block:
        // z = M' (M M')^{-1} c with M the r x m upper trapezoid of R.
        let r = rank;
        let mut g = vec![0.0; r * r]; // M M'
        for i in 0..r {
            for j in 0..r {
                let mut s = 0.0;
                for t in i.max(j)..m {
                    s += cols[t][i] * cols[t][j];
                }
                g[i * r + j] = s;
            }
        }
        let l = match cholesky(&g, r) {
            Ok(l) => l,
            Err(_) => {
                // Numerically singular even after rank truncation: fall back
                // to a heavily truncated rank and zero solution.
                return Lstsq {
                    coef: vec![0.0; m],
                    rank: 0,
                };
            }
        };
        let u = cholesky_solve(&l, r, &qty[..r]);
        for j in 0..m {
            let mut s = 0.0;
            for i in 0..=j.min(r - 1) {
                s += cols[j][i] * u[i];
            }
            beta_perm[j] = s;
        }
    }

    let mut coef = vec![0.0; m];
    for j in 0..m {
        coef[perm[j]] = beta_perm[j];
    }
    Lstsq { coef, rank }
}

/// Eigendecomposition of a small symmetric matrix (row-major) by the cyclic
/// Jacobi method. Returns (eigenvalues, eigenvectors as row-major columns).
pub fn sym_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale: f64 = (0..n)
        .map(|i| m[i * n + i].abs())
        .fold(1e-300_f64, f64::max);
    for _sweep in 0..100 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(m[p * n + q].abs());
            }
        }
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let eigvals: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    (eigvals, v)
}
