//! Monte Carlo data generators for the five benchmark designs.
//!
//! Every generator is a deterministic function of its parameters and seed;
//! sub-streams keep the components (loadings, factors, errors, sparsity
//! masks) independent of one another.

use crate::error::Result;
use crate::linalg::cholesky;
use crate::matrix::DataMatrix;
use crate::rng::{child_seed, SplitMix64};
use crate::sim::roc::Adjacency;

/// Factor-to-observation link used by the factor-graph designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GMode {
    Linear,
    Square,
}

impl GMode {
    #[inline]
    pub fn apply(&self, v: f64) -> f64 {
        match self {
            GMode::Linear => v,
            GMode::Square => v * v,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GMode::Linear => "linear",
            GMode::Square => "square",
        }
    }
}

/// Scaling of the multivariate-t block in the third design.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TScaling {
    /// w / sqrt(tau) with tau ~ chi2(5), as printed in the reference design.
    Paper,
    /// The conventional multivariate t: w / sqrt(tau/5).
    Standard,
}

/// High-dimensional factor model sample: x = B_x f + eps_x, y = B_y f + eps_y
/// with p = 5, q = 10, K = 1000.
#[derive(Debug, Clone)]
pub struct Example1 {
    pub x: DataMatrix,
    pub y: DataMatrix,
    pub f: DataMatrix,
    /// True idiosyncratic errors, kept for the oracle pipeline.
    pub eps_x: DataMatrix,
    pub eps_y: DataMatrix,
    /// Whether the errors are dependent (rho > 0).
    pub dependent: bool,
}

pub const EXAMPLE1_P: usize = 5;
pub const EXAMPLE1_Q: usize = 10;
pub const EXAMPLE1_K: usize = 1000;

/// Loading rows have Unif[2,3] entries on the first three coordinates and
/// zeros elsewhere; factors are iid N(0, I_K); errors are a centered
/// log-normal with equal-correlation parameter `rho` (centering uses the
/// analytic mean exp(1/2)).
pub fn gen_example1(n: usize, rho: f64, seed: u64) -> Example1 {
    assert!((0.0..1.0).contains(&rho), "rho must lie in [0,1)");
    let p = EXAMPLE1_P;
    let q = EXAMPLE1_Q;
    let k = EXAMPLE1_K;

    let mut rng_bx = SplitMix64::new(child_seed(seed, 0));
    let mut rng_by = SplitMix64::new(child_seed(seed, 1));
    let mut rng_f = SplitMix64::new(child_seed(seed, 2));
    let mut rng_r = SplitMix64::new(child_seed(seed, 3));

    // Only the first three loading columns are nonzero.
    let bx: Vec<[f64; 3]> = (0..p)
        .map(|_| [rng_bx.uniform(2.0, 3.0), rng_bx.uniform(2.0, 3.0), rng_bx.uniform(2.0, 3.0)])
        .collect();
    let by: Vec<[f64; 3]> = (0..q)
        .map(|_| [rng_by.uniform(2.0, 3.0), rng_by.uniform(2.0, 3.0), rng_by.uniform(2.0, 3.0)])
        .collect();

    let mut f = DataMatrix::zeros(n, k);
    for i in 0..n {
        for j in 0..k {
            f.set(i, j, rng_f.normal());
        }
    }

    // Equal-correlation Gaussian via a shared component, exponentiated and
    // centered by the analytic log-normal mean.
    let center = (0.5_f64).exp();
    let sqrt_rho = rho.sqrt();
    let sqrt_one_minus = (1.0 - rho).sqrt();
    let mut eps_x = DataMatrix::zeros(n, p);
    let mut eps_y = DataMatrix::zeros(n, q);
    for i in 0..n {
        let shared = rng_r.normal();
        for j in 0..p + q {
            let z = sqrt_rho * shared + sqrt_one_minus * rng_r.normal();
            let e = z.exp() - center;
            if j < p {
                eps_x.set(i, j, e);
            } else {
                eps_y.set(i, j - p, e);
            }
        }
    }

    let mut x = DataMatrix::zeros(n, p);
    let mut y = DataMatrix::zeros(n, q);
    for i in 0..n {
        let f0 = f.get(i, 0);
        let f1 = f.get(i, 1);
        let f2 = f.get(i, 2);
        for j in 0..p {
            let lin = bx[j][0] * f0 + bx[j][1] * f1 + bx[j][2] * f2;
            x.set(i, j, lin + eps_x.get(i, j));
        }
        for j in 0..q {
            let lin = by[j][0] * f0 + by[j][1] * f1 + by[j][2] * f2;
            y.set(i, j, lin + eps_y.get(i, j));
        }
    }

    Example1 {
        x,
        y,
        f,
        eps_x,
        eps_y,
        dependent: rho > 0.0,
    }
}

/// AR(1)-style covariance: sigma_ij = exp(-|s_i - s_j|) with gaps
/// s_i - s_{i-1} ~ Uniform(1, 3). Its inverse is tridiagonal.
pub fn gen_ar1_sigma(d: usize, seed: u64) -> Vec<f64> {
    assert!(d >= 2);
    let mut rng = SplitMix64::new(seed);
    let mut s = vec![0.0; d];
    for i in 1..d {
        s[i] = s[i - 1] + rng.uniform(1.0, 3.0);
    }
    let mut sigma = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            sigma[i * d + j] = (-(s[i] - s[j]).abs()).exp();
        }
    }
    sigma
}

/// Rows iid N(0, Sigma) via the Cholesky factor of `sigma`.
fn gaussian_rows(n: usize, d: usize, sigma: &[f64], rng: &mut SplitMix64) -> Result<DataMatrix> {
    let l = cholesky(sigma, d)?;
    let mut z = DataMatrix::zeros(n, d);
    let mut g = vec![0.0; d];
    for i in 0..n {
        for gj in g.iter_mut() {
            *gj = rng.normal();
        }
        for j in 0..d {
            let mut acc = 0.0;
            for t in 0..=j {
                acc += l[j * d + t] * g[t];
            }
            z.set(i, j, acc);
        }
    }
    Ok(z)
}

/// Nodes plus the true conditional-dependency adjacency.
#[derive(Debug, Clone)]
pub struct GraphData {
    pub z: DataMatrix,
    pub truth: Adjacency,
}

/// Gaussian graphical model with the AR(1) covariance; the true structure is
/// the tridiagonal support of the precision matrix.
pub fn gen_example2(n: usize, d: usize, seed: u64) -> Result<GraphData> {
    let sigma = gen_ar1_sigma(d, child_seed(seed, 0));
    let mut rng = SplitMix64::new(child_seed(seed, 1));
    let z = gaussian_rows(n, d, &sigma, &mut rng)?;
    let mut truth = Adjacency::new(d);
    for i in 0..d - 1 {
        truth.set(i, i + 1, true);
    }
    Ok(GraphData { z, truth })
}

const EXAMPLE3_T_DIM: usize = 20;
const EXAMPLE3_GGM_DIM: usize = 10;

/// Mixed design: a 20-dimensional t block (shared chi-squared scale per row,
/// so every pair inside the block is conditionally dependent) stacked next to
/// an independent 10-node Gaussian graphical block.
pub fn gen_example3(n: usize, seed: u64) -> Result<GraphData> {
    gen_example3_with(n, seed, TScaling::Paper)
}

pub fn gen_example3_with(n: usize, seed: u64, scaling: TScaling) -> Result<GraphData> {
    let dt = EXAMPLE3_T_DIM;
    let dg = EXAMPLE3_GGM_DIM;
    let d = dt + dg;

    let mut rng_t = SplitMix64::new(child_seed(seed, 0));
    let mut z = DataMatrix::zeros(n, d);
    for i in 0..n {
        let w: Vec<f64> = rng_t.normals(dt);
        let tau = rng_t.chi2(5);
        let denom = match scaling {
            TScaling::Paper => tau.sqrt(),
            TScaling::Standard => (tau / 5.0).sqrt(),
        };
        for j in 0..dt {
            z.set(i, j, w[j] / denom);
        }
    }

    let sigma = gen_ar1_sigma(dg, child_seed(seed, 1));
    let mut rng_g = SplitMix64::new(child_seed(seed, 2));
    let ggm = gaussian_rows(n, dg, &sigma, &mut rng_g)?;
    for j in 0..dg {
        let dst_col = dt + j;
        for i in 0..n {
            z.set(i, dst_col, ggm.get(i, j));
        }
    }

    let mut truth = Adjacency::new(d);
    for i in 0..dt {
        for j in i + 1..dt {
            truth.set(i, j, true);
        }
    }
    for j in 0..dg - 1 {
        truth.set(dt + j, dt + j + 1, true);
    }
    Ok(GraphData { z, truth })
}

/// Nodes, external factors and the true adjacency for the factor designs.
#[derive(Debug, Clone)]
pub struct FactorGraphData {
    pub z: DataMatrix,
    pub f: DataMatrix,
    pub truth: Adjacency,
    /// Latent graph component before the factor contribution was added.
    pub u: DataMatrix,
    /// Sparse d x K coefficient matrix (row-major).
    pub q: Vec<f64>,
}

fn sparse_coefficients(d: usize, k: usize, rng: &mut SplitMix64) -> Vec<f64> {
    let mut q = vec![0.0; d * k];
    for entry in q.iter_mut() {
        if rng.bernoulli(0.2) {
            *entry = rng.uniform(0.5, 1.0);
        }
    }
    q
}

fn add_factor_contribution(
    u: &DataMatrix,
    f: &DataMatrix,
    q: &[f64],
    g_mode: GMode,
) -> DataMatrix {
    let n = u.n_rows();
    let d = u.n_cols();
    let k = f.n_cols();
    let mut z = u.clone();
    for i in 0..n {
        for j in 0..d {
            let mut acc = 0.0;
            for t in 0..k {
                let q_jt = q[j * k + t];
                if q_jt != 0.0 {
                    acc += q_jt * g_mode.apply(f.get(i, t));
                }
            }
            if acc != 0.0 {
                z.set(i, j, u.get(i, j) + acc);
            }
        }
    }
    z
}

/// Factor-based dependency graph: x = u + Q g(f) with u a Gaussian graphical
/// component (tridiagonal precision truth), f ~ N(0, I_K) and Q sparse with
/// Bernoulli(0.2) support and Uniform(0.5, 1) nonzero entries.
pub fn gen_example4(
    n: usize,
    d: usize,
    k: usize,
    g_mode: GMode,
    seed: u64,
) -> Result<FactorGraphData> {
    let base = gen_example2(n, d, child_seed(seed, 0))?;
    let mut rng_f = SplitMix64::new(child_seed(seed, 1));
    let mut f = DataMatrix::zeros(n, k);
    for i in 0..n {
        for j in 0..k {
            f.set(i, j, rng_f.normal());
        }
    }
    let mut rng_q = SplitMix64::new(child_seed(seed, 2));
    let q = sparse_coefficients(d, k, &mut rng_q);
    let z = add_factor_contribution(&base.z, &f, &q, g_mode);
    Ok(FactorGraphData {
        z,
        f,
        truth: base.truth,
        u: base.z,
        q,
    })
}

pub const EXAMPLE5_K: usize = 30;

/// Mixed graph with external factors: u comes from the third design and the
/// factor contribution Q g(f) from the fourth, with K = 30. The u component
/// reproduces `gen_example3(n, child_seed(seed, 0))` exactly.
pub fn gen_example5(n: usize, seed: u64, g_mode: GMode) -> Result<FactorGraphData> {
    let base = gen_example3(n, child_seed(seed, 0))?;
    let d = base.z.n_cols();
    let k = EXAMPLE5_K;
    let mut rng_f = SplitMix64::new(child_seed(seed, 1));
    let mut f = DataMatrix::zeros(n, k);
    for i in 0..n {
        for j in 0..k {
            f.set(i, j, rng_f.normal());
        }
    }
    let mut rng_q = SplitMix64::new(child_seed(seed, 2));
    let q = sparse_coefficients(d, k, &mut rng_q);
    let z = add_factor_contribution(&base.z, &f, &q, g_mode);
    Ok(FactorGraphData {
        z,
        f,
        truth: base.truth,
        u: base.z,
        q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::spd_inverse;

    #[test]
    fn example1_error_centering() {
        let n = 4000;
        let data = gen_example1(n, 0.3, 7);
        // Each error coordinate has mean 0 within 3 sd / sqrt(n); the
        // log-normal sd is sqrt(e(e-1)) ~ 2.16.
        let sd = (std::f64::consts::E * (std::f64::consts::E - 1.0)).sqrt();
        let tol = 3.0 * sd / (n as f64).sqrt();
        for j in 0..EXAMPLE1_P {
            let mean = data.eps_x.column(j).iter().sum::<f64>() / n as f64;
            assert!(mean.abs() < tol, "eps_x[{j}] mean {mean}");
        }
        for j in 0..EXAMPLE1_Q {
            let mean = data.eps_y.column(j).iter().sum::<f64>() / n as f64;
            assert!(mean.abs() < tol, "eps_y[{j}] mean {mean}");
        }
    }

    #[test]
    fn example1_shapes_and_determinism() {
        let a = gen_example1(50, 0.0, 3);
        let b = gen_example1(50, 0.0, 3);
        assert_eq!(a.x.n_cols(), 5);
        assert_eq!(a.y.n_cols(), 10);
        assert_eq!(a.f.n_cols(), 1000);
        assert!(!a.dependent);
        assert_eq!(a.x.column(0), b.x.column(0));
        assert_eq!(a.f.column(999), b.f.column(999));
    }

    #[test]
    fn ar1_sigma_d2_closed_form() {
        let sigma = gen_ar1_sigma(2, 11);
        assert_eq!(sigma[0], 1.0);
        assert_eq!(sigma[3], 1.0);
        assert!((sigma[1] - sigma[2]).abs() == 0.0);
        // Off-diagonal is exp(-gap) with gap in (1,3).
        let gap = -sigma[1].ln();
        assert!((1.0..3.0).contains(&gap));
    }

    #[test]
    fn ar1_sigma_is_positive_definite_and_inverse_tridiagonal() {
        for d in [5usize, 10, 30] {
            let sigma = gen_ar1_sigma(d, 100 + d as u64);
            let omega = spd_inverse(&sigma, d).unwrap();
            let max_entry = omega.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            for i in 0..d {
                for j in 0..d {
                    if i.abs_diff(j) >= 2 {
                        assert!(
                            omega[i * d + j].abs() <= 1e-8 * max_entry,
                            "d={d}: omega[{i}][{j}] = {}",
                            omega[i * d + j]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn example2_sample_covariance_converges() {
        let n = 5000;
        let d = 5;
        let data = gen_example2(n, d, 21).unwrap();
        let sigma = gen_ar1_sigma(d, child_seed(21, 0));
        for i in 0..d {
            for j in 0..d {
                let ci = data.z.column(i);
                let cj = data.z.column(j);
                let mi = ci.iter().sum::<f64>() / n as f64;
                let mj = cj.iter().sum::<f64>() / n as f64;
                let cov = ci
                    .iter()
                    .zip(cj)
                    .map(|(a, b)| (a - mi) * (b - mj))
                    .sum::<f64>()
                    / n as f64;
                assert!(
                    (cov - sigma[i * d + j]).abs() < 0.1,
                    "cov[{i}][{j}] = {cov} vs {}",
                    sigma[i * d + j]
                );
            }
        }
    }

    #[test]
    fn example2_dimensions_and_truth() {
        let data = gen_example2(30, 30, 5).unwrap();
        assert_eq!(data.z.n_cols(), 30);
        let a = gen_example2(20, 4, 9).unwrap();
        let b = gen_example2(20, 4, 9).unwrap();
        assert_eq!(a.z.column(2), b.z.column(2));
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(a.truth.at(i, j), i.abs_diff(j) == 1);
            }
        }
    }

    #[test]
    fn example3_block_structure() {
        let n = 4000;
        let data = gen_example3(n, 31).unwrap();
        assert_eq!(data.z.n_cols(), 30);
        let corr = |a: &[f64], b: &[f64]| {
            let n = a.len() as f64;
            let ma = a.iter().sum::<f64>() / n;
            let mb = b.iter().sum::<f64>() / n;
            let mut num = 0.0;
            let mut va = 0.0;
            let mut vb = 0.0;
            for (x, y) in a.iter().zip(b) {
                num += (x - ma) * (y - mb);
                va += (x - ma) * (x - ma);
                vb += (y - mb) * (y - mb);
            }
            num / (va.sqrt() * vb.sqrt())
        };
        // Inside the t block: linear correlation near zero, but the squares
        // are correlated through the shared scale.
        let a = data.z.column(0);
        let b = data.z.column(1);
        assert!(corr(a, b).abs() < 0.08);
        let a2: Vec<f64> = a.iter().map(|v| v * v).collect();
        let b2: Vec<f64> = b.iter().map(|v| v * v).collect();
        assert!(corr(&a2, &b2) > 0.05, "squared correlation {}", corr(&a2, &b2));
        // Across blocks: independent.
        assert!(corr(data.z.column(3), data.z.column(25)).abs() < 0.08);
        // Truth layout.
        assert!(data.truth.at(0, 19));
        assert!(data.truth.at(20, 21));
        assert!(!data.truth.at(20, 22));
        assert!(!data.truth.at(5, 25));
    }

    #[test]
    fn example4_sparsity_and_range() {
        let d = 30;
        let k = 40;
        let data = gen_example4(50, d, k, GMode::Linear, 77).unwrap();
        let nonzero = data.q.iter().filter(|&&v| v != 0.0).count();
        let frac = nonzero as f64 / (d * k) as f64;
        assert!((frac - 0.2).abs() < 0.03, "sparsity {frac}");
        for &v in data.q.iter().filter(|&&v| v != 0.0) {
            assert!((0.5..=1.0).contains(&v));
        }
    }

    #[test]
    fn example5_reduces_to_example3_u_component() {
        let n = 25;
        let seed = 314;
        let data = gen_example5(n, seed, GMode::Square).unwrap();
        let base = gen_example3(n, child_seed(seed, 0)).unwrap();
        for j in 0..30 {
            assert_eq!(data.u.column(j), base.z.column(j));
        }
        assert_eq!(data.f.n_cols(), EXAMPLE5_K);
        // Reconstruction: z - Q g(f) = u.
        for i in 0..n {
            for j in 0..30 {
                let mut acc = 0.0;
                for t in 0..EXAMPLE5_K {
                    acc += data.q[j * EXAMPLE5_K + t] * data.f.get(i, t).powi(2);
                }
                assert!((data.z.get(i, j) - acc - data.u.get(i, j)).abs() < 1e-12);
            }
        }
        let again = gen_example5(n, seed, GMode::Square).unwrap();
        assert_eq!(data.z.column(7), again.z.column(7));
    }
}
