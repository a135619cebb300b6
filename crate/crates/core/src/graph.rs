//! Conditional-dependency graphs built from pairwise P-DCov tests, with
//! per-test or BH-FDR edge selection.

use rayon::prelude::*;

use crate::dcov::{
    critical_value, default_permutations, dcov_components, pairwise_distances,
    permutation_test_cached, DistanceMatrix, MAX_ASYMPTOTIC_ALPHA,
};
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::projection::{residualize_with, Method, ResidualOptions};
use crate::rng::{child_seed, SplitMix64};

/// Edge-selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    PerTestAlpha,
    BhFdr,
}

impl Selection {
    pub fn name(&self) -> &'static str {
        match self {
            Selection::PerTestAlpha => "per_test_alpha",
            Selection::BhFdr => "bh_fdr",
        }
    }
}

/// Where the conditioning factors come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorMode {
    /// Condition each pair on the remaining node columns.
    Internal,
    /// Residualize all nodes on external factors once, then test residual
    /// pairs marginally.
    External,
    /// Residualize on external factors, then build an internal graph on the
    /// residuals.
    TwoStep,
}

impl FactorMode {
    pub fn name(&self) -> &'static str {
        match self {
            FactorMode::Internal => "internal",
            FactorMode::External => "external",
            FactorMode::TwoStep => "two_step",
        }
    }
}

/// Dependence measure applied to residual pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    DCov,
    /// Absolute Pearson correlation, calibrated with the same permutation
    /// engine. Only defined for univariate residual pairs.
    Pearson,
}

impl Measure {
    pub fn name(&self) -> &'static str {
        match self {
            Measure::DCov => "dcov",
            Measure::Pearson => "pearson",
        }
    }
}

/// Settings shared by every pair test in a graph build.
#[derive(Debug, Clone)]
pub struct GraphConfig {
    pub projection: Method,
    pub measure: Measure,
    /// `None` selects R(n) = floor(200 + 5000/n); `Some(0)` disables
    /// permutations and uses the asymptotic rule (per-test selection only).
    pub permutations: Option<usize>,
    pub alpha: f64,
    pub selection: Selection,
    /// When true, the BH denominator counts only testable pairs instead of
    /// all d(d-1)/2 pairs.
    pub bh_over_testable: bool,
    pub cv_folds: usize,
    pub spline_degree: usize,
    pub spline_knots: usize,
}

impl GraphConfig {
    pub fn new(projection: Method, selection: Selection, alpha: f64) -> Self {
        Self {
            projection,
            measure: Measure::DCov,
            permutations: None,
            alpha,
            selection,
            bh_over_testable: false,
            cv_folds: 10,
            spline_degree: 3,
            spline_knots: 3,
        }
    }

    fn residual_options(&self) -> ResidualOptions {
        ResidualOptions {
            method: self.projection,
            cv_folds: self.cv_folds,
            spline_degree: self.spline_degree,
            spline_knots: self.spline_knots,
        }
    }

    fn validate(&self, n: usize) -> Result<usize> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidAlpha {
                alpha: self.alpha,
                max: 1.0,
            });
        }
        let r = self.permutations.unwrap_or_else(|| default_permutations(n));
        if r == 0 {
            if self.selection == Selection::BhFdr {
                return Err(Error::InvalidConfiguration(
                    "BH selection needs permutation p-values; set permutations >= 1".into(),
                ));
            }
            if self.measure == Measure::Pearson {
                return Err(Error::InvalidConfiguration(
                    "the Pearson measure has no asymptotic rule; set permutations >= 1".into(),
                ));
            }
            if self.alpha > MAX_ASYMPTOTIC_ALPHA {
                return Err(Error::InvalidAlpha {
                    alpha: self.alpha,
                    max: MAX_ASYMPTOTIC_ALPHA,
                });
            }
        }
        Ok(r)
    }
}

/// Result of one pairwise conditional independence test.
#[derive(Debug, Clone)]
pub struct EdgeTest {
    pub i: usize,
    pub j: usize,
    /// Absent when the pair is untestable (degenerate residuals).
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub untestable: bool,
    /// Assigned by the selection step of the graph build.
    pub rejected: bool,
}

/// A full conditional-dependency graph: every pair appears exactly once.
#[derive(Debug, Clone)]
pub struct Graph {
    pub node_labels: Vec<String>,
    pub edges: Vec<EdgeTest>,
    pub selection: Selection,
    pub alpha: f64,
    pub factor_mode: FactorMode,
}

impl Graph {
    pub fn n_nodes(&self) -> usize {
        self.node_labels.len()
    }

    pub fn rejected_count(&self) -> usize {
        self.edges.iter().filter(|e| e.rejected).count()
    }

    pub fn untestable_count(&self) -> usize {
        self.edges.iter().filter(|e| e.untestable).count()
    }
}

fn default_labels(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("v{i}")).collect()
}

fn column_spread(v: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in v {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    hi - lo
}

/// Residuals that are constant up to floating-point noise from the fit make
/// the pair untestable. The tolerance is relative to the scale of the
/// original response so that projecting a constant (or exactly collinear)
/// column does not produce a spurious test on rounding junk.
fn residual_degenerate(resid: &[f64], original: &[f64]) -> bool {
    let scale = column_spread(original)
        .max(original.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
        .max(f64::MIN_POSITIVE);
    column_spread(resid) <= 1e-12 * scale
}

/// Permutation test for |Pearson correlation| on univariate pairs. The
/// denominators are invariant under re-pairing, so each permutation costs
/// O(n).
fn pearson_permutation(x: &[f64], y: &[f64], r: usize, seed: u64) -> Result<(f64, f64)> {
    let n = x.len();
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let xc: Vec<f64> = x.iter().map(|v| v - mx).collect();
    let yc: Vec<f64> = y.iter().map(|v| v - my).collect();
    let sx = xc.iter().map(|v| v * v).sum::<f64>().sqrt();
    let sy = yc.iter().map(|v| v * v).sum::<f64>().sqrt();
    if sx == 0.0 || sy == 0.0 {
        return Err(Error::DegenerateSample);
    }
    let corr = |perm: Option<&[usize]>| -> f64 {
        let num: f64 = match perm {
            None => xc.iter().zip(&yc).map(|(a, b)| a * b).sum(),
            Some(p) => (0..n).map(|i| xc[p[i]] * yc[i]).sum(),
        };
        (num / (sx * sy)).abs()
    };
    let t0 = corr(None);
    let exceed: usize = (0..r)
        .into_par_iter()
        .with_min_len(32)
        .map(|idx| {
            let mut rng = SplitMix64::new(child_seed(seed, idx as u64 + 1));
            let perm = rng.permutation(n);
            usize::from(corr(Some(&perm)) >= t0)
        })
        .sum();
    Ok((t0, (1 + exceed) as f64 / (r + 1) as f64))
}

/// Outcome of testing one residual pair, before selection.
fn test_residual_pair(
    ex: &DataMatrix,
    ey: &DataMatrix,
    config: &GraphConfig,
    r: usize,
    seed: u64,
) -> Result<(Option<f64>, Option<f64>, bool)> {
    match config.measure {
        Measure::DCov => {
            if r == 0 {
                let dx = pairwise_distances(ex)?;
                let dy = pairwise_distances(ey)?;
                let comp = dcov_components(&dx, &dy)?;
                if comp.s2 <= 0.0 {
                    return Ok((None, None, true));
                }
                let t = comp.n as f64 * comp.v2 / comp.s2;
                return Ok((Some(t), None, false));
            }
            match crate::dcov::permutation_test(ex, ey, r, seed, config.alpha) {
                Ok(res) => Ok((Some(res.statistic), res.p_value, false)),
                Err(Error::DegenerateSample) => Ok((None, None, true)),
                Err(e) => Err(e),
            }
        }
        Measure::Pearson => {
            match pearson_permutation(ex.column(0), ey.column(0), r, seed) {
                Ok((t, p)) => Ok((Some(t), Some(p), false)),
                Err(Error::DegenerateSample) => Ok((None, None, true)),
                Err(e) => Err(e),
            }
        }
    }
}

/// Tests nodes `i` and `j` of `z` conditionally on the remaining columns.
///
/// The pair is canonicalized to (min, max) before seeding, so the result is
/// symmetric in the argument order. The pair draws its projection and
/// permutation randomness from stream (master_seed, i, j).
pub fn pair_test(
    z: &DataMatrix,
    i: usize,
    j: usize,
    config: &GraphConfig,
    master_seed: u64,
) -> Result<EdgeTest> {
    if i == j {
        return Err(Error::InvalidPair { index: i });
    }
    if z.n_cols() < 3 {
        return Err(Error::InvalidConfiguration(format!(
            "internal factors need at least 3 nodes, got {}",
            z.n_cols()
        )));
    }
    let r = config.validate(z.n_rows())?;
    let (a, b) = (i.min(j), i.max(j));
    let pair_seed = child_seed(child_seed(master_seed, a as u64), b as u64);
    let factors = z.drop_two_columns(a, b);
    let responses = z.select_columns(&[a, b]);
    let set = residualize_with(
        &responses,
        &factors,
        &config.residual_options(),
        child_seed(pair_seed, 0),
    )?;
    if residual_degenerate(set.residuals.column(0), z.column(a))
        || residual_degenerate(set.residuals.column(1), z.column(b))
    {
        return Ok(EdgeTest {
            i: a,
            j: b,
            statistic: None,
            p_value: None,
            untestable: true,
            rejected: false,
        });
    }
    let ex = DataMatrix::from_column(set.residuals.column(0).to_vec())?;
    let ey = DataMatrix::from_column(set.residuals.column(1).to_vec())?;
    let (statistic, p_value, untestable) =
        test_residual_pair(&ex, &ey, config, r, child_seed(pair_seed, 1))?;
    Ok(EdgeTest {
        i: a,
        j: b,
        statistic,
        p_value,
        untestable,
        rejected: false,
    })
}

/// Benjamini-Hochberg step-up selection at level `alpha`.
///
/// Returns the indices (into `p_values`) of the rejected hypotheses: the s
/// smallest p-values where s = max{i : P_(i) <= alpha * i / m} with
/// m = p_values.len(). Ties are broken by stable input order.
pub fn bh_select(p_values: &[f64], alpha: f64) -> Result<Vec<usize>> {
    bh_select_with_denominator(p_values, alpha, p_values.len())
}

/// BH selection with an explicit denominator `m` (the graph builder keeps
/// m = d(d-1)/2 even when some pairs are untestable).
pub fn bh_select_with_denominator(
    p_values: &[f64],
    alpha: f64,
    m: usize,
) -> Result<Vec<usize>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha { alpha, max: 1.0 });
    }
    for (idx, &p) in p_values.iter().enumerate() {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "p-value {idx} out of (0,1]: {p}"
            )));
        }
    }
    if p_values.is_empty() || m == 0 {
        return Ok(Vec::new());
    }
    let mut order: Vec<usize> = (0..p_values.len()).collect();
    order.sort_by(|&a, &b| {
        p_values[a]
            .partial_cmp(&p_values[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut s = 0;
    for (rank, &idx) in order.iter().enumerate() {
        let threshold = alpha * (rank + 1) as f64 / m as f64;
        if p_values[idx] <= threshold {
            s = rank + 1;
        }
    }
    Ok(order[..s].to_vec())
}

/// Applies the configured selection rule, marking rejected edges in place.
fn apply_selection(edges: &mut [EdgeTest], config: &GraphConfig, d: usize) -> Result<()> {
    match config.selection {
        Selection::PerTestAlpha => {
            let crit = if config.permutations == Some(0) {
                Some(critical_value(config.alpha)?)
            } else {
                None
            };
            for e in edges.iter_mut() {
                e.rejected = match (e.untestable, e.p_value, e.statistic) {
                    (true, _, _) => false,
                    (false, Some(p), _) => p <= config.alpha,
                    (false, None, Some(t)) => t > crit.expect("asymptotic mode"),
                    _ => false,
                };
            }
        }
        Selection::BhFdr => {
            let testable: Vec<usize> = edges
                .iter()
                .enumerate()
                .filter(|(_, e)| !e.untestable)
                .map(|(k, _)| k)
                .collect();
            let ps: Vec<f64> = testable
                .iter()
                .map(|&k| edges[k].p_value.expect("testable edges carry p-values"))
                .collect();
            let m = if config.bh_over_testable {
                ps.len()
            } else {
                d * (d - 1) / 2
            };
            for &k in bh_select_with_denominator(&ps, config.alpha, m)?.iter() {
                edges[testable[k]].rejected = true;
            }
        }
    }
    Ok(())
}

/// Internal-factor graph: every pair (i, j) is tested conditionally on the
/// remaining node columns. Pair tests run in parallel; the per-pair seed
/// streams make the result independent of the schedule.
pub fn build_graph(z: &DataMatrix, config: &GraphConfig, seed: u64) -> Result<Graph> {
    let d = z.n_cols();
    if d < 3 {
        return Err(Error::InvalidConfiguration(format!(
            "internal-factor graphs need at least 3 nodes, got {d}"
        )));
    }
    if z.n_rows() < 10 {
        return Err(Error::TooFewObservations {
            min: 10,
            got: z.n_rows(),
        });
    }
    config.validate(z.n_rows())?;
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|i| ((i + 1)..d).map(move |j| (i, j)))
        .collect();
    let mut edges = pairs
        .par_iter()
        .map(|&(i, j)| pair_test(z, i, j, config, seed))
        .collect::<Result<Vec<_>>>()?;
    apply_selection(&mut edges, config, d)?;
    Ok(Graph {
        node_labels: default_labels(d),
        edges,
        selection: config.selection,
        alpha: config.alpha,
        factor_mode: FactorMode::Internal,
    })
}

/// External-factor graph: residualizes every node column on `f` once, then
/// tests residual pairs marginally.
pub fn external_factor_graph(
    z: &DataMatrix,
    f: &DataMatrix,
    config: &GraphConfig,
    seed: u64,
) -> Result<Graph> {
    if f.n_cols() == 0 {
        return Err(Error::EmptyFactorSet);
    }
    if z.n_rows() != f.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "nodes have {} rows, factors {}",
            z.n_rows(),
            f.n_rows()
        )));
    }
    let d = z.n_cols();
    if d < 2 {
        return Err(Error::InvalidConfiguration(format!(
            "graphs need at least 2 nodes, got {d}"
        )));
    }
    let r = config.validate(z.n_rows())?;
    let set = residualize_with(z, f, &config.residual_options(), child_seed(seed, 0))?;
    let u = &set.residuals;
    let degenerate: Vec<bool> = (0..d)
        .map(|j| residual_degenerate(u.column(j), z.column(j)))
        .collect();

    // Distances per column are shared across the d-1 pairs touching it.
    let cached: Vec<Option<DistanceMatrix>> = if config.measure == Measure::DCov {
        (0..d)
            .into_par_iter()
            .map(|j| -> Result<Option<DistanceMatrix>> {
                if degenerate[j] {
                    Ok(None)
                } else {
                    let col = DataMatrix::from_column(u.column(j).to_vec())?;
                    Ok(Some(pairwise_distances(&col)?))
                }
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![None; d]
    };

    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|i| ((i + 1)..d).map(move |j| (i, j)))
        .collect();
    let mut edges = pairs
        .par_iter()
        .map(|&(a, b)| -> Result<EdgeTest> {
            let untestable_edge = EdgeTest {
                i: a,
                j: b,
                statistic: None,
                p_value: None,
                untestable: true,
                rejected: false,
            };
            if degenerate[a] || degenerate[b] {
                return Ok(untestable_edge);
            }
            let pair_seed = child_seed(child_seed(seed, a as u64), b as u64);
            let test_seed = child_seed(pair_seed, 1);
            let (statistic, p_value, untestable) = match config.measure {
                Measure::DCov => {
                    let (dist_a, dist_b) = (
                        cached[a].as_ref().expect("distances cached"),
                        cached[b].as_ref().expect("distances cached"),
                    );
                    if r == 0 {
                        let comp = dcov_components(dist_a, dist_b)?;
                        if comp.s2 <= 0.0 {
                            (None, None, true)
                        } else {
                            (Some(comp.n as f64 * comp.v2 / comp.s2), None, false)
                        }
                    } else {
                        match permutation_test_cached(dist_a, dist_b, r, test_seed, config.alpha) {
                            Ok(res) => (Some(res.statistic), res.p_value, false),
                            Err(Error::DegenerateSample) => (None, None, true),
                            Err(e) => return Err(e),
                        }
                    }
                }
                Measure::Pearson => match pearson_permutation(u.column(a), u.column(b), r, test_seed)
                {
                    Ok((t, p)) => (Some(t), Some(p), false),
                    Err(Error::DegenerateSample) => (None, None, true),
                    Err(e) => return Err(e),
                },
            };
            Ok(EdgeTest {
                i: a,
                j: b,
                statistic,
                p_value,
                untestable,
                rejected: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    apply_selection(&mut edges, config, d)?;
    Ok(Graph {
        node_labels: default_labels(d),
        edges,
        selection: config.selection,
        alpha: config.alpha,
        factor_mode: FactorMode::External,
    })
}

/// Two-step graph: residualize `z` on external factors, then build an
/// internal-factor graph on the residuals.
pub fn two_step_graph(
    z: &DataMatrix,
    f: &DataMatrix,
    config: &GraphConfig,
    seed: u64,
) -> Result<Graph> {
    if f.n_cols() == 0 {
        return Err(Error::EmptyFactorSet);
    }
    if z.n_rows() != f.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "nodes have {} rows, factors {}",
            z.n_rows(),
            f.n_rows()
        )));
    }
    let set = residualize_with(z, f, &config.residual_options(), child_seed(seed, 0))?;
    let mut graph = build_graph(&set.residuals, config, child_seed(seed, 1))?;
    graph.factor_mode = FactorMode::TwoStep;
    Ok(graph)
}

/// Per-node degree counts over rejected edges, plus the mean degree.
pub fn degree_distribution(graph: &Graph) -> (Vec<usize>, f64) {
    let d = graph.n_nodes();
    let mut degrees = vec![0usize; d];
    for e in &graph.edges {
        if e.rejected {
            degrees[e.i] += 1;
            degrees[e.j] += 1;
        }
    }
    let mean = if d == 0 {
        0.0
    } else {
        degrees.iter().sum::<usize>() as f64 / d as f64
    };
    (degrees, mean)
}
