// Probe: type-I rates of the factor-model pipeline under CV-min vs CV-1se
// lambda rules, plus the oracle, on the first design at rho = 0.
use pdcov::rng::child_seed;
use pdcov::sim::gen_example1;
use pdcov::{
    cv_select_lambda, default_permutations, lasso_coordinate_descent, permutation_test, refit_ols,
    DataMatrix,
};

fn one_se_lambda(f: &DataMatrix, y: &[f64], folds: usize, seed: u64) -> (f64, f64, usize) {
    // Recompute CV here with per-fold errors to get the 1-SE threshold.
    use pdcov::rng::SplitMix64;
    let n = f.n_rows();
    let (lambda_min, path) = cv_select_lambda(f, y, folds, seed).unwrap();
    // per-fold errors: redo fold assignment identically
    let mut order: Vec<usize> = (0..n).collect();
    SplitMix64::new(child_seed(seed, 0)).shuffle(&mut order);
    let mut fold_of = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % folds;
    }
    let grid: Vec<f64> = path.iter().map(|&(l, _)| l).collect();
    let mut fold_mse = vec![vec![0.0f64; grid.len()]; folds];
    for fold in 0..folds {
        let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != fold).collect();
        let test: Vec<usize> = (0..n).filter(|&i| fold_of[i] == fold).collect();
        let f_tr = f.select_rows(&train);
        let y_tr: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        for (li, &lam) in grid.iter().enumerate() {
            let fit = lasso_coordinate_descent(&f_tr, &y_tr, lam, 1e-7, 100_000).unwrap();
            let mut sse = 0.0;
            for &i in &test {
                let mut pred = fit.intercept;
                for &j in &fit.support {
                    pred += fit.coefficients[j] * f.get(i, j);
                }
                sse += (y[i] - pred) * (y[i] - pred);
            }
            fold_mse[fold][li] = sse / test.len() as f64;
        }
    }
    let mean: Vec<f64> = (0..grid.len())
        .map(|li| fold_mse.iter().map(|fm| fm[li]).sum::<f64>() / folds as f64)
        .collect();
    let best = (0..grid.len()).fold(0, |b, li| if mean[li] < mean[b] { li } else { b });
    let var = fold_mse
        .iter()
        .map(|fm| (fm[best] - mean[best]).powi(2))
        .sum::<f64>()
        / (folds as f64 - 1.0);
    let se = (var / folds as f64).sqrt();
    let threshold = mean[best] + se;
    let mut li_1se = best;
    for li in (0..=best).rev() {
        if mean[li] <= threshold {
            li_1se = li;
        }
    }
    (lambda_min, grid[li_1se], best)
}

fn main() {
    let n = 200;
    let reps = 60;
    let alpha = 0.1;
    let r = default_permutations(n);
    let run_rep = |rep: u64| {
            let rep_seed = child_seed(0xC5_1234, rep);
            let data = gen_example1(n, 0.0, child_seed(rep_seed, 0));
            // oracle arm
            let p_oracle = permutation_test(&data.eps_x, &data.eps_y, r, child_seed(rep_seed, 3), alpha)
                .unwrap()
                .p_value
                .unwrap();
            // projected arms share CV paths per column
            let mut res_min_x = DataMatrix::zeros(n, 5);
            let mut res_1se_x = DataMatrix::zeros(n, 5);
            let mut supp_min = 0usize;
            let mut supp_1se = 0usize;
            for (block, (src, p_cols)) in [(&data.x, 5usize), (&data.y, 10usize)].iter().enumerate() {
                let _ = src;
                let _ = p_cols;
                let _ = block;
            }
            let mut res_min_y = DataMatrix::zeros(n, 10);
            let mut res_1se_y = DataMatrix::zeros(n, 10);
            for j in 0..5 {
                let y_col = data.x.column(j);
                let seed = child_seed(child_seed(rep_seed, 1), j as u64);
                let (lmin, l1se, _) = one_se_lambda(&data.f, y_col, 10, seed);
                for (lam, out, supp) in [
                    (lmin, &mut res_min_x, &mut supp_min),
                    (l1se, &mut res_1se_x, &mut supp_1se),
                ] {
                    let lasso = lasso_coordinate_descent(&data.f, y_col, lam, 1e-7, 100_000).unwrap();
                    let fit = refit_ols(&data.f, y_col, &lasso.support).unwrap();
                    let resid = fit.residuals(&data.f, y_col);
                    out.column_mut(j).copy_from_slice(&resid);
                    *supp += lasso.support.len();
                }
            }
            for j in 0..10 {
                let y_col = data.y.column(j);
                let seed = child_seed(child_seed(rep_seed, 2), j as u64);
                let (lmin, l1se, _) = one_se_lambda(&data.f, y_col, 10, seed);
                for (lam, out, supp) in [
                    (lmin, &mut res_min_y, &mut supp_min),
                    (l1se, &mut res_1se_y, &mut supp_1se),
                ] {
                    let lasso = lasso_coordinate_descent(&data.f, y_col, lam, 1e-7, 100_000).unwrap();
                    let fit = refit_ols(&data.f, y_col, &lasso.support).unwrap();
                    let resid = fit.residuals(&data.f, y_col);
                    out.column_mut(j).copy_from_slice(&resid);
                    *supp += lasso.support.len();
                }
            }
            let p_min = permutation_test(&res_min_x, &res_min_y, r, child_seed(rep_seed, 3), alpha)
                .unwrap()
                .p_value
                .unwrap();
            let p_1se = permutation_test(&res_1se_x, &res_1se_y, r, child_seed(rep_seed, 3), alpha)
                .unwrap()
                .p_value
                .unwrap();
            (p_oracle <= alpha, p_min <= alpha, p_1se <= alpha, supp_min, supp_1se)
    };
    let results: Vec<(bool, bool, bool, usize, usize)> = std::thread::scope(|s| {
        let mid = reps / 2;
        let run_rep = &run_rep;
        let a = s.spawn(move || (0..mid).map(run_rep).collect::<Vec<_>>());
        let b = s.spawn(move || (mid..reps).map(run_rep).collect::<Vec<_>>());
        let mut out = a.join().unwrap();
        out.extend(b.join().unwrap());
        out
    });
    let rate = |f: &dyn Fn(&(bool, bool, bool, usize, usize)) -> bool| {
        results.iter().filter(|r| f(r)).count() as f64 / reps as f64
    };
    let mean_supp_min: f64 =
        results.iter().map(|r| r.3 as f64).sum::<f64>() / (reps as f64 * 15.0);
    let mean_supp_1se: f64 =
        results.iter().map(|r| r.4 as f64).sum::<f64>() / (reps as f64 * 15.0);
    println!("oracle rate: {}", rate(&|r| r.0));
    println!("cv-min rate: {} (mean support {:.1})", rate(&|r| r.1), mean_supp_min);
    println!("cv-1se rate: {} (mean support {:.1})", rate(&|r| r.2), mean_supp_1se);
}
