//! `pdcov roc`: ROC/AUC for an externally computed p-value (or score) matrix
//! against a truth adjacency, e.g. to compare other structure-recovery
//! methods on the same footing.

use std::fmt::Write as _;

use pdcov::sim::{roc_from_pvalues, Adjacency};

use crate::args::RocArgs;
use crate::commands::write_or_return;
use crate::csvio::{fmt_num, read_csv};
use crate::CliError;

pub fn run(args: &RocArgs) -> Result<Option<String>, CliError> {
    let p = read_csv(&args.input, args.header)?.matrix;
    let truth_raw = read_csv(&args.truth, args.header)?.matrix;
    let d = truth_raw.n_rows();
    if truth_raw.n_cols() != d {
        return Err(CliError::input(format!(
            "truth matrix must be square, got {}x{}",
            d,
            truth_raw.n_cols()
        )));
    }
    let mut truth = Adjacency::new(d);
    for i in 0..d {
        for j in 0..d {
            let v = truth_raw.get(i, j);
            if v != 0.0 && v != 1.0 {
                return Err(CliError::input(format!(
                    "truth entries must be 0 or 1, found {v} at ({i}, {j})"
                )));
            }
            if i != j && v == 1.0 {
                if truth_raw.get(j, i) != 1.0 {
                    return Err(CliError::input(format!(
                        "truth adjacency not symmetric at ({i}, {j})"
                    )));
                }
                truth.set(i, j, true);
            }
        }
    }

    let roc = roc_from_pvalues(&p, &truth)?;
    let mut out = String::new();
    let _ = writeln!(out, "kind,threshold,fpr,tpr,auc");
    for (t, (fpr, tpr)) in roc.thresholds.iter().zip(&roc.points) {
        let _ = writeln!(
            out,
            "point,{},{},{},",
            fmt_num(*t),
            fmt_num(*fpr),
            fmt_num(*tpr)
        );
    }
    let _ = writeln!(out, "auc,,,,{}", fmt_num(roc.auc));
    write_or_return(&args.out, out)
}
