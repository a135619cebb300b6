//! `pdcov simulate`: the five built-in Monte Carlo designs.
//!
//! Design 1 produces a type-I-error/power table; designs 2-5 produce ROC
//! point rows (pooled over repetitions) with a mean-AUC footer row. Every
//! row carries the design parameters, repetition count and seed.

use std::fmt::Write as _;

use pdcov::sim::{graph_roc, type1_power_table, SimSpec};

use crate::args::SimulateArgs;
use crate::commands::write_or_return;
use crate::csvio::fmt_num;
use crate::{with_thread_pool, CliError};

pub fn run(args: &SimulateArgs) -> Result<Option<String>, CliError> {
    if !(1..=5).contains(&args.example) {
        return Err(CliError::input(format!(
            "unknown example id {}; valid ids are 1..=5",
            args.example
        )));
    }
    let (d, reps) = if args.paper_scale {
        (30, 1000)
    } else {
        (args.d, args.reps)
    };

    let mut spec = if args.example == 1 {
        SimSpec::example1(args.n, args.rho, reps, args.seed)
    } else {
        SimSpec::graph(args.example, args.n, d, reps, args.seed)
    };
    spec.k = args.k;
    spec.g_mode = args.g_mode.to_g_mode();
    spec.oracle = args.oracle;
    spec.projection = args.projection.to_method();
    spec.measure = args.measure.to_measure();
    spec.permutations = args.permutations;
    spec.t_scaling = args.t_scaling.to_scaling();
    if let Some(mode) = args.mode {
        spec.mode = mode.to_mode();
    }

    let csv = if args.example == 1 {
        let alphas = parse_alphas(&args.alphas)?;
        let rows = with_thread_pool(args.threads, || {
            type1_power_table(&spec, &alphas).map_err(CliError::from)
        })?;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "example,n,rho,projection,oracle,reps,seed,alpha,rate,margin"
        );
        for row in rows {
            let _ = writeln!(
                out,
                "1,{},{},{},{},{},{},{},{},{}",
                args.n,
                fmt_num(args.rho),
                spec.projection.name(),
                spec.oracle,
                row.reps,
                args.seed,
                fmt_num(row.alpha),
                fmt_num(row.rate),
                fmt_num(row.margin)
            );
        }
        out
    } else {
        let exp = with_thread_pool(args.threads, || {
            graph_roc(&spec).map_err(CliError::from)
        })?;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "example,n,d,mode,projection,measure,g,reps,seed,kind,threshold,fpr,tpr,auc,auc_se"
        );
        let prefix = format!(
            "{},{},{},{},{},{},{},{},{}",
            spec.example,
            spec.n,
            spec.d,
            spec.mode.name(),
            spec.projection.name(),
            spec.measure.name(),
            spec.g_mode.name(),
            spec.reps,
            spec.seed
        );
        for (t, (fpr, tpr)) in exp.pooled.thresholds.iter().zip(&exp.pooled.points) {
            let _ = writeln!(
                out,
                "{prefix},point,{},{},{},,",
                fmt_num(*t),
                fmt_num(*fpr),
                fmt_num(*tpr)
            );
        }
        let _ = writeln!(
            out,
            "{prefix},auc,,,,{},{}",
            fmt_num(exp.auc_mean),
            fmt_num(exp.auc_se)
        );
        out
    };

    write_or_return(&args.out, csv)
}

fn parse_alphas(spec: &str) -> Result<Vec<f64>, CliError> {
    let alphas: Result<Vec<f64>, _> = spec
        .split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>())
        .collect();
    let alphas = alphas.map_err(|e| CliError::input(format!("bad --alphas list: {e}")))?;
    if alphas.is_empty() {
        return Err(CliError::input("--alphas is empty".to_string()));
    }
    Ok(alphas)
}
