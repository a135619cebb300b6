//! `pdcov graph`: conditional-dependency graph over CSV node columns.

use std::path::PathBuf;

use pdcov::{
    build_graph, degree_distribution, external_factor_graph, two_step_graph, FactorMode,
    GraphConfig,
};

use crate::args::GraphArgs;
use crate::commands::write_file;
use crate::csvio::read_csv;
use crate::report::{to_json_pretty, GraphReport};
use crate::select::{ensure_disjoint, parse_selector};
use crate::{with_thread_pool, CliError};

pub fn run(args: &GraphArgs) -> Result<Option<String>, CliError> {
    let table = read_csv(&args.input, args.header)?;
    let mode = args.mode.to_mode();

    let factor_idx = match &args.factor_cols {
        Some(spec) => parse_selector(spec, &table.names)?,
        None => Vec::new(),
    };
    if mode == FactorMode::Internal && !factor_idx.is_empty() {
        return Err(CliError::input(
            "internal mode conditions on the remaining nodes; drop --factor-cols or choose \
             --mode external/two-step"
                .to_string(),
        ));
    }
    if mode != FactorMode::Internal && factor_idx.is_empty() {
        return Err(CliError::input(format!(
            "--mode {} needs --factor-cols",
            mode.name()
        )));
    }

    let node_idx = match &args.x_cols {
        Some(spec) => {
            let idx = parse_selector(spec, &table.names)?;
            ensure_disjoint(&idx, "--x-cols", &factor_idx, "--factor-cols")?;
            idx
        }
        None => (0..table.matrix.n_cols())
            .filter(|j| !factor_idx.contains(j))
            .collect(),
    };
    if node_idx.is_empty() {
        return Err(CliError::input("no node columns left".to_string()));
    }

    let z = table.matrix.select_columns(&node_idx);
    let labels: Vec<String> = node_idx.iter().map(|&j| table.names[j].clone()).collect();
    let f = table.matrix.select_columns(&factor_idx);

    let mut config = GraphConfig::new(
        args.projection.to_method(),
        args.selection.to_selection(),
        args.alpha,
    );
    config.measure = args.measure.to_measure();
    config.permutations = args.permutations;
    config.bh_over_testable = args.bh_testable_denominator;
    let seed = args.seed;

    let mut graph = with_thread_pool(args.threads, || {
        let g = match mode {
            FactorMode::Internal => build_graph(&z, &config, seed)?,
            FactorMode::External => external_factor_graph(&z, &f, &config, seed)?,
            FactorMode::TwoStep => two_step_graph(&z, &f, &config, seed)?,
        };
        Ok(g)
    })?;
    graph.node_labels = labels;

    let (_, mean_degree) = degree_distribution(&graph);
    eprintln!(
        "rejected_edges={} mean_degree={} untestable={}",
        graph.rejected_count(),
        mean_degree,
        graph.untestable_count()
    );

    let report = GraphReport::from_graph(&graph);
    let json = to_json_pretty(&report);
    match &args.out {
        Some(path) => {
            write_file(path, &json)?;
            write_file(&csv_sibling(path), &report.edges_csv())?;
            Ok(None)
        }
        None => Ok(Some(json)),
    }
}

/// graph.json -> graph.csv (or appends .csv when there is no extension).
pub fn csv_sibling(path: &PathBuf) -> PathBuf {
    let mut sibling = path.clone();
    sibling.set_extension("csv");
    if sibling == *path {
        sibling.set_extension("edges.csv");
    }
    sibling
}
