//! Monte Carlo designs, ROC/AUC evaluation and repetition harnesses.

mod generators;
mod power;
mod roc;

pub use generators::{
    gen_ar1_sigma, gen_example1, gen_example2, gen_example3, gen_example3_with, gen_example4,
    gen_example5, Example1, FactorGraphData, GMode, GraphData, TScaling, EXAMPLE1_K, EXAMPLE1_P,
    EXAMPLE1_Q, EXAMPLE5_K,
};
pub use power::{
    example1_pvalue, graph_roc, pvalue_matrix, type1_power_table, PowerRow, RocExperiment, SimSpec,
};
pub use roc::{roc_from_pvalues, Adjacency, RocSummary};
