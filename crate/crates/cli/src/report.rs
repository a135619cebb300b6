//! Serializable result reports. Field order is fixed by the structs, so
//! identical runs produce byte-identical JSON.

use serde::Serialize;

use pdcov::Graph;

#[derive(Debug, Serialize)]
pub struct TestReport {
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub reject_asymptotic: Option<bool>,
    pub critical_value: Option<f64>,
    pub alpha: f64,
    pub n: usize,
    #[serde(rename = "R")]
    pub r: usize,
    pub seed: u64,
    pub method: String,
}

#[derive(Debug, Serialize)]
pub struct EdgeReport {
    pub i: usize,
    pub j: usize,
    pub names: [String; 2],
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub rejected: bool,
    pub untestable: bool,
}

#[derive(Debug, Serialize)]
pub struct GraphReport {
    pub nodes: Vec<String>,
    pub mode: String,
    pub selection: String,
    pub alpha: f64,
    pub edges: Vec<EdgeReport>,
}

impl GraphReport {
    pub fn from_graph(graph: &Graph) -> Self {
        let edges = graph
            .edges
            .iter()
            .map(|e| EdgeReport {
                i: e.i,
                j: e.j,
                names: [
                    graph.node_labels[e.i].clone(),
                    graph.node_labels[e.j].clone(),
                ],
                statistic: e.statistic,
                p_value: e.p_value,
                rejected: e.rejected,
                untestable: e.untestable,
            })
            .collect();
        GraphReport {
            nodes: graph.node_labels.clone(),
            mode: graph.factor_mode.name().to_string(),
            selection: graph.selection.name().to_string(),
            alpha: graph.alpha,
            edges,
        }
    }

    /// Edge-list CSV mirroring the JSON edges.
    pub fn edges_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "i,j,name_i,name_j,statistic,p_value,rejected,untestable"
        );
        for e in &self.edges {
            let stat = e.statistic.map_or(String::new(), |v| format!("{v}"));
            let p = e.p_value.map_or(String::new(), |v| format!("{v}"));
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                e.i, e.j, e.names[0], e.names[1], stat, p, e.rejected, e.untestable
            );
        }
        out
    }
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}
