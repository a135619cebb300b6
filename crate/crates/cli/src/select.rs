//! Column-block selectors: comma-separated names, zero-based indices, or
//! inclusive index ranges like "3-7".

use crate::CliError;

pub fn parse_selector(spec: &str, names: &[String]) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    for token in spec.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        if let Ok(idx) = token.parse::<usize>() {
            out.push(check_index(idx, names.len())?);
            continue;
        }
        if let Some((lo, hi)) = token.split_once('-') {
            if let (Ok(lo), Ok(hi)) = (lo.trim().parse::<usize>(), hi.trim().parse::<usize>()) {
                if lo > hi {
                    return Err(CliError::input(format!(
                        "descending range {token:?} in column selector"
                    )));
                }
                for idx in lo..=hi {
                    out.push(check_index(idx, names.len())?);
                }
                continue;
            }
        }
        match names.iter().position(|n| n == token) {
            Some(idx) => out.push(idx),
            None => {
                return Err(CliError::input(format!(
                    "unknown column {token:?} (no such name, not an index)"
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::input(format!("empty column selector {spec:?}")));
    }
    let mut seen = vec![false; names.len()];
    for &idx in &out {
        if seen[idx] {
            return Err(CliError::input(format!(
                "column {idx} listed twice in selector {spec:?}"
            )));
        }
        seen[idx] = true;
    }
    Ok(out)
}

fn check_index(idx: usize, n_cols: usize) -> Result<usize, CliError> {
    if idx >= n_cols {
        return Err(CliError::input(format!(
            "column index {idx} out of range (file has {n_cols} columns)"
        )));
    }
    Ok(idx)
}

/// Errors when two named blocks share a column.
pub fn ensure_disjoint(
    a: &[usize],
    a_name: &str,
    b: &[usize],
    b_name: &str,
) -> Result<(), CliError> {
    for idx in a {
        if b.contains(idx) {
            return Err(CliError::input(format!(
                "column {idx} appears in both {a_name} and {b_name}; blocks must be disjoint"
            )));
        }
    }
    Ok(())
}
