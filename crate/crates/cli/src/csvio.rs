//! Rectangular numeric CSV reading and writing.

use std::fmt::Write as _;
use std::path::Path;

use pdcov::DataMatrix;

use crate::CliError;

/// Parsed CSV: values plus column names (from the header or generated
/// v1..vd).
pub struct CsvTable {
    pub matrix: DataMatrix,
    pub names: Vec<String>,
}

fn split_line(line: &str) -> Vec<&str> {
    line.split(',').map(|f| f.trim()).collect()
}

/// Reads a rectangular numeric CSV (UTF-8, '.' decimal separator).
///
/// Errors name the offending line for ragged rows and the (line, column)
/// coordinates for non-numeric cells. Line numbers are 1-based and include
/// the header line when present.
pub fn read_csv(path: &Path, has_header: bool) -> Result<CsvTable, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    read_csv_str(&text, has_header).map_err(|e| match e {
        CliError::Input(msg) => CliError::input(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn read_csv_str(text: &str, has_header: bool) -> Result<CsvTable, CliError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (first_no, first) = lines
        .next()
        .ok_or_else(|| CliError::input("empty CSV".to_string()))?;

    let (names, mut rows, first_data_width) = if has_header {
        let names: Vec<String> = split_line(first).iter().map(|s| s.to_string()).collect();
        (Some(names), Vec::new(), None)
    } else {
        let fields = split_line(first);
        let row = parse_row(&fields, first_no + 1)?;
        let w = row.len();
        (None, vec![row], Some(w))
    };

    let expected = names.as_ref().map(|n| n.len()).or(first_data_width);
    let mut width = expected;
    for (line_no, line) in lines {
        let fields = split_line(line);
        if let Some(w) = width {
            if fields.len() != w {
                return Err(CliError::input(format!(
                    "ragged row at line {}: expected {w} fields, got {}",
                    line_no + 1,
                    fields.len()
                )));
            }
        } else {
            width = Some(fields.len());
        }
        rows.push(parse_row(&fields, line_no + 1)?);
    }
    if rows.is_empty() {
        return Err(CliError::input("CSV has a header but no data rows"));
    }
    let n = rows.len();
    let d = rows[0].len();
    let mut columns = vec![Vec::with_capacity(n); d];
    for row in &rows {
        for (j, v) in row.iter().enumerate() {
            columns[j].push(*v);
        }
    }
    let matrix = DataMatrix::from_columns(columns)
        .map_err(|e| CliError::input(format!("invalid matrix: {e}")))?;
    let names = names.unwrap_or_else(|| (1..=d).map(|i| format!("v{i}")).collect());
    if names.len() != d {
        return Err(CliError::input(format!(
            "header has {} names but rows have {d} fields",
            names.len()
        )));
    }
    Ok(CsvTable { matrix, names })
}

fn parse_row(fields: &[&str], line_no: usize) -> Result<Vec<f64>, CliError> {
    fields
        .iter()
        .enumerate()
        .map(|(col, f)| {
            f.parse::<f64>().map_err(|_| {
                CliError::input(format!(
                    "non-numeric cell at line {line_no}, column {}: {f:?}",
                    col + 1
                ))
            })
        })
        .collect()
}

/// Shortest round-trip decimal formatting; reruns diff cleanly.
pub fn fmt_num(v: f64) -> String {
    format!("{v}")
}

/// Writes a rectangular CSV with a header row.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut out = String::new();
    let _ = writeln!(out, "{}", header.join(","));
    for row in rows {
        let _ = writeln!(out, "{}", row.join(","));
    }
    std::fs::write(path, out)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

pub fn matrix_to_csv(matrix: &DataMatrix, names: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", names.join(","));
    for i in 0..matrix.n_rows() {
        let row: Vec<String> = (0..matrix.n_cols())
            .map(|j| fmt_num(matrix.get(i, j)))
            .collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}
