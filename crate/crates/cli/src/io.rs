//! CSV and JSON I/O helpers for the command-line front end.

use gsm::Error as GsmError;
use nalgebra::DMatrix;
use std::io::Write;
use std::path::Path;

/// Reads a comma-separated numeric matrix. A single header row is
/// auto-detected by a non-numeric first line.
pub fn read_csv_matrix(path: &Path) -> Result<(DMatrix<f64>, bool), GsmError> {
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut had_header = false;
    for (line_idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(|c| c.trim()).collect();
        let parsed: Result<Vec<f64>, _> = cells.iter().map(|c| c.parse::<f64>()).collect();
        match parsed {
            Ok(vals) => {
                if let Some(first) = rows.first() {
                    if vals.len() != first.len() {
                        return Err(GsmError::DimensionMismatch(format!(
                            "line {} has {} fields, expected {}",
                            line_idx + 1,
                            vals.len(),
                            first.len()
                        )));
                    }
                }
                rows.push(vals);
            }
            Err(_) => {
                if rows.is_empty() && !had_header {
                    had_header = true;
                } else {
                    let bad = cells
                        .iter()
                        .position(|c| c.parse::<f64>().is_err())
                        .unwrap_or(0);
                    return Err(GsmError::DomainViolation {
                        row: line_idx,
                        col: bad,
                        detail: format!("cannot parse `{}` as a number", cells[bad]),
                    });
                }
            }
        }
    }
    if rows.is_empty() {
        return Err(GsmError::EmptyInput(format!("{}", path.display())));
    }
    let (n, m) = (rows.len(), rows[0].len());
    let mat = DMatrix::from_fn(n, m, |i, j| rows[i][j]);
    Ok((mat, had_header))
}

/// Writes a matrix as CSV with full round-trip precision.
pub fn write_csv_matrix(
    path: &Path,
    mat: &DMatrix<f64>,
    header: Option<&[String]>,
) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    if let Some(names) = header {
        writeln!(out, "{}", names.join(","))?;
    }
    for i in 0..mat.nrows() {
        let row: Vec<String> = (0..mat.ncols()).map(|j| format!("{}", mat[(i, j)])).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()
}

pub fn matrix_to_json(mat: &DMatrix<f64>) -> serde_json::Value {
    let rows: Vec<Vec<f64>> = (0..mat.nrows())
        .map(|i| (0..mat.ncols()).map(|j| mat[(i, j)]).collect())
        .collect();
    serde_json::json!(rows)
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()
}
