//! Input parsers for the fit subcommand: simple delimiter-separated text
//! with a required header row; every parse failure names its line number.

use std::path::Path;

use crate::error::{CliError, CliResult};

fn split_line(line: &str) -> Vec<&str> {
    // Comma preferred, whitespace accepted.
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

fn parse_rows(text: &str, path: &Path, columns: usize) -> CliResult<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !seen_header {
            // Header row is mandatory and must not parse as numbers.
            let fields = split_line(line);
            if fields.iter().all(|f| f.parse::<f64>().is_ok()) {
                return Err(CliError::Config(format!(
                    "{}:{line_no}: expected a header row before data",
                    path.display()
                )));
            }
            seen_header = true;
            continue;
        }
        let fields = split_line(line);
        if fields.len() != columns {
            return Err(CliError::Config(format!(
                "{}:{line_no}: expected {columns} columns, found {}",
                path.display(),
                fields.len()
            )));
        }
        let mut row = Vec::with_capacity(columns);
        for (col, field) in fields.iter().enumerate() {
            row.push(field.parse::<f64>().map_err(|_| {
                CliError::Config(format!(
                    "{}:{line_no}: column {} (\"{field}\") is not a number",
                    path.display(),
                    col + 1
                ))
            })?);
        }
        rows.push(row);
    }
    if !seen_header {
        return Err(CliError::Config(format!(
            "{}: missing header row",
            path.display()
        )));
    }
    if rows.is_empty() {
        return Err(CliError::Config(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    Ok(rows)
}

/// Measured correlation data: columns delta_t_ns, g12, sigma.
pub fn read_g12_data(path: &Path) -> CliResult<Vec<(f64, f64, f64)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    Ok(parse_rows(&text, path, 3)?
        .into_iter()
        .map(|r| (r[0], r[1], r[2]))
        .collect())
}

/// Theory curve: columns delta_t_ns, p12 (extra columns ignored are not
/// allowed; exactly two).
pub fn read_theory_curve(path: &Path) -> CliResult<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    Ok(parse_rows(&text, path, 2)?
        .into_iter()
        .map(|r| (r[0], r[1]))
        .collect())
}
