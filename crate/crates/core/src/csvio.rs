//! CSV serialization shared by the library and the command-line front end.
//!
//! Every file carries one `#` comment line recording the full parameter set
//! and tool version, then a header row naming the columns. Floats are written
//! with 17 significant digits, which round-trips any f64 exactly.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Format with 17 significant digits (lossless f64 round trip).
pub fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Assemble a CSV document: a `# ...` comment, a header row, data rows.
pub fn to_csv_string(comment: &str, columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    writeln!(out, "# {comment}").unwrap();
    writeln!(out, "{}", columns.join(",")).unwrap();
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        writeln!(out, "{}", row.join(",")).unwrap();
    }
    out
}

/// Parsed CSV document: leading comments, header, and raw string cells.
pub struct CsvDoc {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn parse_csv(text: &str) -> Result<CsvDoc> {
    let mut comments = Vec::new();
    let mut columns = Vec::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.is_empty() {
            continue;
        }
        if let Some(stripped) = line.strip_prefix('#') {
            comments.push(stripped.trim().to_string());
        } else if columns.is_empty() {
            columns = line.split(',').map(|s| s.to_string()).collect();
        } else {
            let row: Vec<String> = line.split(',').map(|s| s.to_string()).collect();
            if row.len() != columns.len() {
                return Err(Error::InvalidConfig(format!(
                    "csv row has {} cells, header has {} columns",
                    row.len(),
                    columns.len()
                )));
            }
            rows.push(row);
        }
    }
    if columns.is_empty() {
        return Err(Error::InvalidConfig(
            "csv document has no header row".into(),
        ));
    }
    Ok(CsvDoc {
        comments,
        columns,
        rows,
    })
}

pub fn parse_f64(cell: &str) -> Result<f64> {
    cell.parse::<f64>()
        .map_err(|_| Error::InvalidConfig(format!("csv cell is not a number: {cell:?}")))
}
