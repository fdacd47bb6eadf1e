//! Target matrix input: a file path or inline text, one row per line
//! (`;` also separates rows inline), entries whitespace-separated, each
//! entry an exact fraction `p/q` or a decimal literal. `#` starts a
//! comment line.

use std::fs;
use std::path::Path;

use sda_core::exactnum::parse_rat;
use sda_core::sda::TargetMatrix;

use crate::CliError;

/// A parsed target together with its canonical entry strings (fully
/// reduced, positive denominators) as echoed into reports.
pub struct ParsedMatrix {
    pub matrix: TargetMatrix,
    pub echo: Vec<Vec<String>>,
}

pub fn parse_matrix_text(text: &str) -> Result<ParsedMatrix, CliError> {
    let mut rows = Vec::new();
    let mut echo = Vec::new();
    for line in text.replace(';', "\n").lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        let mut row_echo = Vec::new();
        for token in line.split_whitespace() {
            let value = parse_rat(token).map_err(|e| CliError::parse(e.to_string()))?;
            row_echo.push(value.to_string());
            row.push(value);
        }
        rows.push(row);
        echo.push(row_echo);
    }
    if rows.is_empty() {
        return Err(CliError::parse("matrix input contains no entries".into()));
    }
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(CliError::parse("matrix rows have differing lengths".into()));
    }
    let matrix = TargetMatrix::new(rows).map_err(CliError::from)?;
    Ok(ParsedMatrix { matrix, echo })
}

/// Resolves the positional MATRIX argument: an existing file is read,
/// anything else is parsed as inline matrix text.
pub fn load_matrix(arg: &str) -> Result<ParsedMatrix, CliError> {
    if Path::new(arg).is_file() {
        let text = fs::read_to_string(arg)
            .map_err(|e| CliError::parse(format!("cannot read {arg}: {e}")))?;
        return parse_matrix_text(&text);
    }
    parse_matrix_text(arg).map_err(|e| {
        CliError::parse(format!(
            "matrix argument is neither an existing file nor inline matrix text: {}",
            e.message
        ))
    })
}
