//! Two-column numeric input files.

use std::fmt;
use std::path::Path;

use tailrho::Sample;

#[derive(Debug, Clone, PartialEq)]
pub enum DataError {
    Io(String),
    /// A malformed line, 1-based.
    Line {
        line: usize,
        message: String,
    },
    TooFewRows {
        got: usize,
    },
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataError::Io(msg) => write!(f, "{msg}"),
            DataError::Line { line, message } => write!(f, "line {line}: {message}"),
            DataError::TooFewRows { got } => {
                write!(f, "need at least 2 observation rows, found {got}")
            }
        }
    }
}

impl std::error::Error for DataError {}

/// Parses one observation pair per line. Columns are separated by a comma
/// and/or whitespace; blank lines and lines starting with `#` are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(f64, f64)>, DataError> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| DataError::Line {
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(bad(format!("expected 2 columns, found {}", fields.len())));
        }
        let mut values = [0.0; 2];
        for (slot, field) in values.iter_mut().zip(&fields) {
            let x: f64 = field
                .parse()
                .map_err(|_| bad(format!("`{field}` is not a number")))?;
            if !x.is_finite() {
                return Err(bad(format!("`{field}` is not finite")));
            }
            *slot = x;
        }
        pairs.push((values[0], values[1]));
    }
    if pairs.len() < 2 {
        return Err(DataError::TooFewRows { got: pairs.len() });
    }
    Ok(pairs)
}

pub fn read_sample(path: &Path) -> Result<Sample, DataError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| DataError::Io(format!("cannot read {}: {e}", path.display())))?;
    let pairs = parse_pairs(&text)?;
    Sample::from_pairs(&pairs).map_err(|e| DataError::Io(e.to_string()))
}
