//! Comma-separated result tables.

use std::io::Write;
use std::path::Path;

use tailrho::CellSummary;

use crate::format::{g6, g6_or_na};

pub const SWEEP_HEADER: &str =
    "theta,n,p,m,abs_bias_emp,abs_bias_bern,var_emp,var_bern,mse_emp,mse_bern";
pub const SIMULATE_HEADER: &str =
    "theta,n,p,m,abs_bias_emp,abs_bias_bern,var_emp,var_bern,mse_emp,mse_bern,mse_reduction_pct";

fn common_fields(c: &CellSummary) -> String {
    [
        g6(c.theta),
        c.n.to_string(),
        g6(c.p),
        c.m.to_string(),
        g6(c.abs_bias_emp()),
        g6(c.abs_bias_bern()),
        g6_or_na(c.var_emp()),
        g6_or_na(c.var_bern()),
        g6(c.mse_emp()),
        g6(c.mse_bern()),
    ]
    .join(",")
}

pub fn simulate_csv(cells: &[CellSummary]) -> String {
    let mut out = String::from(SIMULATE_HEADER);
    out.push('\n');
    for c in cells {
        out.push_str(&common_fields(c));
        out.push(',');
        out.push_str(&g6_or_na(c.mse_reduction_pct()));
        out.push('\n');
    }
    out
}

pub fn sweep_csv(cells: &[CellSummary]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for c in cells {
        out.push_str(&common_fields(c));
        out.push('\n');
    }
    out
}

/// Writes through a temporary file in the destination directory and renames
/// it into place, so readers never see a partial table.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// A parsed table row; `None` marks an `NA` field.
pub type Row = Vec<Option<f64>>;

/// Reads a table written by [`simulate_csv`] or [`sweep_csv`].
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Row>), String> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or("empty table")?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|f| match f {
                "NA" => Ok(None),
                _ => f
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| format!("line {}: bad field `{f}`", i + 2)),
            })
            .collect::<Result<Row, String>>()?;
        if row.len() != header.len() {
            return Err(format!("line {}: expected {} fields", i + 2, header.len()));
        }
        rows.push(row);
    }
    Ok((header, rows))
}
