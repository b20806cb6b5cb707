//! File formats: run-record CSV/JSON, learning curves, bundled reference
//! tables, bound fitting, leaderboards, plot data and JSON reports.
//!
//! CSV files use commas, `.` as the decimal point, UTF-8, a mandatory header
//! row and LF line endings.

mod bundled;
mod curve;
mod emit;
mod fit;
mod runs;

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PeprError, Result};

pub use bundled::{
    bundled_csv, model_table, table2_block, table2_records, BundledDataset, ModelInfo, Table2Block,
    Table2Row,
};
pub use curve::{curve_from_records, ingest_curve};
pub use emit::{
    emit_leaderboard, isocline_csv, parse_leaderboard_json, scatter_csv, score_bars_csv,
    FrontierRow, Report,
};
pub use fit::{
    fit_inputs_from_records, fit_normalization_bounds, FitInput, FitResult, REPORTED_SCORE_COLUMN,
};
pub use runs::{
    ingest_runs, read_runs, write_runs, Experiments, RunFormat, COL_ARCH_CLASS, COL_DATASET_ID,
    COL_EFFICIENT, COL_EPOCH, COL_MODEL_ID, COL_PARAMS, COL_PERFORMANCE,
};

/// Output format for leaderboards and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Markdown,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = PeprError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(Format::Markdown),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(PeprError::InvalidArgument(format!(
                "unknown format `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Markdown => "markdown",
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Writes `contents` to a temporary file next to `path` and renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| PeprError::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, b"a\n").unwrap();
        write_atomic(&path, b"b\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "b\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn format_parsing() {
        assert_eq!("MD".parse::<Format>().unwrap(), Format::Markdown);
        assert!("xlsx".parse::<Format>().is_err());
    }
}
