//! Learning curves from epoch-indexed run records.

use std::path::Path;

use crate::curves::{Interpolation, PerformanceCurve};
use crate::error::{PeprError, Result};
use crate::io::runs::{read_runs, RunFormat};
use crate::resource::{ResourceKind, RunRecord};

fn cumulative(record: &RunRecord, kind: Option<ResourceKind>) -> Result<f64> {
    match kind {
        Some(kind) => record
            .resource(kind)
            .ok_or_else(|| PeprError::MissingResource {
                kind,
                model_id: record.model_id().to_string(),
            }),
        None => record.epoch().map(f64::from).ok_or_else(|| {
            PeprError::InvalidArgument(format!("record `{}` has no epoch", record.model_id()))
        }),
    }
}

/// Builds the performance curve of `model_id`.
///
/// The cumulative resource (or the epoch index when `kind` is `None`) is
/// min-max rescaled over every epoch-indexed record in `records`, so curves of
/// different models from one file share an axis. A `(0, p_first)` sample is
/// prepended when the earliest point does not sit at zero.
pub fn curve_from_records(
    records: &[RunRecord],
    model_id: &str,
    kind: Option<ResourceKind>,
) -> Result<PerformanceCurve> {
    let mut rows = Vec::new();
    for r in records.iter().filter(|r| r.model_id() == model_id) {
        let epoch = r.epoch().ok_or_else(|| {
            PeprError::InvalidArgument(format!("record `{model_id}` has no epoch"))
        })?;
        rows.push((epoch, cumulative(r, kind)?, r.performance()));
    }
    if rows.is_empty() {
        return Err(PeprError::InvalidArgument(format!(
            "no records for model `{model_id}`"
        )));
    }
    if rows.len() < 2 {
        return Err(PeprError::InvalidCurve(format!(
            "model `{model_id}` has {} epoch, need at least 2",
            rows.len()
        )));
    }
    rows.sort_by_key(|row| row.0);
    for pair in rows.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(PeprError::InvalidCurve(format!(
                "duplicate epoch {} for `{model_id}`",
                pair[0].0
            )));
        }
        if pair[1].1 <= pair[0].1 {
            return Err(PeprError::InvalidCurve(format!(
                "cumulative resource is not increasing for `{model_id}` between epochs {} and {}",
                pair[0].0, pair[1].0
            )));
        }
    }

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in records.iter().filter(|r| r.epoch().is_some()) {
        if let Ok(v) = cumulative(r, kind) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let span = hi - lo;
    let mut samples: Vec<(f64, f64)> = rows
        .iter()
        .map(|&(_, c, p)| (((c - lo) / span).clamp(0.0, 1.0), p))
        .collect();
    if samples[0].0 > 0.0 {
        samples.insert(0, (0.0, samples[0].1));
    }
    PerformanceCurve::new(samples, Interpolation::PiecewiseLinear)
}

/// Reads a run-record file and builds the curve of `model_id`.
pub fn ingest_curve(
    path: &Path,
    model_id: &str,
    kind: Option<ResourceKind>,
) -> Result<PerformanceCurve> {
    let text = std::fs::read_to_string(path)?;
    let records = read_runs(&text, RunFormat::from_path(path))?;
    curve_from_records(&records, model_id, kind)
}
