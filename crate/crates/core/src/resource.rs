//! Run records and normalization of absolute resource costs.
//!
//! A resource cost is mapped into `[0, 1]` with
//! `R = (R_abs - r_min) / (r_max - r_min)`, where the bounds are held fixed
//! across every model of one experiment. When `r_min == r_max` (a single
//! model, or identical costs) the normalized cost is `0`.
//!
//! Percentile bounds use linear interpolation between order statistics: for
//! `n` sorted values and percentile `q`, the rank is `q / 100 * (n - 1)` and
//! the result interpolates between the two neighbouring values. This is the
//! same convention as NumPy's default `percentile`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PeprError, Result};

/// The resource dimension a cost is measured in. Units are fixed per kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceKind {
    /// Watt-hours.
    Energy,
    /// Kilograms of CO2-equivalent.
    Carbon,
    /// Gigabytes.
    Memory,
    /// Seconds.
    Time,
    /// Unitless fraction of the training data in `[0, 1]`.
    DataFraction,
    /// Millions of trainable parameters.
    Params,
}

impl ResourceKind {
    pub const ALL: [ResourceKind; 6] = [
        ResourceKind::Energy,
        ResourceKind::Carbon,
        ResourceKind::Memory,
        ResourceKind::Time,
        ResourceKind::DataFraction,
        ResourceKind::Params,
    ];

    pub fn unit(self) -> &'static str {
        match self {
            ResourceKind::Energy => "Wh",
            ResourceKind::Carbon => "kgCO2eq",
            ResourceKind::Memory => "GB",
            ResourceKind::Time => "s",
            ResourceKind::DataFraction => "fraction",
            ResourceKind::Params => "M",
        }
    }

    /// Column name in the run-record file schema.
    pub fn column(self) -> &'static str {
        match self {
            ResourceKind::Energy => "energy_wh",
            ResourceKind::Carbon => "carbon_kg",
            ResourceKind::Memory => "memory_gb",
            ResourceKind::Time => "time_s",
            ResourceKind::DataFraction => "data_fraction",
            ResourceKind::Params => "params_millions",
        }
    }

    /// Short name used on the command line.
    pub fn cli_name(self) -> &'static str {
        match self {
            ResourceKind::Energy => "energy",
            ResourceKind::Carbon => "carbon",
            ResourceKind::Memory => "memory",
            ResourceKind::Time => "time",
            ResourceKind::DataFraction => "data",
            ResourceKind::Params => "params",
        }
    }

    /// Score label, e.g. `PePR-E` for energy.
    pub fn score_label(self) -> &'static str {
        match self {
            ResourceKind::Energy => "PePR-E",
            ResourceKind::Carbon => "PePR-C",
            ResourceKind::Memory => "PePR-M",
            ResourceKind::Time => "PePR-T",
            ResourceKind::DataFraction => "PePR-D",
            ResourceKind::Params => "PePR-P",
        }
    }
}

impl fmt::Display for ResourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.cli_name())
    }
}

impl FromStr for ResourceKind {
    type Err = PeprError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        ResourceKind::ALL
            .into_iter()
            .find(|k| k.cli_name() == s || k.column() == s)
            .ok_or_else(|| PeprError::InvalidArgument(format!("unknown resource kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ArchClass {
    #[serde(rename = "CNN")]
    Cnn,
    Other,
}

impl fmt::Display for ArchClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArchClass::Cnn => "CNN",
            ArchClass::Other => "Other",
        })
    }
}

impl FromStr for ArchClass {
    type Err = PeprError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cnn" => Ok(ArchClass::Cnn),
            "other" => Ok(ArchClass::Other),
            other => Err(PeprError::InvalidArgument(format!(
                "arch_class must be CNN or Other, got `{other}`"
            ))),
        }
    }
}

/// Metadata carried alongside a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTags {
    pub arch_class: ArchClass,
    pub efficient: bool,
    pub params_millions: Option<f64>,
}

impl RunTags {
    pub fn new(arch_class: ArchClass, efficient: bool, params_millions: Option<f64>) -> Self {
        Self {
            arch_class,
            efficient,
            params_millions,
        }
    }
}

/// One `(model, dataset)` benchmark observation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    model_id: String,
    dataset_id: String,
    performance: f64,
    resources: BTreeMap<ResourceKind, f64>,
    tags: RunTags,
    epoch: Option<u32>,
    extra: BTreeMap<String, String>,
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(PeprError::NonFinite(name));
    }
    if !(0.0..=1.0).contains(&value) {
        return Err(PeprError::OutOfUnitRange { name, value });
    }
    Ok(())
}

impl RunRecord {
    pub fn new(
        model_id: impl Into<String>,
        dataset_id: impl Into<String>,
        performance: f64,
        tags: RunTags,
    ) -> Result<Self> {
        let model_id = model_id.into();
        let dataset_id = dataset_id.into();
        if model_id.trim().is_empty() {
            return Err(PeprError::InvalidArgument("model_id is empty".into()));
        }
        if dataset_id.trim().is_empty() {
            return Err(PeprError::InvalidArgument("dataset_id is empty".into()));
        }
        check_unit("performance", performance)?;
        if let Some(params) = tags.params_millions {
            if !params.is_finite() || params < 0.0 {
                return Err(PeprError::InvalidArgument(format!(
                    "params_millions must be finite and >= 0, got {params}"
                )));
            }
        }
        Ok(Self {
            model_id,
            dataset_id,
            performance,
            resources: BTreeMap::new(),
            tags,
            epoch: None,
            extra: BTreeMap::new(),
        })
    }

    /// Attaches an absolute resource cost. Parameter counts live in the tags,
    /// so `ResourceKind::Params` is rejected here.
    pub fn with_resource(mut self, kind: ResourceKind, value: f64) -> Result<Self> {
        if kind == ResourceKind::Params {
            return Err(PeprError::InvalidArgument(
                "parameter counts are set through RunTags::params_millions".into(),
            ));
        }
        if !value.is_finite() {
            return Err(PeprError::NonFinite("resource value"));
        }
        if value < 0.0 {
            return Err(PeprError::InvalidArgument(format!(
                "resource {kind} must be >= 0, got {value}"
            )));
        }
        if kind == ResourceKind::DataFraction && value > 1.0 {
            return Err(PeprError::OutOfUnitRange {
                name: "data_fraction",
                value,
            });
        }
        self.resources.insert(kind, value);
        Ok(self)
    }

    pub fn with_epoch(mut self, epoch: u32) -> Self {
        self.epoch = Some(epoch);
        self
    }

    /// Attaches a column the schema does not know about.
    pub fn with_extra(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.extra.insert(key.into(), value.into());
        self
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn dataset_id(&self) -> &str {
        &self.dataset_id
    }

    pub fn performance(&self) -> f64 {
        self.performance
    }

    pub fn tags(&self) -> &RunTags {
        &self.tags
    }

    pub fn epoch(&self) -> Option<u32> {
        self.epoch
    }

    pub fn extra(&self) -> &BTreeMap<String, String> {
        &self.extra
    }

    /// Absolute cost for `kind`; `Params` reads the parameter-count tag.
    pub fn resource(&self, kind: ResourceKind) -> Option<f64> {
        match kind {
            ResourceKind::Params => self.tags.params_millions,
            _ => self.resources.get(&kind).copied(),
        }
    }

    /// Resource costs stored on the record (excluding the parameter tag).
    pub fn resources(&self) -> &BTreeMap<ResourceKind, f64> {
        &self.resources
    }

    /// Every kind the record can be scored on.
    pub fn available_kinds(&self) -> impl Iterator<Item = ResourceKind> + '_ {
        ResourceKind::ALL
            .into_iter()
            .filter(|&k| self.resource(k).is_some())
    }

    fn require(&self, kind: ResourceKind) -> Result<f64> {
        self.resource(kind)
            .ok_or_else(|| PeprError::MissingResource {
                kind,
                model_id: self.model_id.clone(),
            })
    }
}

/// How normalization bounds are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Strategy {
    /// Bounds are the extremes of the experiment set.
    MinMaxOverSet,
    /// Bounds supplied by the caller and stored verbatim.
    FixedBounds { lo: f64, hi: f64 },
    /// Bounds are the `lo_pct`/`hi_pct` empirical percentiles of the set.
    PercentileClamped { lo_pct: f64, hi_pct: f64 },
}

/// A normalized cost together with whether it had to be clamped into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalized {
    pub value: f64,
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationContext {
    kind: ResourceKind,
    r_min: f64,
    r_max: f64,
    strategy: Strategy,
}

impl NormalizationContext {
    /// Caller-supplied bounds, i.e. `build_context` with `FixedBounds`
    /// without needing any records.
    pub fn fixed(kind: ResourceKind, lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(PeprError::NonFinite("normalization bound"));
        }
        if lo > hi {
            return Err(PeprError::InvalidBounds { lo, hi });
        }
        Ok(Self {
            kind,
            r_min: lo,
            r_max: hi,
            strategy: Strategy::FixedBounds { lo, hi },
        })
    }

    pub fn kind(&self) -> ResourceKind {
        self.kind
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn normalize(&self, r_abs: f64) -> Result<Normalized> {
        normalize(r_abs, self)
    }
}

/// Builds normalization bounds for `kind` from `records`.
pub fn build_context(
    records: &[RunRecord],
    kind: ResourceKind,
    strategy: Strategy,
) -> Result<NormalizationContext> {
    if records.is_empty() {
        return Err(PeprError::Empty("records"));
    }
    let mut values = records
        .iter()
        .map(|r| r.require(kind))
        .collect::<Result<Vec<_>>>()?;

    let (r_min, r_max) = match strategy {
        Strategy::MinMaxOverSet => values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            }),
        Strategy::FixedBounds { lo, hi } => return NormalizationContext::fixed(kind, lo, hi),
        Strategy::PercentileClamped { lo_pct, hi_pct } => {
            if !(0.0..=100.0).contains(&lo_pct) || !(0.0..=100.0).contains(&hi_pct) {
                return Err(PeprError::InvalidArgument(format!(
                    "percentiles must lie in [0, 100], got ({lo_pct}, {hi_pct})"
                )));
            }
            if lo_pct > hi_pct {
                return Err(PeprError::InvalidBounds {
                    lo: lo_pct,
                    hi: hi_pct,
                });
            }
            values.sort_by(f64::total_cmp);
            (
                percentile_sorted(&values, lo_pct),
                percentile_sorted(&values, hi_pct),
            )
        }
    };
    Ok(NormalizationContext {
        kind,
        r_min,
        r_max,
        strategy,
    })
}

/// Linear-interpolated percentile of already sorted, non-empty `values`.
pub(crate) fn percentile_sorted(values: &[f64], pct: f64) -> f64 {
    debug_assert!(!values.is_empty());
    let rank = pct / 100.0 * (values.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    values[lo] + (values[hi] - values[lo]) * frac
}

/// Maps an absolute cost into `[0, 1]`, clamping (and flagging) values that
/// fall outside the context bounds.
pub fn normalize(r_abs: f64, ctx: &NormalizationContext) -> Result<Normalized> {
    if !r_abs.is_finite() {
        return Err(PeprError::NonFinite("r_abs"));
    }
    if ctx.r_min == ctx.r_max {
        return Ok(Normalized {
            value: 0.0,
            clamped: r_abs != ctx.r_min,
        });
    }
    let raw = (r_abs - ctx.r_min) / (ctx.r_max - ctx.r_min);
    let value = raw.clamp(0.0, 1.0);
    Ok(Normalized {
        value,
        clamped: value != raw,
    })
}

/// Records of one experiment plus the normalization bounds they are scored
/// against.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSet {
    records: Vec<RunRecord>,
    contexts: BTreeMap<ResourceKind, NormalizationContext>,
}

impl ExperimentSet {
    /// Builds min-max contexts for every kind that all records carry.
    pub fn new(records: Vec<RunRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(PeprError::NoRecords);
        }
        let mut contexts = BTreeMap::new();
        for kind in ResourceKind::ALL {
            if records.iter().all(|r| r.resource(kind).is_some()) {
                contexts.insert(
                    kind,
                    build_context(&records, kind, Strategy::MinMaxOverSet)?,
                );
            }
        }
        Ok(Self { records, contexts })
    }

    /// Replaces the context for `ctx.kind()`, validating it against the set.
    pub fn with_context(mut self, ctx: NormalizationContext) -> Result<Self> {
        let kind = ctx.kind();
        for r in &self.records {
            r.require(kind)?;
        }
        if ctx.strategy() == Strategy::MinMaxOverSet {
            let expected = build_context(&self.records, kind, Strategy::MinMaxOverSet)?;
            if expected != ctx {
                return Err(PeprError::InvalidArgument(format!(
                    "min-max context for {kind} does not match the set extremes"
                )));
            }
        }
        self.contexts.insert(kind, ctx);
        Ok(self)
    }

    /// Rebuilds the context for `kind` from this set with `strategy`.
    pub fn with_strategy(self, kind: ResourceKind, strategy: Strategy) -> Result<Self> {
        let ctx = build_context(&self.records, kind, strategy)?;
        self.with_context(ctx)
    }

    pub fn records(&self) -> &[RunRecord] {
        &self.records
    }

    pub fn contexts(&self) -> &BTreeMap<ResourceKind, NormalizationContext> {
        &self.contexts
    }

    pub fn context(&self, kind: ResourceKind) -> Result<&NormalizationContext> {
        self.contexts
            .get(&kind)
            .ok_or(PeprError::MissingContext(kind))
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Normalized cost of `record` for `kind` under this set's context.
    pub fn normalized(&self, record: &RunRecord, kind: ResourceKind) -> Result<Normalized> {
        let ctx = self.context(kind)?;
        normalize(record.require(kind)?, ctx)
    }
}
