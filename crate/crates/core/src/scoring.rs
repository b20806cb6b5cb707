//! The PePR score family and leaderboards.
//!
//! `pepr(R, P) = P / (1 + R)` with both arguments in `[0, 1]`. The α-scaled
//! form `α·P / (α + R)` (α ≥ 1) moves weight back towards performance, and the
//! weighted form `P / (1 + Σ wᵢ·Rᵢ)` with convex weights combines several
//! resource kinds. α is only defined for the single-resource path.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{PeprError, Result};
use crate::resource::{ExperimentSet, ResourceKind};

/// Tolerance on `Σ wᵢ = 1`.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(PeprError::NonFinite(name));
    }
    if !(0.0..=1.0).contains(&value) {
        return Err(PeprError::OutOfUnitRange { name, value });
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_nan() || alpha < 1.0 {
        return Err(PeprError::InvalidAlpha(alpha));
    }
    Ok(())
}

/// `P / (1 + R)`.
pub fn pepr(r: f64, p: f64) -> Result<f64> {
    check_unit("R", r)?;
    check_unit("P", p)?;
    Ok(p / (1.0 + r))
}

/// `α·P / (α + R)`; identical to [`pepr`] at `α = 1`.
pub fn pepr_alpha(r: f64, p: f64, alpha: f64) -> Result<f64> {
    check_unit("R", r)?;
    check_unit("P", p)?;
    check_alpha(alpha)?;
    if alpha == 1.0 {
        return Ok(p / (1.0 + r));
    }
    if alpha.is_infinite() {
        return Ok(p);
    }
    Ok(alpha * p / (alpha + r))
}

/// Non-negative per-kind weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "BTreeMap<ResourceKind, f64>",
    into = "BTreeMap<ResourceKind, f64>"
)]
pub struct Weights(BTreeMap<ResourceKind, f64>);

impl Weights {
    pub fn new(weights: BTreeMap<ResourceKind, f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(PeprError::InvalidWeights("no weights given".into()));
        }
        for (kind, &w) in &weights {
            if !w.is_finite() || w < 0.0 {
                return Err(PeprError::InvalidWeights(format!(
                    "weight for {kind} must be finite and >= 0, got {w}"
                )));
            }
        }
        let sum: f64 = weights.values().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(PeprError::InvalidWeights(format!(
                "weights must sum to 1, got {sum}"
            )));
        }
        Ok(Self(weights))
    }

    pub fn single(kind: ResourceKind) -> Self {
        Self(BTreeMap::from([(kind, 1.0)]))
    }

    pub fn iter(&self) -> impl Iterator<Item = (ResourceKind, f64)> + '_ {
        self.0.iter().map(|(&k, &w)| (k, w))
    }

    pub fn kinds(&self) -> impl Iterator<Item = ResourceKind> + '_ {
        self.0.keys().copied()
    }
}

impl TryFrom<BTreeMap<ResourceKind, f64>> for Weights {
    type Error = PeprError;

    fn try_from(value: BTreeMap<ResourceKind, f64>) -> Result<Self> {
        Weights::new(value)
    }
}

impl From<Weights> for BTreeMap<ResourceKind, f64> {
    fn from(value: Weights) -> Self {
        value.0
    }
}

/// `Σ wᵢ·Rᵢ` over the weighted kinds.
pub fn weighted_resource(
    normalized: &BTreeMap<ResourceKind, f64>,
    weights: &Weights,
) -> Result<f64> {
    let mut total = 0.0;
    for (kind, w) in weights.iter() {
        let r = *normalized
            .get(&kind)
            .ok_or_else(|| PeprError::MissingResource {
                kind,
                model_id: String::from("<weighted input>"),
            })?;
        check_unit("R", r)?;
        total += w * r;
    }
    Ok(total)
}

/// `P / (1 + Σ wᵢ·Rᵢ)`.
pub fn pepr_weighted(
    normalized: &BTreeMap<ResourceKind, f64>,
    p: f64,
    weights: &Weights,
) -> Result<f64> {
    check_unit("P", p)?;
    let r = weighted_resource(normalized, weights)?;
    Ok(p / (1.0 + r))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreParams {
    alpha: f64,
    weights: Option<Weights>,
}

impl Default for ScoreParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            weights: None,
        }
    }
}

impl ScoreParams {
    pub fn new(alpha: f64, weights: Option<Weights>) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self { alpha, weights })
    }

    pub fn alpha(alpha: f64) -> Result<Self> {
        Self::new(alpha, None)
    }

    pub fn weighted(weights: Weights) -> Self {
        Self {
            alpha: 1.0,
            weights: Some(weights),
        }
    }

    pub fn alpha_value(&self) -> f64 {
        self.alpha
    }

    pub fn weights(&self) -> Option<&Weights> {
        self.weights.as_ref()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "resource", rename_all = "snake_case")]
pub enum ScoreVariant {
    Single(ResourceKind),
    Weighted,
}

impl fmt::Display for ScoreVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreVariant::Single(kind) => f.write_str(kind.score_label()),
            ScoreVariant::Weighted => f.write_str("PePR-W"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeprScore {
    pub value: f64,
    pub performance: f64,
    pub normalized_resource: f64,
    pub variant: ScoreVariant,
    pub params: ScoreParams,
    /// Set when an input cost fell outside the normalization bounds.
    #[serde(default)]
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub model_id: String,
    pub dataset_id: String,
    pub performance: f64,
    pub efficient: bool,
    pub params_millions: Option<f64>,
    pub resources: BTreeMap<ResourceKind, f64>,
    pub score: PeprScore,
}

/// Entries sorted by descending score; ties go to the lower normalized
/// resource, then to the lexicographically smaller model id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    entries: Vec<LeaderboardEntry>,
}

fn rank_order(a: &LeaderboardEntry, b: &LeaderboardEntry) -> Ordering {
    b.score
        .value
        .total_cmp(&a.score.value)
        .then_with(|| {
            a.score
                .normalized_resource
                .total_cmp(&b.score.normalized_resource)
        })
        .then_with(|| a.model_id.cmp(&b.model_id))
}

impl Leaderboard {
    pub fn from_entries(mut entries: Vec<LeaderboardEntry>) -> Self {
        entries.sort_by(rank_order);
        Self { entries }
    }

    pub fn entries(&self) -> &[LeaderboardEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn top(&self, n: usize) -> Leaderboard {
        Leaderboard {
            entries: self.entries.iter().take(n).cloned().collect(),
        }
    }

    pub fn model_ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.model_id.as_str()).collect()
    }
}

fn entry_for(record: &crate::resource::RunRecord, score: PeprScore) -> LeaderboardEntry {
    let mut resources = record.resources().clone();
    if let Some(p) = record.tags().params_millions {
        resources.insert(ResourceKind::Params, p);
    }
    LeaderboardEntry {
        model_id: record.model_id().to_string(),
        dataset_id: record.dataset_id().to_string(),
        performance: record.performance(),
        efficient: record.tags().efficient,
        params_millions: record.tags().params_millions,
        resources,
        score,
    }
}

/// Scores every record of `set` on one resource kind.
pub fn score_experiment(
    set: &ExperimentSet,
    kind: ResourceKind,
    params: &ScoreParams,
) -> Result<Leaderboard> {
    if set.is_empty() {
        return Err(PeprError::NoRecords);
    }
    if params.weights.is_some() {
        return Err(PeprError::InvalidArgument(
            "weights given for single-resource scoring; use score_experiment_weighted".into(),
        ));
    }
    set.context(kind)?;
    let entries = set
        .records()
        .iter()
        .map(|record| {
            let n = set.normalized(record, kind)?;
            let value = pepr_alpha(n.value, record.performance(), params.alpha)?;
            Ok(entry_for(
                record,
                PeprScore {
                    value,
                    performance: record.performance(),
                    normalized_resource: n.value,
                    variant: ScoreVariant::Single(kind),
                    params: params.clone(),
                    clamped: n.clamped,
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Leaderboard::from_entries(entries))
}

/// Scores every record of `set` with the weighted multi-resource form.
pub fn score_experiment_weighted(set: &ExperimentSet, params: &ScoreParams) -> Result<Leaderboard> {
    if set.is_empty() {
        return Err(PeprError::NoRecords);
    }
    let weights = params
        .weights
        .as_ref()
        .ok_or_else(|| PeprError::InvalidWeights("no weights given".into()))?;
    if params.alpha != 1.0 {
        return Err(PeprError::InvalidArgument(
            "alpha is only defined for single-resource scores".into(),
        ));
    }
    for kind in weights.kinds() {
        set.context(kind)?;
    }
    let entries = set
        .records()
        .iter()
        .map(|record| {
            let mut normalized = BTreeMap::new();
            let mut clamped = false;
            for kind in weights.kinds() {
                let n = set.normalized(record, kind)?;
                clamped |= n.clamped;
                normalized.insert(kind, n.value);
            }
            let r = weighted_resource(&normalized, weights)?;
            let value = pepr_weighted(&normalized, record.performance(), weights)?;
            Ok(entry_for(
                record,
                PeprScore {
                    value,
                    performance: record.performance(),
                    normalized_resource: r,
                    variant: ScoreVariant::Weighted,
                    params: params.clone(),
                    clamped,
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Leaderboard::from_entries(entries))
}

/// Dispatches to the single-kind or weighted path depending on `params`.
pub fn score(set: &ExperimentSet, kind: ResourceKind, params: &ScoreParams) -> Result<Leaderboard> {
    if params.weights.is_some() {
        score_experiment_weighted(set, params)
    } else {
        score_experiment(set, kind, params)
    }
}

/// A model's scores averaged over the datasets it appears in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateEntry {
    pub model_id: String,
    pub datasets: usize,
    pub mean_performance: f64,
    pub mean_score: f64,
}

/// Arithmetic mean of per-dataset scores, sorted descending by mean score
/// (ties by model id).
pub fn aggregate(boards: &[Leaderboard]) -> Vec<AggregateEntry> {
    let mut acc: BTreeMap<&str, (usize, f64, f64)> = BTreeMap::new();
    for entry in boards.iter().flat_map(|b| b.entries()) {
        let slot = acc.entry(entry.model_id.as_str()).or_default();
        slot.0 += 1;
        slot.1 += entry.performance;
        slot.2 += entry.score.value;
    }
    let mut out: Vec<AggregateEntry> = acc
        .into_iter()
        .map(|(model, (n, p, s))| AggregateEntry {
            model_id: model.to_string(),
            datasets: n,
            mean_performance: p / n as f64,
            mean_score: s / n as f64,
        })
        .collect();
    out.sort_by(|a, b| {
        b.mean_score
            .total_cmp(&a.mean_score)
            .then_with(|| a.model_id.cmp(&b.model_id))
    });
    out
}
