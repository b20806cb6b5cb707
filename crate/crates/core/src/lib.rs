//! Performance-per-resource (PePR) scoring for model benchmark results.
//!
//! The crate is organised around a handful of small, pure modules:
//!
//! - [`resource`]: run records, resource kinds and normalization of absolute
//!   costs into `[0, 1]`.
//! - [`scoring`]: the PePR score family and leaderboards.
//! - [`curves`]: performance curves, the PePR curve and its maximum,
//!   diminishing-returns analysis and isocline grids.
//! - [`frontier`]: Pareto frontiers over `(resource, performance)` points and
//!   the PePR knee point.
//! - [`stats`]: median splits and two-sample t-tests.
//! - [`io`]: CSV/JSON ingestion, bundled reference tables, bound fitting and
//!   report emission.

pub mod curves;
pub mod error;
pub mod frontier;
pub mod io;
pub mod resource;
pub mod scoring;
pub mod stats;

pub use curves::{CurveFamily, CurveScore, Interpolation, IsoclineGrid, PerformanceCurve};
pub use error::{PeprError, Result};
pub use frontier::{ParetoFront, TradeoffPoint};
pub use resource::{
    ArchClass, ExperimentSet, NormalizationContext, Normalized, ResourceKind, RunRecord, RunTags,
    Strategy,
};
pub use scoring::{Leaderboard, LeaderboardEntry, PeprScore, ScoreParams, ScoreVariant, Weights};
pub use stats::{GroupComparison, MedianSplit};
