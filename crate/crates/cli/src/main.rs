use std::collections::BTreeMap;
use std::fmt;
use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, ColorChoice, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use pepr_core::io::{BundledDataset, Format};
use pepr_core::{ResourceKind, ScoreParams, Strategy, Weights};

mod commands;

/// Performance-per-resource scoring for model benchmark results.
#[derive(Parser, Debug)]
#[command(name = "pepr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rank the models of one dataset by PePR score.
    Score(ScoreCmd),
    /// Average per-dataset scores into one leaderboard.
    Rank(RankCmd),
    /// Pareto frontier and knee point of (resource, performance) points.
    Pareto(ParetoCmd),
    /// PePR curve analysis of one model's learning curve.
    Curve(CurveCmd),
    /// Export the PePR score over the unit square as a CSV matrix.
    Isoclines(IsoclinesCmd),
    /// Welch or paired t-tests between model groups.
    Compare(CompareCmd),
    /// Recover energy normalization bounds from reported PePR-E scores.
    FitBounds(FitBoundsCmd),
    /// Leaderboard, frontier, group comparisons and fitted bounds in one document.
    Report(ReportCmd),
    /// List or export the bundled reference tables.
    Bundled(BundledCmd),
}

#[derive(Args, Debug)]
struct IoArgs {
    /// Run-record file (.csv or .json).
    #[arg(long)]
    input: PathBuf,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// markdown, csv or json.
    #[arg(long, default_value = "markdown", value_parser = parse_format)]
    format: Format,
}

#[derive(Args, Debug, Clone)]
struct ScoringArgs {
    /// energy, carbon, memory, time, data or params [default: energy]
    #[arg(long, value_parser = parse_kind)]
    resource: Option<ResourceKind>,
    /// Resource-cost scaling; larger values favour performance.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Weighted multi-resource score, e.g. `energy=0.5,memory=0.5`.
    #[arg(long, value_parser = parse_weights)]
    weights: Option<Weights>,
    /// Normalization of absolute costs.
    #[arg(long, value_enum, default_value_t = StrategyArg::Minmax)]
    strategy: StrategyArg,
    /// `lo,hi` in resource units for `fixed`, percentiles for `clamp` (default 1,99).
    #[arg(long, value_parser = parse_bounds)]
    bounds: Option<(f64, f64)>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum StrategyArg {
    Minmax,
    Fixed,
    Clamp,
}

#[derive(Args, Debug)]
struct ScoreCmd {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    scoring: ScoringArgs,
    /// Dataset to score when the file holds several.
    #[arg(long)]
    dataset: Option<String>,
    /// Keep only the first N rows.
    #[arg(long)]
    top: Option<usize>,
}

#[derive(Args, Debug)]
struct RankCmd {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    scoring: ScoringArgs,
}

#[derive(Args, Debug)]
struct ParetoCmd {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    scoring: ScoringArgs,
    #[arg(long)]
    dataset: Option<String>,
}

#[derive(Args, Debug)]
struct CurveCmd {
    #[command(flatten)]
    io: IoArgs,
    /// Model whose epochs form the curve.
    #[arg(long)]
    model: String,
    #[arg(long)]
    dataset: Option<String>,
    /// Cumulative resource column; the epoch index when omitted.
    #[arg(long, value_parser = parse_kind)]
    resource: Option<ResourceKind>,
    /// Evaluation grid points.
    #[arg(long, default_value_t = 1001)]
    grid: usize,
}

#[derive(Args, Debug)]
struct IsoclinesCmd {
    #[arg(long)]
    output: Option<PathBuf>,
    /// Only csv is supported.
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: Format,
    /// Points per axis.
    #[arg(long, default_value_t = 1001)]
    grid: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum GroupBy {
    /// Below or above the median parameter count.
    Size,
    /// CNN or other architectures.
    Arch,
    /// Efficiency-oriented designs or not.
    Efficient,
    /// Two datasets, pairable by model.
    Dataset,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Metric {
    Score,
    Performance,
}

#[derive(Args, Debug)]
struct CompareCmd {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    scoring: ScoringArgs,
    /// Grouping; size, arch and efficient are all run when omitted.
    #[arg(long, value_enum)]
    group_by: Option<GroupBy>,
    #[arg(long, value_enum, default_value_t = Metric::Score)]
    metric: Metric,
    /// Restrict to one dataset (not with --group-by dataset).
    #[arg(long)]
    dataset: Option<String>,
    /// The two datasets to compare with --group-by dataset.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    datasets: Option<Vec<String>>,
    /// Paired t-test over models present in both groups.
    #[arg(long)]
    paired: bool,
}

#[derive(Args, Debug)]
struct FitBoundsCmd {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long)]
    dataset: Option<String>,
}

#[derive(Args, Debug)]
struct ReportCmd {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    scoring: ScoringArgs,
    #[arg(long)]
    dataset: Option<String>,
}

#[derive(Args, Debug)]
struct BundledCmd {
    /// Table to export; lists the tables when omitted.
    #[arg(value_parser = parse_bundled)]
    name: Option<BundledDataset>,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: pepr_core::PeprError| e.to_string())
}

fn parse_kind(s: &str) -> Result<ResourceKind, String> {
    s.parse().map_err(|e: pepr_core::PeprError| e.to_string())
}

fn parse_bundled(s: &str) -> Result<BundledDataset, String> {
    s.parse().map_err(|e: pepr_core::PeprError| e.to_string())
}

fn parse_weights(s: &str) -> Result<Weights, String> {
    let mut map = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| format!("`{part}` is not of the form kind=weight"))?;
        let kind = parse_kind(k.trim())?;
        let w: f64 = v
            .trim()
            .parse()
            .map_err(|_| format!("`{v}` is not a number"))?;
        if map.insert(kind, w).is_some() {
            return Err(format!("`{kind}` is weighted twice"));
        }
    }
    Weights::new(map).map_err(|e| e.to_string())
}

fn parse_bounds(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("`{s}` is not of the form lo,hi"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{v}` is not a number"))
    };
    Ok((parse(lo)?, parse(hi)?))
}

/// Invalid flag combinations; reported with exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Validated scoring flags.
pub struct Scoring {
    pub kind: ResourceKind,
    pub params: ScoreParams,
    pub strategy: Strategy,
}

impl ScoringArgs {
    fn resolve(&self) -> anyhow::Result<Scoring> {
        if self.weights.is_some() && self.resource.is_some() {
            return Err(config_error(
                "--weights and --resource are mutually exclusive",
            ));
        }
        if self.weights.is_some() && self.alpha != 1.0 {
            return Err(config_error(
                "--alpha applies to single-resource scores only",
            ));
        }
        let params = ScoreParams::new(self.alpha, self.weights.clone())
            .map_err(|e| config_error(e.to_string()))?;
        let strategy = match (self.strategy, self.bounds) {
            (StrategyArg::Minmax, None) => Strategy::MinMaxOverSet,
            (StrategyArg::Minmax, Some(_)) => {
                return Err(config_error("--bounds needs --strategy fixed or clamp"));
            }
            (StrategyArg::Fixed, Some((lo, hi))) => Strategy::FixedBounds { lo, hi },
            (StrategyArg::Fixed, None) => {
                return Err(config_error("--strategy fixed needs --bounds lo,hi"))
            }
            (StrategyArg::Clamp, bounds) => {
                let (lo_pct, hi_pct) = bounds.unwrap_or((1.0, 99.0));
                Strategy::PercentileClamped { lo_pct, hi_pct }
            }
        };
        Ok(Scoring {
            kind: self.resource.unwrap_or(ResourceKind::Energy),
            params,
            strategy,
        })
    }
}

fn use_color() -> bool {
    std::env::var_os("PEPR_NO_COLOR").is_none()
}

fn main() -> ExitCode {
    let color = use_color();
    let command = Cli::command().color(if color {
        ColorChoice::Auto
    } else {
        ColorChoice::Never
    });
    let cli = match command
        .try_get_matches()
        .and_then(|m| Cli::from_arg_matches(&m))
    {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let prefix = if color && std::io::stderr().is_terminal() {
                "\x1b[1;31merror:\x1b[0m"
            } else {
                "error:"
            };
            eprintln!("{prefix} {err:#}");
            if err.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
