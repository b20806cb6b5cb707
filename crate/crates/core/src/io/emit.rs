//! Leaderboard tables, plot data and JSON reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::curves::IsoclineGrid;
use crate::error::{PeprError, Result};
use crate::frontier::{pareto_front, ParetoFront, TradeoffPoint};
use crate::io::fit::FitResult;
use crate::io::Format;
use crate::resource::ResourceKind;
use crate::scoring::{Leaderboard, LeaderboardEntry, ScoreParams};
use crate::stats::GroupComparison;

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| PeprError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[derive(Clone, Copy, PartialEq)]
enum Best {
    Min,
    Max,
}

struct Column {
    header: String,
    best: Best,
    values: Vec<Option<f64>>,
    decimals: usize,
}

impl Column {
    fn cells(&self) -> Vec<String> {
        let finite = self.values.iter().flatten().copied();
        let target = match self.best {
            Best::Min => finite.fold(None, |acc: Option<f64>, v| {
                Some(acc.map_or(v, |a| a.min(v)))
            }),
            Best::Max => finite.fold(None, |acc: Option<f64>, v| {
                Some(acc.map_or(v, |a| a.max(v)))
            }),
        };
        self.values
            .iter()
            .map(|v| match v {
                None => "-".to_string(),
                Some(x) => {
                    let text = format!("{x:.prec$}", prec = self.decimals);
                    let best =
                        target.is_some_and(|t| format!("{t:.prec$}", prec = self.decimals) == text);
                    if best {
                        format!("**{text}**")
                    } else {
                        text
                    }
                }
            })
            .collect()
    }
}

fn markdown(board: &Leaderboard) -> String {
    let entries = board.entries();
    let label = entries[0].score.variant.to_string();
    let res = |k: ResourceKind| {
        entries
            .iter()
            .map(|e| e.resources.get(&k).copied())
            .collect::<Vec<_>>()
    };
    let columns = [
        Column {
            header: "|W| (M)".into(),
            best: Best::Min,
            values: entries.iter().map(|e| e.params_millions).collect(),
            decimals: 1,
        },
        Column {
            header: "M (GB)".into(),
            best: Best::Min,
            values: res(ResourceKind::Memory),
            decimals: 1,
        },
        Column {
            header: "E (Wh)".into(),
            best: Best::Min,
            values: res(ResourceKind::Energy),
            decimals: 1,
        },
        Column {
            header: "T (s)".into(),
            best: Best::Min,
            values: res(ResourceKind::Time),
            decimals: 1,
        },
        Column {
            header: "Test P".into(),
            best: Best::Max,
            values: entries.iter().map(|e| Some(e.performance)).collect(),
            decimals: 4,
        },
        Column {
            header: label,
            best: Best::Max,
            values: entries.iter().map(|e| Some(e.score.value)).collect(),
            decimals: 4,
        },
    ];
    let cells: Vec<Vec<String>> = columns.iter().map(Column::cells).collect();

    let mut out = String::new();
    out.push_str("| Model | Efficient |");
    for c in &columns {
        let _ = write!(out, " {} |", c.header.replace('|', "\\|"));
    }
    out.push_str("\n|---|:-:|");
    for _ in &columns {
        out.push_str("--:|");
    }
    out.push('\n');
    for (i, e) in entries.iter().enumerate() {
        let _ = write!(
            out,
            "| {} | {} |",
            e.model_id.replace('|', "\\|"),
            if e.efficient { "Yes" } else { "No" }
        );
        for col in &cells {
            let _ = write!(out, " {} |", col[i]);
        }
        out.push('\n');
    }
    out
}

fn leaderboard_csv(board: &Leaderboard) -> Result<String> {
    let kinds: Vec<ResourceKind> = ResourceKind::ALL
        .into_iter()
        .filter(|k| {
            *k != ResourceKind::Params
                && board.entries().iter().any(|e| e.resources.contains_key(k))
        })
        .collect();
    let mut w = csv_writer();
    let mut header: Vec<&str> = vec![
        "rank",
        "model_id",
        "dataset_id",
        "efficient",
        "params_millions",
    ];
    header.extend(kinds.iter().map(|k| k.column()));
    header.extend([
        "performance",
        "variant",
        "alpha",
        "normalized_resource",
        "score",
        "clamped",
    ]);
    w.write_record(&header)?;
    for (i, e) in board.entries().iter().enumerate() {
        let mut row = vec![
            (i + 1).to_string(),
            e.model_id.clone(),
            e.dataset_id.clone(),
            e.efficient.to_string(),
            opt(e.params_millions),
        ];
        row.extend(kinds.iter().map(|k| opt(e.resources.get(k).copied())));
        row.extend([
            e.performance.to_string(),
            e.score.variant.to_string(),
            e.score.params.alpha_value().to_string(),
            e.score.normalized_resource.to_string(),
            e.score.value.to_string(),
            e.score.clamped.to_string(),
        ]);
        w.write_record(&row)?;
    }
    finish(w)
}

/// Renders a leaderboard. Markdown follows the usual results-table layout
/// with 4-decimal scores and the best value of each column in bold; CSV and
/// JSON keep full precision.
pub fn emit_leaderboard(board: &Leaderboard, format: Format) -> Result<String> {
    if board.is_empty() {
        return Err(PeprError::Empty("leaderboard"));
    }
    match format {
        Format::Markdown => Ok(markdown(board)),
        Format::Csv => leaderboard_csv(board),
        Format::Json => Ok(serde_json::to_string_pretty(board)?),
    }
}

pub fn parse_leaderboard_json(text: &str) -> Result<Leaderboard> {
    Ok(serde_json::from_str(text)?)
}

/// Score matrix with `r` values across the first row and `p` values down the
/// first column.
pub fn isocline_csv(grid: &IsoclineGrid) -> Result<String> {
    let mut w = csv_writer();
    let mut header = vec!["p\\r".to_string()];
    header.extend(grid.r_axis.iter().map(f64::to_string));
    w.write_record(&header)?;
    for (p, row) in grid.p_axis.iter().zip(&grid.values) {
        let mut line = vec![p.to_string()];
        line.extend(row.iter().map(f64::to_string));
        w.write_record(&line)?;
    }
    finish(w)
}

/// One `label,r,p,pepr,on_frontier` row per input point, in input order.
pub fn scatter_csv(points: &[TradeoffPoint], params: &ScoreParams) -> Result<String> {
    let front = pareto_front(points.to_vec())?;
    let mut w = csv_writer();
    w.write_record(["label", "r", "p", "pepr", "on_frontier"])?;
    for row in FrontierRow::from_front(&front, params)? {
        w.write_record([
            row.label,
            row.r.to_string(),
            row.p.to_string(),
            row.pepr.to_string(),
            row.on_frontier.to_string(),
        ])?;
    }
    finish(w)
}

/// Bar-chart data: one row per leaderboard entry, in rank order.
pub fn score_bars_csv(board: &Leaderboard) -> Result<String> {
    if board.is_empty() {
        return Err(PeprError::Empty("leaderboard"));
    }
    let mut w = csv_writer();
    w.write_record([
        "model_id",
        "dataset_id",
        "variant",
        "performance",
        "score",
        "efficient",
    ])?;
    for e in board.entries() {
        w.write_record([
            e.model_id.clone(),
            e.dataset_id.clone(),
            e.score.variant.to_string(),
            e.performance.to_string(),
            e.score.value.to_string(),
            e.efficient.to_string(),
        ])?;
    }
    finish(w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierRow {
    pub label: String,
    pub r: f64,
    pub p: f64,
    pub pepr: f64,
    pub on_frontier: bool,
    /// Label of a point dominating this one.
    pub dominated_by: Option<String>,
}

impl FrontierRow {
    pub fn from_front(front: &ParetoFront, params: &ScoreParams) -> Result<Vec<FrontierRow>> {
        let flags = front.flags();
        let mut witness = vec![None; flags.len()];
        for &(d, w) in front.dominated_indices() {
            witness[d] = Some(front.points()[w].label.clone());
        }
        front
            .points()
            .iter()
            .zip(flags)
            .zip(witness)
            .map(|((pt, on_frontier), dominated_by)| {
                Ok(FrontierRow {
                    label: pt.label.clone(),
                    r: pt.r,
                    p: pt.p,
                    pepr: pt.score(params)?,
                    on_frontier,
                    dominated_by,
                })
            })
            .collect()
    }
}

/// Combined analysis output.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub leaderboard: Vec<LeaderboardEntry>,
    pub frontier: Vec<FrontierRow>,
    pub comparisons: Vec<GroupComparison>,
    /// Fitted bounds keyed by dataset id.
    pub fitted_bounds: BTreeMap<String, FitResult>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Report> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_markdown(&self) -> Result<String> {
        let mut out = String::new();
        if !self.leaderboard.is_empty() {
            out.push_str("## Leaderboard\n\n");
            let mut datasets: Vec<&str> = Vec::new();
            for e in &self.leaderboard {
                if !datasets.contains(&e.dataset_id.as_str()) {
                    datasets.push(&e.dataset_id);
                }
            }
            for ds in &datasets {
                if datasets.len() > 1 {
                    let _ = writeln!(out, "### {ds}\n");
                }
                let entries = self
                    .leaderboard
                    .iter()
                    .filter(|e| e.dataset_id == *ds)
                    .cloned()
                    .collect();
                out.push_str(&markdown(&Leaderboard::from_entries(entries)));
                out.push('\n');
            }
        }
        if !self.frontier.is_empty() {
            out.push_str("## Pareto frontier\n\n| Point | r | p | PePR | Frontier |\n|---|--:|--:|--:|:-:|\n");
            for row in &self.frontier {
                let _ = writeln!(
                    out,
                    "| {} | {:.4} | {:.4} | {:.4} | {} |",
                    row.label.replace('|', "\\|"),
                    row.r,
                    row.p,
                    row.pepr,
                    if row.on_frontier { "yes" } else { "no" }
                );
            }
            out.push('\n');
        }
        if !self.comparisons.is_empty() {
            out.push_str(
                "## Group comparisons\n\n| A | B | n | median A | median B | t | df | p |\n|---|---|--:|--:|--:|--:|--:|--:|\n",
            );
            for c in &self.comparisons {
                let _ = writeln!(
                    out,
                    "| {} | {} | {}/{} | {:.4} | {:.4} | {:.3} | {:.1} | {:.3e} |",
                    c.group_a.label,
                    c.group_b.label,
                    c.group_a.values.len(),
                    c.group_b.values.len(),
                    c.median_a,
                    c.median_b,
                    c.t_statistic,
                    c.degrees_of_freedom,
                    c.p_value
                );
            }
            out.push('\n');
        }
        if !self.fitted_bounds.is_empty() {
            out.push_str("## Fitted energy bounds\n\n| Dataset | e_min (Wh) | e_max (Wh) | max residual |\n|---|--:|--:|--:|\n");
            for (ds, fit) in &self.fitted_bounds {
                let _ = writeln!(
                    out,
                    "| {ds} | {:.2} | {:.2} | {:.5} |",
                    fit.e_min, fit.e_max, fit.max_residual
                );
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Markdown => self.to_markdown(),
            Format::Csv => Err(PeprError::InvalidArgument(
                "reports are emitted as json or markdown".into(),
            )),
        }
    }
}
