use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use pepr_core::curves::{
    diminishing_returns_regions, isocline_grid, peprc_star, CurveScore, Interval,
};
use pepr_core::frontier::{knee_point, pareto_front};
use pepr_core::io::{
    bundled_csv, curve_from_records, emit_leaderboard, fit_inputs_from_records,
    fit_normalization_bounds, ingest_runs, isocline_csv, read_runs, scatter_csv, write_atomic,
    BundledDataset, Experiments, FitResult, Format, FrontierRow, Report, RunFormat,
};
use pepr_core::scoring::{aggregate, pepr_alpha, score, weighted_resource};
use pepr_core::stats::{median_split_by, paired_t_test, welch_groups, Group};
use pepr_core::{
    ArchClass, ExperimentSet, GroupComparison, PeprError, RunRecord, Strategy, TradeoffPoint,
};
use serde::Serialize;

use crate::{
    config_error, BundledCmd, Command, CompareCmd, CurveCmd, FitBoundsCmd, GroupBy, IsoclinesCmd,
    Metric, ParetoCmd, RankCmd, ReportCmd, ScoreCmd, Scoring, ScoringArgs,
};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Score(cmd) => score_cmd(cmd),
        Command::Rank(cmd) => rank_cmd(cmd),
        Command::Pareto(cmd) => pareto_cmd(cmd),
        Command::Curve(cmd) => curve_cmd(cmd),
        Command::Isoclines(cmd) => isoclines_cmd(cmd),
        Command::Compare(cmd) => compare_cmd(cmd),
        Command::FitBounds(cmd) => fit_bounds_cmd(cmd),
        Command::Report(cmd) => report_cmd(cmd),
        Command::Bundled(cmd) => bundled_cmd(cmd),
    }
}

fn write_output(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => write_atomic(path, text.as_bytes())
            .with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<Experiments> {
    ingest_runs(path, RunFormat::from_path(path))
        .with_context(|| format!("reading {}", path.display()))
}

/// Parses the scoring flags and applies a non-default normalization
/// strategy to every resource kind the score uses.
fn prepare(path: &Path, args: &ScoringArgs) -> Result<(Experiments, Scoring)> {
    let scoring = args.resolve()?;
    let mut experiments = load(path)?;
    if scoring.strategy != Strategy::MinMaxOverSet {
        let kinds: Vec<_> = match scoring.params.weights() {
            Some(w) => w.kinds().collect(),
            None => vec![scoring.kind],
        };
        for kind in kinds {
            experiments =
                experiments
                    .with_strategy(kind, scoring.strategy)
                    .map_err(|e| match e {
                        PeprError::InvalidBounds { .. } => config_error(e.to_string()),
                        other => anyhow::Error::new(other),
                    })?;
        }
    }
    Ok((experiments, scoring))
}

fn select<'a>(experiments: &'a Experiments, dataset: Option<&str>) -> Result<&'a ExperimentSet> {
    let ids = || experiments.dataset_ids().collect::<Vec<_>>().join(", ");
    match dataset {
        Some(d) => experiments
            .get(d)
            .ok_or_else(|| config_error(format!("no dataset `{d}` in input (found {})", ids()))),
        None if experiments.len() == 1 => Ok(experiments.single()?),
        None => Err(config_error(format!(
            "input holds several datasets ({}); pick one with --dataset",
            ids()
        ))),
    }
}

fn selected<'a>(
    experiments: &'a Experiments,
    dataset: Option<&str>,
) -> Result<Vec<&'a ExperimentSet>> {
    match dataset {
        Some(_) => Ok(vec![select(experiments, dataset)?]),
        None => Ok(experiments.sets().values().collect()),
    }
}

fn normalized_cost(set: &ExperimentSet, record: &RunRecord, scoring: &Scoring) -> Result<f64> {
    Ok(match scoring.params.weights() {
        Some(w) => {
            let normalized = w
                .kinds()
                .map(|k| Ok((k, set.normalized(record, k)?.value)))
                .collect::<pepr_core::Result<BTreeMap<_, _>>>()?;
            weighted_resource(&normalized, w)?
        }
        None => set.normalized(record, scoring.kind)?.value,
    })
}

fn score_cmd(cmd: ScoreCmd) -> Result<()> {
    let (experiments, scoring) = prepare(&cmd.io.input, &cmd.scoring)?;
    let set = select(&experiments, cmd.dataset.as_deref())?;
    let mut board = score(set, scoring.kind, &scoring.params)?;
    if let Some(n) = cmd.top {
        board = board.top(n);
    }
    write_output(
        &emit_leaderboard(&board, cmd.io.format)?,
        cmd.io.output.as_deref(),
    )
}

fn rank_cmd(cmd: RankCmd) -> Result<()> {
    let (experiments, scoring) = prepare(&cmd.io.input, &cmd.scoring)?;
    let boards = experiments
        .sets()
        .values()
        .map(|set| score(set, scoring.kind, &scoring.params))
        .collect::<pepr_core::Result<Vec<_>>>()?;
    let rows = aggregate(&boards);
    let text = match cmd.io.format {
        Format::Json => serde_json::to_string_pretty(&rows)?,
        Format::Csv => {
            let mut out = String::from("rank,model_id,datasets,mean_performance,mean_score\n");
            for (i, r) in rows.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    i + 1,
                    csv_field(&r.model_id),
                    r.datasets,
                    r.mean_performance,
                    r.mean_score
                );
            }
            out
        }
        Format::Markdown => {
            let label = boards
                .first()
                .and_then(|b| b.entries().first())
                .map(|e| e.score.variant.to_string());
            let mut out = format!(
                "| Rank | Model | Datasets | Mean test P | Mean {} |\n|--:|---|--:|--:|--:|\n",
                label.unwrap_or_else(|| "PePR".into())
            );
            for (i, r) in rows.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {:.4} | {:.4} |",
                    i + 1,
                    r.model_id,
                    r.datasets,
                    r.mean_performance,
                    r.mean_score
                );
            }
            out
        }
    };
    write_output(&text, cmd.io.output.as_deref())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn point_label(record: &RunRecord, prefix_dataset: bool) -> String {
    let mut label = String::new();
    if prefix_dataset {
        let _ = write!(label, "{}/", record.dataset_id());
    }
    label.push_str(record.model_id());
    if let Some(e) = record.epoch() {
        let _ = write!(label, "@{e}");
    }
    label
}

fn tradeoff_points(
    set: &ExperimentSet,
    scoring: &Scoring,
    prefix_dataset: bool,
) -> Result<Vec<TradeoffPoint>> {
    set.records()
        .iter()
        .map(|r| {
            let cost = normalized_cost(set, r, scoring)?;
            Ok(TradeoffPoint::new(
                point_label(r, prefix_dataset),
                cost,
                r.performance(),
            )?)
        })
        .collect()
}

#[derive(Serialize)]
struct ParetoOutput {
    points: Vec<FrontierRow>,
    knee: TradeoffPoint,
    knee_pepr: f64,
}

fn pareto_cmd(cmd: ParetoCmd) -> Result<()> {
    let (experiments, scoring) = prepare(&cmd.io.input, &cmd.scoring)?;
    let set = select(&experiments, cmd.dataset.as_deref())?;
    let points = tradeoff_points(set, &scoring, false)?;
    let text = match cmd.io.format {
        Format::Csv => scatter_csv(&points, &scoring.params)?,
        format => {
            let front = pareto_front(points)?;
            let knee = knee_point(&front, &scoring.params)?;
            let knee_pepr = knee.score(&scoring.params)?;
            let rows = FrontierRow::from_front(&front, &scoring.params)?;
            if format == Format::Json {
                serde_json::to_string_pretty(&ParetoOutput {
                    points: rows,
                    knee,
                    knee_pepr,
                })?
            } else {
                let report = Report {
                    frontier: rows,
                    ..Report::default()
                };
                let mut out = report.to_markdown()?;
                let _ = writeln!(
                    out,
                    "Knee point: {} (r = {:.4}, p = {:.4}, PePR = {:.4})",
                    knee.label, knee.r, knee.p, knee_pepr
                );
                out
            }
        }
    };
    write_output(&text, cmd.io.output.as_deref())
}

#[derive(Serialize)]
struct CurveOutput {
    model_id: String,
    samples: Vec<(f64, f64)>,
    initial: f64,
    peprc_star: CurveScore,
    increase: Vec<Interval>,
    decrease: Vec<Interval>,
    indeterminate: Vec<Interval>,
}

fn intervals(list: &[Interval]) -> String {
    if list.is_empty() {
        return "none".into();
    }
    list.iter()
        .map(|iv| format!("[{:.4}, {:.4}]", iv.start, iv.end))
        .collect::<Vec<_>>()
        .join(", ")
}

fn curve_cmd(cmd: CurveCmd) -> Result<()> {
    let path = &cmd.io.input;
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut records = read_runs(&text, RunFormat::from_path(path))
        .with_context(|| format!("reading {}", path.display()))?;
    if let Some(d) = &cmd.dataset {
        records.retain(|r| r.dataset_id() == d);
    }
    let curve = curve_from_records(&records, &cmd.model, cmd.resource)?;
    let best = peprc_star(&curve, cmd.grid)?;
    let regions = diminishing_returns_regions(&curve, cmd.grid)?;
    let out = match cmd.io.format {
        Format::Json => serde_json::to_string_pretty(&CurveOutput {
            model_id: cmd.model.clone(),
            samples: curve.samples().to_vec(),
            initial: curve.initial(),
            peprc_star: best,
            increase: regions.increase.clone(),
            decrease: regions.decrease.clone(),
            indeterminate: regions.indeterminate.clone(),
        })?,
        Format::Csv => {
            let mut out = String::from("r,performance,pepr,trend\n");
            for (j, &r) in regions.grid.iter().enumerate() {
                let trend = regions.per_interval[j.min(regions.per_interval.len() - 1)];
                let trend = serde_json::to_value(trend)?;
                let _ = writeln!(
                    out,
                    "{r},{},{},{}",
                    curve.eval(r)?,
                    curve.pepr_at(r)?,
                    trend.as_str().unwrap_or_default()
                );
            }
            out
        }
        Format::Markdown => {
            let mut out = format!("## PePR curve of {}\n\n", cmd.model);
            let _ = writeln!(out, "- samples: {}", curve.samples().len());
            let _ = writeln!(out, "- f(0): {:.4}", curve.initial());
            let _ = writeln!(
                out,
                "- PePRc*: {:.4} at r = {:.4} ({} grid points)",
                best.value, best.r_star, best.grid_resolution
            );
            let _ = writeln!(
                out,
                "- guaranteed increase: {}",
                intervals(&regions.increase)
            );
            let _ = writeln!(
                out,
                "- guaranteed decrease: {}",
                intervals(&regions.decrease)
            );
            let _ = writeln!(
                out,
                "- indeterminate: {}",
                intervals(&regions.indeterminate)
            );
            out
        }
    };
    write_output(&out, cmd.io.output.as_deref())
}

fn isoclines_cmd(cmd: IsoclinesCmd) -> Result<()> {
    if cmd.format != Format::Csv {
        return Err(config_error("isocline grids are exported as csv only"));
    }
    let grid = isocline_grid(cmd.grid).map_err(|e| config_error(e.to_string()))?;
    write_output(&isocline_csv(&grid)?, cmd.output.as_deref())
}

struct Sample {
    model_id: String,
    dataset_id: String,
    params_millions: Option<f64>,
    arch_class: ArchClass,
    efficient: bool,
    value: f64,
}

fn samples(sets: &[&ExperimentSet], scoring: &Scoring, metric: Metric) -> Result<Vec<Sample>> {
    let mut out = Vec::new();
    for set in sets {
        for r in set.records() {
            let value = match metric {
                Metric::Performance => r.performance(),
                Metric::Score => pepr_alpha(
                    normalized_cost(set, r, scoring)?,
                    r.performance(),
                    scoring.params.alpha_value(),
                )?,
            };
            out.push(Sample {
                model_id: r.model_id().to_string(),
                dataset_id: r.dataset_id().to_string(),
                params_millions: r.tags().params_millions,
                arch_class: r.tags().arch_class,
                efficient: r.tags().efficient,
                value,
            });
        }
    }
    Ok(out)
}

fn split_groups(samples: &[Sample], by: GroupBy) -> Result<(Group, Group)> {
    let values = |pred: &dyn Fn(&Sample) -> bool| {
        samples
            .iter()
            .filter(|s| pred(s))
            .map(|s| s.value)
            .collect()
    };
    Ok(match by {
        GroupBy::Size => {
            let indices: Vec<usize> = (0..samples.len()).collect();
            let split = median_split_by(&indices, |&i| samples[i].params_millions)?;
            let pick = |idx: &[usize]| idx.iter().map(|&i| samples[i].value).collect();
            (
                Group::new(
                    format!("small (<= {}M)", split.threshold),
                    pick(&split.small),
                ),
                Group::new(
                    format!("large (> {}M)", split.threshold),
                    pick(&split.large),
                ),
            )
        }
        GroupBy::Arch => (
            Group::new("CNN", values(&|s| s.arch_class == ArchClass::Cnn)),
            Group::new("Other", values(&|s| s.arch_class == ArchClass::Other)),
        ),
        GroupBy::Efficient => (
            Group::new("efficient", values(&|s| s.efficient)),
            Group::new("not efficient", values(&|s| !s.efficient)),
        ),
        GroupBy::Dataset => unreachable!("dataset grouping is handled separately"),
    })
}

fn compare_datasets(samples: &[Sample], a: &str, b: &str, paired: bool) -> Result<GroupComparison> {
    let of = |d: &str| {
        samples
            .iter()
            .filter(|s| s.dataset_id == d)
            .collect::<Vec<_>>()
    };
    let (sa, sb) = (of(a), of(b));
    if !paired {
        let vals = |v: &[&Sample]| v.iter().map(|s| s.value).collect();
        return Ok(welch_groups(
            Group::new(a, vals(&sa)),
            Group::new(b, vals(&sb)),
        )?);
    }
    let by_model: BTreeMap<&str, f64> = sb.iter().map(|s| (s.model_id.as_str(), s.value)).collect();
    let (mut va, mut vb) = (Vec::new(), Vec::new());
    for s in &sa {
        if let Some(&v) = by_model.get(s.model_id.as_str()) {
            va.push(s.value);
            vb.push(v);
        }
    }
    Ok(paired_t_test(Group::new(a, va), Group::new(b, vb))?)
}

fn comparisons_csv(list: &[GroupComparison]) -> String {
    let mut out =
        String::from("group_a,group_b,n_a,n_b,median_a,median_b,mean_a,mean_b,t_statistic,degrees_of_freedom,p_value,paired,degenerate\n");
    for c in list {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&c.group_a.label),
            csv_field(&c.group_b.label),
            c.group_a.values.len(),
            c.group_b.values.len(),
            c.median_a,
            c.median_b,
            c.mean_a,
            c.mean_b,
            c.t_statistic,
            c.degrees_of_freedom,
            c.p_value,
            c.paired,
            c.degenerate
        );
    }
    out
}

const DEFAULT_SPLITS: [GroupBy; 3] = [GroupBy::Size, GroupBy::Arch, GroupBy::Efficient];

fn compare_cmd(cmd: CompareCmd) -> Result<()> {
    if cmd.paired && cmd.group_by != Some(GroupBy::Dataset) {
        return Err(config_error("--paired needs --group-by dataset"));
    }
    if cmd.datasets.is_some() && cmd.group_by != Some(GroupBy::Dataset) {
        return Err(config_error("--datasets needs --group-by dataset"));
    }
    if cmd.group_by == Some(GroupBy::Dataset) && cmd.dataset.is_some() {
        return Err(config_error(
            "--dataset cannot be combined with --group-by dataset",
        ));
    }
    let (experiments, scoring) = prepare(&cmd.io.input, &cmd.scoring)?;

    let comparisons = if cmd.group_by == Some(GroupBy::Dataset) {
        let pair: Vec<String> = match cmd.datasets {
            Some(list) => list,
            None if experiments.len() == 2 => experiments.dataset_ids().map(str::to_string).collect(),
            None => {
                return Err(config_error(format!(
                    "--group-by dataset needs exactly two datasets, found {}; pick two with --datasets a,b",
                    experiments.len()
                )))
            }
        };
        let sets = pair
            .iter()
            .map(|d| select(&experiments, Some(d)))
            .collect::<Result<Vec<_>>>()?;
        let all = samples(&sets, &scoring, cmd.metric)?;
        vec![compare_datasets(&all, &pair[0], &pair[1], cmd.paired)?]
    } else {
        let sets = selected(&experiments, cmd.dataset.as_deref())?;
        let all = samples(&sets, &scoring, cmd.metric)?;
        let splits = cmd.group_by.map_or(DEFAULT_SPLITS.to_vec(), |g| vec![g]);
        splits
            .into_iter()
            .map(|by| {
                let (a, b) = split_groups(&all, by)?;
                Ok(welch_groups(a, b)?)
            })
            .collect::<Result<Vec<_>>>()?
    };

    let text = match cmd.io.format {
        Format::Json => serde_json::to_string_pretty(&comparisons)?,
        Format::Csv => comparisons_csv(&comparisons),
        Format::Markdown => Report {
            comparisons,
            ..Report::default()
        }
        .to_markdown()?,
    };
    write_output(&text, cmd.io.output.as_deref())
}

fn fit_all(sets: &[&ExperimentSet]) -> Result<BTreeMap<String, FitResult>> {
    sets.iter()
        .map(|set| {
            let id = set.records()[0].dataset_id().to_string();
            let inputs =
                fit_inputs_from_records(set.records()).with_context(|| format!("dataset {id}"))?;
            let fit = fit_normalization_bounds(&inputs).with_context(|| format!("dataset {id}"))?;
            Ok((id, fit))
        })
        .collect()
}

fn fit_bounds_cmd(cmd: FitBoundsCmd) -> Result<()> {
    let experiments = load(&cmd.io.input)?;
    let sets = selected(&experiments, cmd.dataset.as_deref())?;
    let fits = fit_all(&sets)?;
    let text = match cmd.io.format {
        Format::Json => serde_json::to_string_pretty(&fits)?,
        Format::Csv => {
            let mut out =
                String::from("dataset_id,model_id,rank,recomputed,residual,e_min,e_max\n");
            for (id, fit) in &fits {
                let ranks = fit.rerank();
                for (pos, &i) in ranks.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{}",
                        csv_field(id),
                        csv_field(&fit.labels[i]),
                        pos + 1,
                        fit.recomputed[i],
                        fit.residuals[i],
                        fit.e_min,
                        fit.e_max
                    );
                }
            }
            out
        }
        Format::Markdown => {
            let mut out = String::new();
            for (id, fit) in &fits {
                let _ = writeln!(
                    out,
                    "## {id}\n\ne_min = {:.2} Wh, e_max = {:.2} Wh, max residual = {:.5}\n",
                    fit.e_min, fit.e_max, fit.max_residual
                );
                out.push_str(
                    "| Rank | Model | Recomputed PePR-E | Residual |\n|--:|---|--:|--:|\n",
                );
                for (pos, &i) in fit.rerank().iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "| {} | {} | {:.4} | {:.5} |",
                        pos + 1,
                        fit.labels[i],
                        fit.recomputed[i],
                        fit.residuals[i]
                    );
                }
                out.push('\n');
            }
            out
        }
    };
    write_output(&text, cmd.io.output.as_deref())
}

fn report_cmd(cmd: ReportCmd) -> Result<()> {
    if cmd.io.format == Format::Csv {
        return Err(config_error("reports are emitted as json or markdown"));
    }
    let (experiments, scoring) = prepare(&cmd.io.input, &cmd.scoring)?;
    let sets = selected(&experiments, cmd.dataset.as_deref())?;
    let multi = sets.len() > 1;
    let mut report = Report::default();
    for set in &sets {
        report.leaderboard.extend(
            score(set, scoring.kind, &scoring.params)?
                .entries()
                .iter()
                .cloned(),
        );
        let front = pareto_front(tradeoff_points(set, &scoring, multi)?)?;
        report
            .frontier
            .extend(FrontierRow::from_front(&front, &scoring.params)?);
    }
    let all = samples(&sets, &scoring, Metric::Score)?;
    for by in DEFAULT_SPLITS {
        // a split with fewer than two values on either side is left out
        if let Ok(c) = split_groups(&all, by).and_then(|(a, b)| Ok(welch_groups(a, b)?)) {
            report.comparisons.push(c);
        }
    }
    let fittable: Vec<&ExperimentSet> = sets
        .iter()
        .copied()
        .filter(|s| {
            s.len() >= 3
                && s.records()
                    .iter()
                    .all(|r| r.extra().contains_key(pepr_core::io::REPORTED_SCORE_COLUMN))
        })
        .collect();
    report.fitted_bounds = fit_all(&fittable)?;
    write_output(&report.render(cmd.io.format)?, cmd.io.output.as_deref())
}

fn bundled_cmd(cmd: BundledCmd) -> Result<()> {
    match cmd.name {
        Some(ds) => write_output(&bundled_csv(ds), cmd.output.as_deref()),
        None => {
            let mut out = String::new();
            for ds in BundledDataset::ALL {
                let _ = writeln!(out, "{}", ds.name());
            }
            write_output(&out, cmd.output.as_deref())
        }
    }
}
