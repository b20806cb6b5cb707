//! Acceptance suite. Every check prints one PASS/FAIL line and the process
//! exits non-zero if any check fails.

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use pepr_core::curves::{
    diminishing_returns_regions, integral_representation_check, peprc_star, synth_curve, Trend,
};
use pepr_core::frontier::{dominates, knee_point, pareto_front};
use pepr_core::io::{
    fit_normalization_bounds, model_table, read_runs, table2_block, table2_records, write_runs,
    FitInput, RunFormat, Table2Block,
};
use pepr_core::scoring::{pepr, pepr_alpha, score_experiment};
use pepr_core::stats::{median_split_by, welch_t_test};
use pepr_core::{
    ArchClass, CurveFamily, ExperimentSet, ResourceKind, RunRecord, RunTags, ScoreParams,
    TradeoffPoint,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {{
        let held: bool = $cond;
        if !held {
            return Err(format!($($fmt)+));
        }
    }};
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn alpha_examples() -> Outcome {
    let plain = pepr_alpha(1.0, 1.0, 1.0).map_err(|e| e.to_string())?;
    ensure!(
        plain == 0.5,
        "pepr_alpha(1, 1, 1) = {plain}, expected exactly 0.5"
    );
    let scaled = pepr_alpha(1.0, 1.0, 100.0).map_err(|e| e.to_string())?;
    ensure!(
        (scaled - 0.990099).abs() <= 5e-3,
        "pepr_alpha(1, 1, 100) = {scaled}, expected 0.990099 ± 5e-3"
    );
    ensure!(
        (scaled - 0.99).abs() <= 5e-3,
        "pepr_alpha(1, 1, 100) = {scaled} is not 0.99 at two decimals"
    );
    Ok(format!("α=1 → {plain}, α=100 → {scaled:.6}"))
}

fn table2_consistency() -> Outcome {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    for block in Table2Block::ALL {
        let rows = table2_block(block);
        let fit =
            fit_normalization_bounds(&FitInput::from_table2(block)).map_err(|e| e.to_string())?;
        let published: Vec<&str> = rows.iter().take(5).map(|r| r.model).collect();
        let reranked: Vec<&str> = fit.reranked_labels().into_iter().take(5).collect();
        notes.push(format!(
            "{} e=[{:.2}, {:.2}] max_res={:.5}",
            block.dataset_id(),
            fit.e_min,
            fit.e_max,
            fit.max_residual
        ));
        if fit.max_residual > 0.01 {
            failures.push(format!(
                "{}: max_residual {:.5} > 0.01",
                block.dataset_id(),
                fit.max_residual
            ));
        }
        if published != reranked {
            failures.push(format!(
                "{}: top-5 {:?} != published {:?}",
                block.dataset_id(),
                reranked,
                published
            ));
        }
    }
    if failures.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(format!("{} | {}", failures.join("; "), notes.join("; ")))
    }
}

fn record(model: &str, dataset: &str, p: f64, energy: f64) -> RunRecord {
    RunRecord::new(
        model,
        dataset,
        p,
        RunTags::new(ArchClass::Cnn, false, Some(1.0)),
    )
    .unwrap()
    .with_resource(ResourceKind::Energy, energy)
    .unwrap()
}

fn board_scores(records: Vec<RunRecord>) -> Vec<(String, f64)> {
    let set = ExperimentSet::new(records).unwrap();
    score_experiment(&set, ResourceKind::Energy, &ScoreParams::default())
        .unwrap()
        .entries()
        .iter()
        .map(|e| (e.model_id.clone(), e.score.value))
        .collect()
}

fn feature_contracts() -> Outcome {
    const CASES: usize = 10_000;
    let mut g = rng(3);

    for i in 0..CASES {
        let p: f64 = g.gen_range(0.0..=1.0);
        let s = pepr(0.0, p).unwrap();
        ensure!(s == p, "zero-cost case {i}: pepr(0, {p}) = {s}");
    }

    for i in 0..CASES {
        let (p0, p1): (f64, f64) = (g.gen_range(0.0..=1.0), g.gen_range(0.0..=1.0));
        let e0: f64 = g.gen_range(0.0..1000.0);
        let e1 = e0 + g.gen_range(1e-3..1000.0);
        let scores = board_scores(vec![
            record("cheap", "d", p0, e0),
            record("costly", "d", p1, e1),
        ]);
        let cheap = scores.iter().find(|s| s.0 == "cheap").unwrap().1;
        let costly = scores.iter().find(|s| s.0 == "costly").unwrap().1;
        ensure!(
            cheap == p0 && (costly - p1 / 2.0).abs() <= 1e-15,
            "two-model case {i}: got ({cheap}, {costly}) for P=({p0}, {p1})"
        );
    }

    for i in 0..CASES {
        let p: f64 = g.gen_range(0.0..=1.0);
        let scores = board_scores(vec![record("only", "d", p, g.gen_range(0.0..1e4))]);
        ensure!(
            scores[0].1 == p,
            "single-model case {i}: score {} != P {p}",
            scores[0].1
        );
    }

    for i in 0..CASES {
        let p: f64 = g.gen_range(1e-6..=1.0);
        let r_lo: f64 = g.gen_range(0.0..1.0);
        let r_hi = g.gen_range(r_lo..=1.0);
        if r_hi > r_lo {
            ensure!(
                pepr(r_lo, p).unwrap() > pepr(r_hi, p).unwrap(),
                "resource monotonicity case {i}: r {r_lo} vs {r_hi} at p {p}"
            );
        }
        let r: f64 = g.gen_range(0.0..=1.0);
        let p_lo: f64 = g.gen_range(0.0..1.0);
        let p_hi = g.gen_range(p_lo..=1.0);
        if p_hi > p_lo {
            ensure!(
                pepr(r, p_hi).unwrap() > pepr(r, p_lo).unwrap(),
                "performance monotonicity case {i}: p {p_lo} vs {p_hi} at r {r}"
            );
        }
    }
    Ok(format!("4 contracts × {CASES} cases"))
}

fn random_family(g: &mut ChaCha8Rng, i: usize) -> CurveFamily {
    let p0 = g.gen_range(0.05..0.7);
    if i.is_multiple_of(2) {
        CurveFamily::SaturatingExp {
            p0,
            p_max: g.gen_range(p0..=1.0),
            rate: g.gen_range(0.5..12.0),
        }
    } else {
        CurveFamily::KinkedLinear {
            p0,
            slope: g.gen_range(0.2..6.0),
            cap: g.gen_range(p0..=1.0),
        }
    }
}

fn curve_theory() -> Outcome {
    const CURVES: usize = 50;
    const GRID: usize = 1001;
    let mut g = rng(4);
    let mut guaranteed = 0usize;
    let mut worst_integral = 0.0f64;
    for i in 0..CURVES {
        let family = random_family(&mut g, i);
        let curve = synth_curve(family, GRID).map_err(|e| format!("{family:?}: {e}"))?;
        let f0 = curve.initial();

        let best = peprc_star(&curve, GRID).unwrap();
        ensure!(
            best.value >= f0,
            "{family:?}: PePRc* {} < f(0) {f0}",
            best.value
        );

        let regions = diminishing_returns_regions(&curve, GRID).unwrap();
        for (j, trend) in regions.per_interval.iter().enumerate() {
            let (a, b) = (regions.grid[j], regions.grid[j + 1]);
            let (sa, sb) = (curve.pepr_at(a).unwrap(), curve.pepr_at(b).unwrap());
            match trend {
                Trend::Increase => ensure!(sb > sa, "{family:?}: not increasing on [{a}, {b}]"),
                Trend::Decrease => ensure!(sb < sa, "{family:?}: not decreasing on [{a}, {b}]"),
                Trend::Indeterminate => continue,
            }
            guaranteed += 1;
        }

        let (_, hi) = curve.domain();
        for r in [hi, 0.5 * hi, g.gen_range(0.0..hi)] {
            let check = integral_representation_check(&curve, r, 10_000).unwrap();
            worst_integral = worst_integral.max(check.abs_error);
            ensure!(
                check.abs_error <= 1e-6,
                "{family:?}: integral check at r={r}: {check:?}"
            );
        }

        for r in curve.grid(GRID) {
            let s = curve.pepr_at(r).unwrap();
            ensure!(
                f0 / 2.0 <= s && s <= 1.0,
                "{family:?}: bound violated at r={r}: {s}"
            );
        }
    }
    Ok(format!(
        "{CURVES} curves, {guaranteed} classified intervals checked, worst integral error {worst_integral:.2e}"
    ))
}

fn random_cloud(g: &mut ChaCha8Rng, n: usize) -> Vec<TradeoffPoint> {
    // half the clouds live on a coarse lattice so ties and duplicates occur
    let lattice = g.gen_bool(0.5);
    (0..n)
        .map(|i| {
            let (r, p) = if lattice {
                (
                    g.gen_range(0..=25) as f64 / 25.0,
                    g.gen_range(0..=25) as f64 / 25.0,
                )
            } else {
                (g.gen_range(0.0..=1.0), g.gen_range(0.0..=1.0))
            };
            TradeoffPoint::new(format!("pt{i}"), r, p).unwrap()
        })
        .collect()
}

fn brute_force_frontier(points: &[TradeoffPoint]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| {
            points.iter().all(|q| {
                !(q.p >= points[i].p
                    && q.r <= points[i].r
                    && (q.p > points[i].p || q.r < points[i].r))
            })
        })
        .collect()
}

fn pareto_oracle() -> Outcome {
    let mut g = rng(5);
    let mut total = 0;
    for instance in 0..1000 {
        let n = g.gen_range(1..=200);
        let points = random_cloud(&mut g, n);
        let front = pareto_front(points.clone()).unwrap();
        let mut got = front.frontier_indices().to_vec();
        got.sort_unstable();
        let expected = brute_force_frontier(&points);
        ensure!(
            got == expected,
            "instance {instance} (n={n}): {got:?} != {expected:?}"
        );
        total += n;
    }
    Ok(format!("1000 instances, {total} points"))
}

fn knee_alignment() -> Outcome {
    let mut g = rng(6);
    let params = ScoreParams::default();
    for cloud in 0..100 {
        let n = g.gen_range(1..=200);
        let points = random_cloud(&mut g, n);
        let mut best = 0;
        for (i, pt) in points.iter().enumerate() {
            let (s, b) = (
                pepr(pt.r, pt.p).unwrap(),
                pepr(points[best].r, points[best].p).unwrap(),
            );
            if s > b || (s == b && pt.r < points[best].r) {
                best = i;
            }
        }
        let top = &points[best];
        ensure!(
            !points.iter().any(|q| dominates(q, top)),
            "cloud {cloud}: max-PePR point {top:?} is dominated"
        );
        let knee = knee_point(&pareto_front(points.clone()).unwrap(), &params).unwrap();
        ensure!(
            (knee.r, knee.p) == (top.r, top.p),
            "cloud {cloud}: knee {knee:?} != max-PePR point {top:?}"
        );
    }
    Ok("100 clouds".into())
}

struct WelchReference {
    a: &'static [f64],
    b: &'static [f64],
    t: f64,
    p: f64,
}

// 50-digit reference values computed independently before the build.
#[allow(clippy::excessive_precision)]
const WELCH_REFERENCES: [WelchReference; 3] = [
    WelchReference {
        a: &[0.8, 0.82, 0.81, 0.79],
        b: &[0.70, 0.72, 0.71, 0.69],
        t: 10.954451150103322269,
        p: 0.000034364028076121494869,
    },
    WelchReference {
        a: &[0.61, 0.74, 0.58, 0.69, 0.72, 0.66, 0.70],
        b: &[0.64, 0.59, 0.71, 0.55, 0.62],
        t: 1.4258376275920924762,
        p: 0.18901719495350837266,
    },
    WelchReference {
        a: &[12.1, 14.3, 11.8, 15.2, 13.9, 12.7, 14.8, 13.1, 12.4, 16.0],
        b: &[9.8, 17.5, 11.2, 19.3, 8.4, 14.1],
        t: 0.13442419418038473713,
        p: 0.89772582874472791837,
    },
];

fn welch_references() -> Outcome {
    let mut worst = (0.0f64, 0.0f64);
    for (i, case) in WELCH_REFERENCES.iter().enumerate() {
        let c = welch_t_test(case.a, case.b).map_err(|e| e.to_string())?;
        let (dt, dp) = ((c.t_statistic - case.t).abs(), (c.p_value - case.p).abs());
        worst = (worst.0.max(dt), worst.1.max(dp));
        ensure!(
            dt <= 1e-9 && dp <= 1e-9,
            "case {i}: t {} (Δ {dt:e}), p {} (Δ {dp:e})",
            c.t_statistic,
            c.p_value
        );
    }
    let same = welch_t_test(&[0.7, 0.75, 0.8], &[0.7, 0.75, 0.8]).map_err(|e| e.to_string())?;
    ensure!(
        same.p_value == 1.0,
        "identical samples: p = {}",
        same.p_value
    );
    let flat = welch_t_test(&[0.5, 0.5, 0.5], &[0.5, 0.5]).map_err(|e| e.to_string())?;
    ensure!(
        flat.p_value == 1.0,
        "identical constant samples: p = {}",
        flat.p_value
    );
    Ok(format!(
        "max |Δt| {:.1e}, max |Δp| {:.1e}",
        worst.0, worst.1
    ))
}

fn model_table_counts() -> Outcome {
    let models = model_table();
    ensure!(models.len() == 131, "{} rows", models.len());
    let cnn = models
        .iter()
        .filter(|m| m.arch_class == ArchClass::Cnn)
        .count();
    let efficient = models.iter().filter(|m| m.efficient).count();
    ensure!(
        (cnn, models.len() - cnn) == (80, 51),
        "arch split {cnn}/{}",
        models.len() - cnn
    );
    ensure!(
        (efficient, models.len() - efficient) == (31, 100),
        "efficiency split {efficient}/{}",
        models.len() - efficient
    );
    let split = median_split_by(models, |m| Some(m.params_millions)).map_err(|e| e.to_string())?;
    ensure!(
        (23.8..=24.7).contains(&split.threshold),
        "median threshold {} outside [23.8, 24.7]",
        split.threshold
    );
    Ok(format!(
        "131 rows, 80/51, 31/100, threshold {}M",
        split.threshold
    ))
}

fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

fn same_at_9_digits(a: &ExperimentSet, b: &ExperimentSet) -> Result<(), String> {
    ensure!(
        a.len() == b.len(),
        "record count {} != {}",
        a.len(),
        b.len()
    );
    for (x, y) in a.records().iter().zip(b.records()) {
        let id = x.model_id();
        ensure!(
            x.model_id() == y.model_id() && x.dataset_id() == y.dataset_id(),
            "ids differ: {id} vs {}",
            y.model_id()
        );
        ensure!(
            sig9(x.performance()) == sig9(y.performance()),
            "{id}: performance"
        );
        ensure!(
            x.tags().arch_class == y.tags().arch_class && x.tags().efficient == y.tags().efficient,
            "{id}: tags"
        );
        ensure!(
            x.tags().params_millions.map(sig9) == y.tags().params_millions.map(sig9),
            "{id}: params"
        );
        ensure!(
            x.epoch() == y.epoch() && x.extra() == y.extra(),
            "{id}: epoch or extra columns"
        );
        let rx: Vec<_> = x.resources().iter().map(|(k, v)| (*k, sig9(*v))).collect();
        let ry: Vec<_> = y.resources().iter().map(|(k, v)| (*k, sig9(*v))).collect();
        ensure!(rx == ry, "{id}: resources {rx:?} vs {ry:?}");
    }
    ensure!(a.contexts().len() == b.contexts().len(), "context count");
    for ((kx, cx), (ky, cy)) in a.contexts().iter().zip(b.contexts()) {
        ensure!(
            kx == ky
                && sig9(cx.r_min()) == sig9(cy.r_min())
                && sig9(cx.r_max()) == sig9(cy.r_max()),
            "context {kx}"
        );
    }
    Ok(())
}

fn random_records(g: &mut ChaCha8Rng) -> Vec<RunRecord> {
    let names = [
        "resnet50",
        "vit,b/16",
        "mobile \"v3\"",
        "dla-46",
        "effnet_b0",
        "convnext t",
    ];
    let n = g.gen_range(1..=names.len());
    (0..n)
        .map(|i| {
            let tags = RunTags::new(
                if g.gen_bool(0.5) {
                    ArchClass::Cnn
                } else {
                    ArchClass::Other
                },
                g.gen_bool(0.3),
                Some(g.gen_range(0.1..900.0)),
            );
            let mut r = RunRecord::new(names[i], "ds-1", g.gen_range(0.0..=1.0), tags)
                .unwrap()
                .with_resource(ResourceKind::Energy, g.gen_range(0.0..5e4))
                .unwrap()
                .with_resource(ResourceKind::Carbon, g.gen_range(0.0..20.0))
                .unwrap()
                .with_resource(ResourceKind::Memory, g.gen_range(0.5..80.0))
                .unwrap()
                .with_resource(ResourceKind::Time, g.gen_range(1.0..1e6))
                .unwrap()
                .with_resource(ResourceKind::DataFraction, g.gen_range(0.0..=1.0))
                .unwrap()
                .with_epoch(g.gen_range(1..200));
            if g.gen_bool(0.5) {
                r = r.with_extra("note", format!("seed {}", g.gen_range(0..100)));
            }
            r
        })
        .collect()
}

fn round_trip() -> Outcome {
    let mut g = rng(9);
    let mut sets: Vec<Vec<RunRecord>> = (0..200).map(|_| random_records(&mut g)).collect();
    sets.extend(Table2Block::ALL.into_iter().map(table2_records));
    let mut checked = 0;
    for records in &sets {
        let original = ExperimentSet::new(records.clone()).unwrap();
        for format in [RunFormat::Csv, RunFormat::Json] {
            let first = write_runs(original.records(), format).map_err(|e| e.to_string())?;
            let parsed = ExperimentSet::new(
                read_runs(&first, format).map_err(|e| format!("{format:?}: {e}"))?,
            )
            .map_err(|e| e.to_string())?;
            same_at_9_digits(&original, &parsed).map_err(|e| format!("{format:?}: {e}"))?;
            let second = write_runs(parsed.records(), format).map_err(|e| e.to_string())?;
            let again = ExperimentSet::new(read_runs(&second, format).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            same_at_9_digits(&parsed, &again)
                .map_err(|e| format!("{format:?} second pass: {e}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} set round trips over csv and json"))
}

struct Criterion {
    id: u8,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

const CRITERIA: [Criterion; 9] = [
    Criterion {
        id: 1,
        name: "alpha worked examples",
        budget: Duration::from_secs(1),
        run: alpha_examples,
    },
    Criterion {
        id: 2,
        name: "reported table consistency",
        budget: Duration::from_secs(5),
        run: table2_consistency,
    },
    Criterion {
        id: 3,
        name: "feature contracts",
        budget: Duration::from_secs(10),
        run: feature_contracts,
    },
    Criterion {
        id: 4,
        name: "curve theory",
        budget: Duration::from_secs(30),
        run: curve_theory,
    },
    Criterion {
        id: 5,
        name: "pareto oracle equivalence",
        budget: Duration::from_secs(30),
        run: pareto_oracle,
    },
    Criterion {
        id: 6,
        name: "knee and PePR alignment",
        budget: Duration::from_secs(10),
        run: knee_alignment,
    },
    Criterion {
        id: 7,
        name: "welch references",
        budget: Duration::from_secs(1),
        run: welch_references,
    },
    Criterion {
        id: 8,
        name: "bundled model table",
        budget: Duration::from_secs(1),
        run: model_table_counts,
    },
    Criterion {
        id: 9,
        name: "csv/json round trip",
        budget: Duration::from_secs(1),
        run: round_trip,
    },
];

fn main() {
    let mut failed = 0;
    for c in &CRITERIA {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(c.run))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Err(format!("panicked: {msg}"))
            })
            .and_then(|detail| {
                let elapsed = start.elapsed();
                if elapsed > c.budget {
                    Err(format!(
                        "took {elapsed:.2?}, budget {:?} ({detail})",
                        c.budget
                    ))
                } else {
                    Ok(detail)
                }
            });
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!(
                "criterion {} {}: PASS [{elapsed:.2?}] {detail}",
                c.id, c.name
            ),
            Err(why) => {
                failed += 1;
                println!("criterion {} {}: FAIL [{elapsed:.2?}] {why}", c.id, c.name);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        CRITERIA.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
