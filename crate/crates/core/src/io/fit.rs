//! Recovers the energy normalization bounds behind a table of reported
//! scores.
//!
//! Reported PePR-E values are normalized against bounds over the full model
//! set, which are not part of the table. Given energies, performances and
//! reported scores, this fits `(e_min, e_max)` by least squares: a 0.1 Wh grid
//! over `e_min ∈ [0, min E]`, `e_max ∈ [max E, max(500, max E)]`, then
//! Levenberg-Marquardt refinement projected onto the same box.

use serde::{Deserialize, Serialize};

use crate::error::{PeprError, Result};
use crate::io::bundled::{table2_block, Table2Block};
use crate::resource::{ResourceKind, RunRecord};

/// Extra column holding a previously reported PePR-E score.
pub const REPORTED_SCORE_COLUMN: &str = "pepr_e";

const GRID_STEP: f64 = 0.1;
const GRID_UPPER: f64 = 500.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitInput {
    pub label: String,
    pub energy_wh: f64,
    pub performance: f64,
    pub reported: f64,
}

impl FitInput {
    pub fn from_table2(block: Table2Block) -> Vec<FitInput> {
        table2_block(block)
            .iter()
            .map(|r| FitInput {
                label: r.model.to_string(),
                energy_wh: r.energy_wh,
                performance: r.performance,
                reported: r.pepr_e,
            })
            .collect()
    }
}

/// Reads energy and the [`REPORTED_SCORE_COLUMN`] extra column from records.
pub fn fit_inputs_from_records(records: &[RunRecord]) -> Result<Vec<FitInput>> {
    records
        .iter()
        .map(|r| {
            let energy =
                r.resource(ResourceKind::Energy)
                    .ok_or_else(|| PeprError::MissingResource {
                        kind: ResourceKind::Energy,
                        model_id: r.model_id().to_string(),
                    })?;
            let raw = r.extra().get(REPORTED_SCORE_COLUMN).ok_or_else(|| {
                PeprError::InvalidArgument(format!(
                    "record `{}` has no `{REPORTED_SCORE_COLUMN}` column",
                    r.model_id()
                ))
            })?;
            let reported = raw.trim().parse::<f64>().map_err(|_| {
                PeprError::InvalidArgument(format!(
                    "`{raw}` is not a reported score for `{}`",
                    r.model_id()
                ))
            })?;
            Ok(FitInput {
                label: r.model_id().to_string(),
                energy_wh: energy,
                performance: r.performance(),
                reported,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub e_min: f64,
    pub e_max: f64,
    pub labels: Vec<String>,
    pub recomputed: Vec<f64>,
    /// `|reported - recomputed|` per row, in input order.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

impl FitResult {
    /// Score of `(energy, performance)` under the fitted bounds.
    pub fn score(&self, energy_wh: f64, performance: f64) -> f64 {
        performance / (1.0 + (energy_wh - self.e_min) / (self.e_max - self.e_min))
    }

    /// Input indices ordered by descending recomputed score (ties by lower
    /// energy rank, i.e. input order, then label).
    pub fn rerank(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.recomputed.len()).collect();
        idx.sort_by(|&a, &b| {
            self.recomputed[b]
                .total_cmp(&self.recomputed[a])
                .then_with(|| self.labels[a].cmp(&self.labels[b]))
        });
        idx
    }

    pub fn reranked_labels(&self) -> Vec<&str> {
        self.rerank()
            .into_iter()
            .map(|i| self.labels[i].as_str())
            .collect()
    }
}

struct Problem<'a> {
    rows: &'a [FitInput],
    lo_box: (f64, f64),
    hi_box: (f64, f64),
}

impl Problem<'_> {
    fn loss(&self, lo: f64, hi: f64) -> f64 {
        let w = hi - lo;
        self.rows
            .iter()
            .map(|r| {
                let d = r.reported - r.performance / (1.0 + (r.energy_wh - lo) / w);
                d * d
            })
            .sum()
    }

    fn project(&self, lo: f64, hi: f64) -> (f64, f64) {
        (
            lo.clamp(self.lo_box.0, self.lo_box.1),
            hi.clamp(self.hi_box.0, self.hi_box.1),
        )
    }

    fn grid_search(&self) -> (f64, f64, f64) {
        let lo_steps = ((self.lo_box.1 - self.lo_box.0) / GRID_STEP).floor() as usize;
        let hi_steps = ((self.hi_box.1 - self.hi_box.0) / GRID_STEP).floor() as usize;
        let mut best = (self.lo_box.0, self.hi_box.0, f64::INFINITY);
        for i in 0..=lo_steps {
            let lo = self.lo_box.0 + i as f64 * GRID_STEP;
            for j in 0..=hi_steps {
                let hi = self.hi_box.0 + j as f64 * GRID_STEP;
                let l = self.loss(lo, hi);
                if l < best.2 {
                    best = (lo, hi, l);
                }
            }
        }
        best
    }

    /// Residuals `reported - model` and their Jacobian in `(lo, hi)`.
    fn linearize(&self, lo: f64, hi: f64) -> (Vec<f64>, Vec<[f64; 2]>) {
        let w = hi - lo;
        self.rows
            .iter()
            .map(|r| {
                let u = (r.energy_wh - lo) / w;
                let denom = w * (1.0 + u) * (1.0 + u);
                let res = r.reported - r.performance / (1.0 + u);
                (
                    res,
                    [
                        r.performance * (u - 1.0) / denom,
                        -r.performance * u / denom,
                    ],
                )
            })
            .unzip()
    }

    fn refine(&self, mut lo: f64, mut hi: f64) -> (f64, f64) {
        let mut loss = self.loss(lo, hi);
        let mut damping = 1e-3;
        for _ in 0..200 {
            let (res, jac) = self.linearize(lo, hi);
            let mut jtj = [[0.0; 2]; 2];
            let mut jtr = [0.0; 2];
            for (r, j) in res.iter().zip(&jac) {
                for a in 0..2 {
                    jtr[a] += j[a] * r;
                    for b in 0..2 {
                        jtj[a][b] += j[a] * j[b];
                    }
                }
            }
            let mut improved = false;
            while damping < 1e12 {
                let m = [
                    [jtj[0][0] * (1.0 + damping), jtj[0][1]],
                    [jtj[1][0], jtj[1][1] * (1.0 + damping)],
                ];
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                if det.abs() < f64::MIN_POSITIVE {
                    damping *= 10.0;
                    continue;
                }
                // residual r = reported - model, so dr/dθ = J and the step solves (JᵀJ)δ = -Jᵀr
                let d_lo = -(m[1][1] * jtr[0] - m[0][1] * jtr[1]) / det;
                let d_hi = -(m[0][0] * jtr[1] - m[1][0] * jtr[0]) / det;
                let (nlo, nhi) = self.project(lo + d_lo, hi + d_hi);
                let nloss = self.loss(nlo, nhi);
                if nloss < loss {
                    let step = (nlo - lo).abs() + (nhi - hi).abs();
                    lo = nlo;
                    hi = nhi;
                    loss = nloss;
                    damping = (damping * 0.3).max(1e-12);
                    improved = step > 1e-13;
                    break;
                }
                damping *= 10.0;
            }
            if !improved {
                break;
            }
        }
        (lo, hi)
    }
}

/// Least-squares fit of `(e_min, e_max)` to reported scores.
pub fn fit_normalization_bounds(rows: &[FitInput]) -> Result<FitResult> {
    if rows.len() < 3 {
        return Err(PeprError::Underdetermined(rows.len()));
    }
    for r in rows {
        if !r.energy_wh.is_finite() || !r.performance.is_finite() || !r.reported.is_finite() {
            return Err(PeprError::NonFinite("fit input"));
        }
        if r.energy_wh < 0.0 {
            return Err(PeprError::InvalidArgument(format!(
                "negative energy for `{}`",
                r.label
            )));
        }
    }
    let min_e = rows
        .iter()
        .map(|r| r.energy_wh)
        .fold(f64::INFINITY, f64::min);
    let max_e = rows
        .iter()
        .map(|r| r.energy_wh)
        .fold(f64::NEG_INFINITY, f64::max);
    if min_e == max_e {
        return Err(PeprError::Degenerate("all energies are equal".into()));
    }
    let problem = Problem {
        rows,
        lo_box: (0.0, min_e),
        hi_box: (max_e, GRID_UPPER.max(max_e)),
    };
    let (glo, ghi, _) = problem.grid_search();
    let (e_min, e_max) = problem.refine(glo, ghi);

    let recomputed: Vec<f64> = rows
        .iter()
        .map(|r| r.performance / (1.0 + (r.energy_wh - e_min) / (e_max - e_min)))
        .collect();
    let residuals: Vec<f64> = rows
        .iter()
        .zip(&recomputed)
        .map(|(r, s)| (r.reported - s).abs())
        .collect();
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    Ok(FitResult {
        e_min,
        e_max,
        labels: rows.iter().map(|r| r.label.clone()).collect(),
        recomputed,
        residuals,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(e_min: f64, e_max: f64, energies: &[f64], perf: &[f64]) -> Vec<FitInput> {
        energies
            .iter()
            .zip(perf)
            .enumerate()
            .map(|(i, (&e, &p))| FitInput {
                label: format!("m{i}"),
                energy_wh: e,
                performance: p,
                reported: p / (1.0 + (e - e_min) / (e_max - e_min)),
            })
            .collect()
    }

    #[test]
    fn recovers_known_bounds() {
        let rows = synthetic(
            5.0,
            250.0,
            &[12.0, 30.0, 55.0, 90.0, 140.0],
            &[0.7, 0.75, 0.8, 0.82, 0.85],
        );
        let fit = fit_normalization_bounds(&rows).unwrap();
        assert!((fit.e_min - 5.0).abs() <= 0.5, "{fit:?}");
        assert!((fit.e_max - 250.0).abs() <= 0.5, "{fit:?}");
        assert!(fit.max_residual <= 1e-6);
    }

    #[test]
    fn derma_npt_block_is_consistent() {
        let fit = fit_normalization_bounds(&FitInput::from_table2(Table2Block::DermaNpt)).unwrap();
        assert!(fit.max_residual <= 0.005, "{fit:?}");
        assert!(fit.e_min < fit.e_max);
    }

    #[test]
    fn rejects_small_and_degenerate_blocks() {
        let rows = synthetic(0.0, 10.0, &[1.0, 2.0], &[0.5, 0.6]);
        assert!(matches!(
            fit_normalization_bounds(&rows),
            Err(PeprError::Underdetermined(2))
        ));
        let rows = synthetic(0.0, 10.0, &[3.0, 3.0, 3.0], &[0.5, 0.6, 0.7]);
        assert!(matches!(
            fit_normalization_bounds(&rows),
            Err(PeprError::Degenerate(_))
        ));
    }
}
