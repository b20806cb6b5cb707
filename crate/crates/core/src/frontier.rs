//! Pareto frontiers over `(resource, performance)` points.
//!
//! A point dominates another when it is no more expensive and no worse, and
//! strictly better in at least one of the two. Identical points never
//! dominate each other, so duplicates on the frontier are all kept.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{PeprError, Result};
use crate::scoring::{pepr_alpha, ScoreParams};

const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub label: String,
    pub r: f64,
    pub p: f64,
}

impl TradeoffPoint {
    pub fn new(label: impl Into<String>, r: f64, p: f64) -> Result<Self> {
        for (name, v) in [("r", r), ("p", p)] {
            if !v.is_finite() {
                return Err(PeprError::NonFinite(name));
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(PeprError::OutOfUnitRange { name, value: v });
            }
        }
        Ok(Self {
            label: label.into(),
            r,
            p,
        })
    }

    pub fn score(&self, params: &ScoreParams) -> Result<f64> {
        pepr_alpha(self.r, self.p, params.alpha_value())
    }
}

/// Minimize `r`, maximize `p`.
pub fn dominates(a: &TradeoffPoint, b: &TradeoffPoint) -> bool {
    a.p >= b.p && a.r <= b.r && (a.p > b.p || a.r < b.r)
}

/// Frontier membership over the input points, by index into [`points`].
///
/// [`points`]: ParetoFront::points
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    points: Vec<TradeoffPoint>,
    /// Non-dominated indices, sorted by ascending `r`.
    frontier: Vec<usize>,
    /// `(dominated, witness)` index pairs.
    dominated: Vec<(usize, usize)>,
}

impl ParetoFront {
    /// Input points in their original order.
    pub fn points(&self) -> &[TradeoffPoint] {
        &self.points
    }

    pub fn frontier_indices(&self) -> &[usize] {
        &self.frontier
    }

    pub fn frontier(&self) -> impl Iterator<Item = &TradeoffPoint> + '_ {
        self.frontier.iter().map(|&i| &self.points[i])
    }

    /// Each dominated point with one point that dominates it.
    pub fn dominated(&self) -> impl Iterator<Item = (&TradeoffPoint, &TradeoffPoint)> + '_ {
        self.dominated
            .iter()
            .map(|&(d, w)| (&self.points[d], &self.points[w]))
    }

    pub fn dominated_indices(&self) -> &[(usize, usize)] {
        &self.dominated
    }

    pub fn is_on_frontier(&self, index: usize) -> bool {
        self.frontier.contains(&index)
    }

    /// Per-point frontier flags in input order.
    pub fn flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.points.len()];
        for &i in &self.frontier {
            flags[i] = true;
        }
        flags
    }
}

/// Sort-and-sweep frontier extraction, `O(n log n)`.
pub fn pareto_front(points: Vec<TradeoffPoint>) -> Result<ParetoFront> {
    if points.is_empty() {
        return Err(PeprError::Empty("points"));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .r
            .total_cmp(&points[b].r)
            .then_with(|| points[b].p.total_cmp(&points[a].p))
            .then_with(|| a.cmp(&b))
    });

    let mut frontier = Vec::new();
    let mut dominated = Vec::new();
    // best point among strictly cheaper resource values
    let mut best_cheaper: Option<usize> = None;
    let mut i = 0;
    while i < order.len() {
        let head = order[i];
        let mut j = i;
        while j < order.len() && points[order[j]].r == points[head].r {
            j += 1;
        }
        // order[i..j] share r and are sorted by descending p
        let group_best = points[head].p;
        for &idx in &order[i..j] {
            let p = points[idx].p;
            if p < group_best {
                dominated.push((idx, head));
            } else {
                match best_cheaper {
                    Some(w) if points[w].p >= p => dominated.push((idx, w)),
                    _ => frontier.push(idx),
                }
            }
        }
        if best_cheaper.is_none_or(|w| group_best > points[w].p) {
            best_cheaper = Some(head);
        }
        i = j;
    }
    dominated.sort_unstable();
    Ok(ParetoFront {
        points,
        frontier,
        dominated,
    })
}

/// The frontier point with the highest α-scaled PePR score, ties to the
/// smallest `r`.
pub fn knee_point(front: &ParetoFront, params: &ScoreParams) -> Result<TradeoffPoint> {
    let mut best: Option<(&TradeoffPoint, f64)> = None;
    for point in front.frontier() {
        let s = point.score(params)?;
        let better = match best {
            None => true,
            Some((b, bs)) => {
                if (s - bs).abs() <= TIE_EPS * bs.abs().max(1.0) {
                    point.r.total_cmp(&b.r) == Ordering::Less
                } else {
                    s > bs
                }
            }
        };
        if better {
            best = Some((point, s));
        }
    }
    best.map(|(p, _)| p.clone())
        .ok_or(PeprError::Empty("frontier"))
}
