//! Performance curves and the PePR curve.
//!
//! A performance curve `f` maps normalized resource spend to performance. The
//! PePR curve is `pepr(r, f(r))`; its maximum over a uniform grid is the
//! curve's scalar score, tie-broken to the smallest resource.
//!
//! For increasing `f` with values in `[0, 1]` the derivative of the PePR curve
//! is `f'/(1+r) - f/(1+r)^2`, and `f(0)/2 <= f(r)/(1+r) <= 1`. Hence the PePR
//! curve grows wherever `f' > 1` and shrinks wherever `f' < f(0)/2`; between
//! those thresholds the sign depends on `f` itself.

use serde::{Deserialize, Serialize};

use crate::error::{PeprError, Result};
use crate::scoring::pepr;

/// Default number of evaluation points for grid searches.
pub const DEFAULT_GRID: usize = 1001;

/// Relative tolerance under which two grid values count as tied.
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    #[default]
    PiecewiseLinear,
    /// Value of the last sample at or before the query point.
    StepLeft,
}

/// Sampled curve with strictly increasing resource values starting at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceCurve {
    samples: Vec<(f64, f64)>,
    interpolation: Interpolation,
}

impl PerformanceCurve {
    pub fn new(samples: Vec<(f64, f64)>, interpolation: Interpolation) -> Result<Self> {
        if samples.len() < 2 {
            return Err(PeprError::InvalidCurve(format!(
                "need at least 2 samples, got {}",
                samples.len()
            )));
        }
        for &(r, p) in &samples {
            if !r.is_finite() || !p.is_finite() {
                return Err(PeprError::NonFinite("curve sample"));
            }
            if !(0.0..=1.0).contains(&r) {
                return Err(PeprError::OutOfUnitRange {
                    name: "r",
                    value: r,
                });
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(PeprError::OutOfUnitRange {
                    name: "p",
                    value: p,
                });
            }
        }
        if samples[0].0 != 0.0 {
            return Err(PeprError::InvalidCurve(format!(
                "first sample must be at r = 0, got {}",
                samples[0].0
            )));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(PeprError::InvalidCurve(
                "r values must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            samples,
            interpolation,
        })
    }

    pub fn linear(samples: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(samples, Interpolation::PiecewiseLinear)
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    /// `(first r, last r)` of the sampled domain.
    pub fn domain(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }

    /// `f(0)`.
    pub fn initial(&self) -> f64 {
        self.samples[0].1
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].1 >= w[0].1)
    }

    fn check_in_range(&self, r: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if !r.is_finite() {
            return Err(PeprError::NonFinite("r"));
        }
        if r < lo || r > hi {
            return Err(PeprError::OutsideSampledRange { value: r, lo, hi });
        }
        Ok(())
    }

    fn eval_unchecked(&self, r: f64) -> f64 {
        // index of the first sample strictly greater than r
        let idx = self.samples.partition_point(|&(x, _)| x <= r);
        if idx == 0 {
            return self.samples[0].1;
        }
        if idx == self.samples.len() {
            return self.samples[idx - 1].1;
        }
        let (r0, p0) = self.samples[idx - 1];
        match self.interpolation {
            Interpolation::StepLeft => p0,
            Interpolation::PiecewiseLinear => {
                let (r1, p1) = self.samples[idx];
                p0 + (p1 - p0) * (r - r0) / (r1 - r0)
            }
        }
    }

    /// Interpolated performance at `r`. No extrapolation.
    pub fn eval(&self, r: f64) -> Result<f64> {
        self.check_in_range(r)?;
        Ok(self.eval_unchecked(r))
    }

    /// `pepr(r, f(r))`.
    pub fn pepr_at(&self, r: f64) -> Result<f64> {
        let p = self.eval(r)?;
        pepr(r, p)
    }

    /// Finite-difference estimate of `f'(r)` with step `domain / 1000`:
    /// central in the interior, one-sided within a step of either end. On a
    /// knot of a piecewise-linear curve this averages the adjacent slopes.
    pub fn derivative(&self, r: f64) -> Result<f64> {
        self.check_in_range(r)?;
        let (lo, hi) = self.domain();
        let h = (hi - lo) / 1000.0;
        let (a, b) = if r - h < lo {
            (r, r + h)
        } else if r + h > hi {
            (r - h, r)
        } else {
            (r - h, r + h)
        };
        Ok((self.eval_unchecked(b) - self.eval_unchecked(a)) / (b - a))
    }

    /// `points` uniformly spaced resource values spanning the domain.
    pub fn grid(&self, points: usize) -> Vec<f64> {
        let (lo, hi) = self.domain();
        uniform_grid(lo, hi, points)
    }
}

pub(crate) fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    debug_assert!(points >= 2);
    let last = (points - 1) as f64;
    (0..points)
        .map(|j| {
            if j + 1 == points {
                hi
            } else {
                lo + (hi - lo) * j as f64 / last
            }
        })
        .collect()
}

/// `pepr(r, f(r))` for a curve.
pub fn pepr_curve(curve: &PerformanceCurve, r: f64) -> Result<f64> {
    curve.pepr_at(r)
}

/// Maximum of the PePR curve over a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveScore {
    pub r_star: f64,
    pub value: f64,
    pub grid_resolution: usize,
}

/// Grid search for the PePR-curve maximum; ties go to the smallest `r`.
pub fn peprc_star(curve: &PerformanceCurve, grid_resolution: usize) -> Result<CurveScore> {
    if grid_resolution < 2 {
        return Err(PeprError::InvalidArgument(format!(
            "grid resolution must be >= 2, got {grid_resolution}"
        )));
    }
    let mut best: Option<(f64, f64)> = None;
    for r in curve.grid(grid_resolution) {
        let v = curve.pepr_at(r)?;
        match best {
            Some((_, bv)) if v <= bv + TIE_EPS * bv.abs().max(1.0) => {}
            _ => best = Some((r, v)),
        }
    }
    let (r_star, value) = best.expect("grid is non-empty");
    Ok(CurveScore {
        r_star,
        value,
        grid_resolution,
    })
}

/// Closed interval `[start, end]` of resource values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    /// `f' > 1`: the PePR curve is guaranteed to increase.
    Increase,
    /// `f' < f(0)/2`: the PePR curve is guaranteed to decrease.
    Decrease,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regions {
    pub increase: Vec<Interval>,
    pub decrease: Vec<Interval>,
    pub indeterminate: Vec<Interval>,
    /// Classification of each grid interval `[grid[j], grid[j + 1]]`.
    pub per_interval: Vec<Trend>,
    pub grid: Vec<f64>,
}

impl Regions {
    /// Trend of the grid interval containing `r`, if any.
    pub fn trend_at(&self, r: f64) -> Option<Trend> {
        let j = self.grid.partition_point(|&x| x <= r);
        if j == 0 || self.grid.is_empty() {
            return None;
        }
        self.per_interval
            .get((j - 1).min(self.per_interval.len() - 1))
            .copied()
    }
}

/// Classifies each grid interval by the derivative thresholds. An interval is
/// only assigned a guaranteed trend when the derivative estimate at both
/// endpoints and the midpoint clears the threshold.
pub fn diminishing_returns_regions(
    curve: &PerformanceCurve,
    grid_resolution: usize,
) -> Result<Regions> {
    if grid_resolution < 2 {
        return Err(PeprError::InvalidArgument(format!(
            "grid resolution must be >= 2, got {grid_resolution}"
        )));
    }
    if !curve.is_non_decreasing() {
        return Err(PeprError::InvalidCurve(
            "curve must be non-decreasing".into(),
        ));
    }
    let grid = curve.grid(grid_resolution);
    let half_start = curve.initial() / 2.0;
    let derivs = grid
        .iter()
        .map(|&r| curve.derivative(r))
        .collect::<Result<Vec<_>>>()?;
    let mut per_interval = Vec::with_capacity(grid.len() - 1);
    for j in 0..grid.len() - 1 {
        let mid = curve.derivative(0.5 * (grid[j] + grid[j + 1]))?;
        let probes = [derivs[j], mid, derivs[j + 1]];
        let trend = if probes.iter().all(|&d| d > 1.0) {
            Trend::Increase
        } else if probes.iter().all(|&d| d < half_start) {
            Trend::Decrease
        } else {
            Trend::Indeterminate
        };
        per_interval.push(trend);
    }

    let mut increase = Vec::new();
    let mut decrease = Vec::new();
    let mut indeterminate = Vec::new();
    let mut j = 0;
    while j < per_interval.len() {
        let t = per_interval[j];
        let mut k = j;
        while k + 1 < per_interval.len() && per_interval[k + 1] == t {
            k += 1;
        }
        let iv = Interval {
            start: grid[j],
            end: grid[k + 1],
        };
        match t {
            Trend::Increase => increase.push(iv),
            Trend::Decrease => decrease.push(iv),
            Trend::Indeterminate => indeterminate.push(iv),
        }
        j = k + 1;
    }
    Ok(Regions {
        increase,
        decrease,
        indeterminate,
        per_interval,
        grid,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub abs_error: f64,
}

/// Compares `pepr(r, f(r))` with
/// `f(0) + ∫₀ʳ f'(t)/(1+t) dt - ∫₀ʳ f(t)/(1+t)² dt`, both integrals taken by
/// the trapezoid rule over `quadrature_points` uniform nodes merged with the
/// sample knots. Within a cell `f'` is the cell's secant slope.
pub fn integral_representation_check(
    curve: &PerformanceCurve,
    r: f64,
    quadrature_points: usize,
) -> Result<IntegralCheck> {
    if quadrature_points < 2 {
        return Err(PeprError::InvalidArgument(format!(
            "quadrature needs at least 2 points, got {quadrature_points}"
        )));
    }
    let lhs = curve.pepr_at(r)?;
    let (lo, _) = curve.domain();
    let mut nodes = uniform_grid(lo, r, quadrature_points);
    nodes.extend(
        curve
            .samples
            .iter()
            .map(|s| s.0)
            .filter(|&t| t > lo && t < r),
    );
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let values: Vec<f64> = nodes.iter().map(|&t| curve.eval_unchecked(t)).collect();
    let mut growth = 0.0;
    let mut level = 0.0;
    for (x, y) in nodes.windows(2).zip(values.windows(2)) {
        let (a, b) = (x[0], x[1]);
        let slope = (y[1] - y[0]) / (b - a);
        growth += 0.5 * (b - a) * slope * (1.0 / (1.0 + a) + 1.0 / (1.0 + b));
        level += 0.5 * (b - a) * (y[0] / ((1.0 + a) * (1.0 + a)) + y[1] / ((1.0 + b) * (1.0 + b)));
    }
    let rhs = curve.initial() + growth - level;
    Ok(IntegralCheck {
        lhs,
        rhs,
        abs_error: (lhs - rhs).abs(),
    })
}

/// `values[i][j] = pepr(r_axis[j], p_axis[i])` over `[0, 1]²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoclineGrid {
    pub r_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

pub fn isocline_grid(resolution: usize) -> Result<IsoclineGrid> {
    if resolution < 2 {
        return Err(PeprError::InvalidArgument(format!(
            "grid resolution must be >= 2, got {resolution}"
        )));
    }
    let axis = uniform_grid(0.0, 1.0, resolution);
    let values = axis
        .iter()
        .map(|&p| axis.iter().map(|&r| pepr(r, p)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(IsoclineGrid {
        r_axis: axis.clone(),
        p_axis: axis,
        values,
    })
}

/// Closed-form curve families used to generate test fixtures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CurveFamily {
    /// `p0 + (p_max - p0)(1 - e^(-rate·r))`.
    SaturatingExp { p0: f64, p_max: f64, rate: f64 },
    /// `p0 + slope·r`.
    Linear { p0: f64, slope: f64 },
    /// `min(cap, p0 + slope·r)`.
    KinkedLinear { p0: f64, slope: f64, cap: f64 },
}

impl CurveFamily {
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            CurveFamily::SaturatingExp { p0, p_max, rate } => {
                p0 + (p_max - p0) * (1.0 - (-rate * r).exp())
            }
            CurveFamily::Linear { p0, slope } => p0 + slope * r,
            CurveFamily::KinkedLinear { p0, slope, cap } => cap.min(p0 + slope * r),
        }
    }

    /// Resource at which a kinked curve reaches its cap, if inside `(0, 1)`.
    pub fn kink(&self) -> Option<f64> {
        match *self {
            CurveFamily::KinkedLinear { p0, slope, cap } if slope > 0.0 => {
                let k = (cap - p0) / slope;
                (k > 0.0 && k < 1.0).then_some(k)
            }
            _ => None,
        }
    }

    fn params(&self) -> Vec<f64> {
        match *self {
            CurveFamily::SaturatingExp { p0, p_max, rate } => vec![p0, p_max, rate],
            CurveFamily::Linear { p0, slope } => vec![p0, slope],
            CurveFamily::KinkedLinear { p0, slope, cap } => vec![p0, slope, cap],
        }
    }
}

/// Samples `family` at `n_samples` uniform points over `[0, 1]`. A kink that
/// falls between grid points is added as an extra sample.
pub fn synth_curve(family: CurveFamily, n_samples: usize) -> Result<PerformanceCurve> {
    if n_samples < 2 {
        return Err(PeprError::InvalidArgument(format!(
            "need at least 2 samples, got {n_samples}"
        )));
    }
    if family.params().iter().any(|v| !v.is_finite()) {
        return Err(PeprError::NonFinite("curve parameter"));
    }
    let mut rs = uniform_grid(0.0, 1.0, n_samples);
    if let Some(k) = family.kink() {
        let idx = rs.partition_point(|&x| x < k);
        if rs[idx] != k {
            rs.insert(idx, k);
        }
    }
    let samples: Vec<(f64, f64)> = rs.into_iter().map(|r| (r, family.value(r))).collect();
    if let Some(&(r, p)) = samples.iter().find(|(_, p)| !(0.0..=1.0).contains(p)) {
        return Err(PeprError::InvalidArgument(format!(
            "{family:?} leaves [0, 1] at r = {r} (p = {p})"
        )));
    }
    PerformanceCurve::linear(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_point() -> PerformanceCurve {
        PerformanceCurve::linear(vec![(0.0, 0.5), (1.0, 0.9)]).unwrap()
    }

    fn kinked() -> PerformanceCurve {
        synth_curve(
            CurveFamily::KinkedLinear {
                p0: 0.5,
                slope: 2.0,
                cap: 1.0,
            },
            1001,
        )
        .unwrap()
    }

    fn half_plus_half() -> PerformanceCurve {
        synth_curve(
            CurveFamily::Linear {
                p0: 0.5,
                slope: 0.5,
            },
            1001,
        )
        .unwrap()
    }

    #[test]
    fn curve_validation() {
        assert!(PerformanceCurve::linear(vec![(0.0, 0.5)]).is_err());
        assert!(PerformanceCurve::linear(vec![(0.1, 0.5), (1.0, 0.6)]).is_err());
        assert!(PerformanceCurve::linear(vec![(0.0, 0.5), (0.0, 0.6)]).is_err());
        assert!(PerformanceCurve::linear(vec![(0.0, 0.5), (1.0, 1.6)]).is_err());
    }

    #[test]
    fn eval_examples() {
        let f = two_point();
        assert_abs_diff_eq!(f.eval(0.5).unwrap(), 0.7, epsilon = 1e-15);
        assert_eq!(f.eval(0.0).unwrap(), 0.5);
        assert!(f.eval(1.01).is_err());
        let g = PerformanceCurve::linear(vec![(0.0, 0.2), (0.5, 0.6), (1.0, 0.8)]).unwrap();
        // 0.6 + (0.8 - 0.6) * 0.5
        assert_abs_diff_eq!(g.eval(0.75).unwrap(), 0.7, epsilon = 1e-15);
    }

    #[test]
    fn step_left_holds_previous_sample() {
        let g = PerformanceCurve::new(
            vec![(0.0, 0.2), (0.5, 0.6), (1.0, 0.8)],
            Interpolation::StepLeft,
        )
        .unwrap();
        assert_eq!(g.eval(0.49).unwrap(), 0.2);
        assert_eq!(g.eval(0.5).unwrap(), 0.6);
        assert_eq!(g.eval(1.0).unwrap(), 0.8);
    }

    #[test]
    fn pepr_curve_examples() {
        let f = two_point();
        assert_abs_diff_eq!(pepr_curve(&f, 1.0).unwrap(), 0.45, epsilon = 1e-15);
        assert_eq!(pepr_curve(&f, 0.0).unwrap(), 0.5);
        let g = half_plus_half();
        for r in g.grid(101) {
            assert_abs_diff_eq!(pepr_curve(&g, r).unwrap(), 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn peprc_star_examples() {
        let s = peprc_star(&half_plus_half(), 1001).unwrap();
        assert_eq!(s.r_star, 0.0);
        assert_abs_diff_eq!(s.value, 0.5, epsilon = 1e-12);

        let s = peprc_star(&kinked(), 1001).unwrap();
        assert_abs_diff_eq!(s.r_star, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(s.value, 0.8, epsilon = 1e-12);

        let flat = PerformanceCurve::linear(vec![(0.0, 0.7), (1.0, 0.7)]).unwrap();
        let s = peprc_star(&flat, 1001).unwrap();
        assert_eq!((s.r_star, s.value), (0.0, 0.7));
        assert!(peprc_star(&flat, 1).is_err());
    }

    #[test]
    fn peprc_star_matches_brute_force_scan() {
        let f = synth_curve(
            CurveFamily::SaturatingExp {
                p0: 0.3,
                p_max: 0.95,
                rate: 6.0,
            },
            501,
        )
        .unwrap();
        let s = peprc_star(&f, 1001).unwrap();
        let brute = (0..1001)
            .map(|j| {
                let r = j as f64 / 1000.0;
                (r, f.eval(r).unwrap() / (1.0 + r))
            })
            .fold(
                (0.0, f64::NEG_INFINITY),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );
        assert_abs_diff_eq!(s.value, brute.1, epsilon = 1e-12);
        assert_abs_diff_eq!(s.r_star, brute.0, epsilon = 1e-12);
    }

    #[test]
    fn derivative_examples() {
        assert_abs_diff_eq!(two_point().derivative(0.5).unwrap(), 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(kinked().derivative(0.1).unwrap(), 2.0, epsilon = 1e-9);
        let flat = PerformanceCurve::linear(vec![(0.0, 0.7), (1.0, 0.7)]).unwrap();
        assert_eq!(flat.derivative(0.3).unwrap(), 0.0);
        // one-sided at the ends
        assert_abs_diff_eq!(two_point().derivative(0.0).unwrap(), 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(two_point().derivative(1.0).unwrap(), 0.4, epsilon = 1e-12);
        // knot of a piecewise-linear curve averages the two slopes
        let g = PerformanceCurve::linear(vec![(0.0, 0.2), (0.5, 0.6), (1.0, 0.8)]).unwrap();
        assert_abs_diff_eq!(g.derivative(0.5).unwrap(), 0.6, epsilon = 1e-9);
    }

    #[test]
    fn regions_for_kinked_curve() {
        let regions = diminishing_returns_regions(&kinked(), 1001).unwrap();
        assert_eq!(regions.increase.len(), 1);
        assert_eq!(regions.decrease.len(), 1);
        let inc = regions.increase[0];
        let dec = regions.decrease[0];
        assert_eq!(inc.start, 0.0);
        assert!((inc.end - 0.25).abs() <= 0.0015, "{inc:?}");
        assert!((dec.start - 0.25).abs() <= 0.0015, "{dec:?}");
        assert_eq!(dec.end, 1.0);
        // cross-check the sign of the numerical PePR-curve derivative
        let f = kinked();
        for (j, t) in regions.per_interval.iter().enumerate() {
            let (a, b) = (regions.grid[j], regions.grid[j + 1]);
            let d = f.pepr_at(b).unwrap() - f.pepr_at(a).unwrap();
            match t {
                Trend::Increase => assert!(d > 0.0),
                Trend::Decrease => assert!(d < 0.0),
                Trend::Indeterminate => {}
            }
        }
    }

    #[test]
    fn regions_for_band_and_flat_curves() {
        let regions = diminishing_returns_regions(&half_plus_half(), 1001).unwrap();
        assert!(regions.increase.is_empty() && regions.decrease.is_empty());
        assert_eq!(
            regions.indeterminate,
            vec![Interval {
                start: 0.0,
                end: 1.0
            }]
        );

        let flat = PerformanceCurve::linear(vec![(0.0, 0.8), (1.0, 0.8)]).unwrap();
        let regions = diminishing_returns_regions(&flat, 1001).unwrap();
        assert_eq!(
            regions.decrease,
            vec![Interval {
                start: 0.0,
                end: 1.0
            }]
        );
        assert_eq!(regions.trend_at(0.5), Some(Trend::Decrease));

        let falling = PerformanceCurve::linear(vec![(0.0, 0.8), (1.0, 0.6)]).unwrap();
        assert!(diminishing_returns_regions(&falling, 1001).is_err());
    }

    #[test]
    fn integral_representation_examples() {
        let f = synth_curve(
            CurveFamily::SaturatingExp {
                p0: 0.5,
                p_max: 1.0,
                rate: 3.0,
            },
            1001,
        )
        .unwrap();
        let check = integral_representation_check(&f, 1.0, 10_000).unwrap();
        assert!(check.abs_error <= 1e-6, "{check:?}");

        let zero = integral_representation_check(&f, 0.0, 10_000).unwrap();
        assert_eq!(zero.lhs, 0.5);
        assert_eq!(zero.rhs, 0.5);
        assert_eq!(zero.abs_error, 0.0);

        // closed form for f = 0.5 + 0.4r on [0, 1]:
        // 0.4 ln 2 - ∫ (0.5 + 0.4t)/(1+t)^2 dt = 0.4 ln 2 - (0.4 ln 2 + 0.1 * 0.5) = -0.05
        let lin = two_point();
        let check = integral_representation_check(&lin, 1.0, 10_000).unwrap();
        assert_abs_diff_eq!(check.rhs, 0.5 - 0.05, epsilon = 1e-6);
        assert!(check.abs_error <= 1e-6);
        assert!(integral_representation_check(&lin, 1.0, 1).is_err());
    }

    #[test]
    fn quadrature_error_shrinks_with_more_points() {
        let f = synth_curve(
            CurveFamily::SaturatingExp {
                p0: 0.5,
                p_max: 1.0,
                rate: 3.0,
            },
            100_001,
        )
        .unwrap();
        let coarse = integral_representation_check(&f, 0.8, 100)
            .unwrap()
            .abs_error;
        let fine = integral_representation_check(&f, 0.8, 10_000)
            .unwrap()
            .abs_error;
        assert!(fine < coarse, "{fine} vs {coarse}");
    }

    #[test]
    fn isocline_examples() {
        let g = isocline_grid(11).unwrap();
        assert_eq!(g.values[10][10], 0.5);
        assert_eq!(g.values[10][0], 1.0);
        for (i, &p) in g.p_axis.iter().enumerate() {
            assert_eq!(g.values[i][0], p);
        }
        assert_abs_diff_eq!(g.values[6][5], 0.4, epsilon = 1e-15);
        assert!(isocline_grid(1).is_err());
    }

    #[test]
    fn isocline_monotone_along_both_axes() {
        let g = isocline_grid(51).unwrap();
        for i in 0..51 {
            for j in 0..50 {
                if g.p_axis[i] > 0.0 {
                    assert!(g.values[i][j + 1] < g.values[i][j]);
                }
                if i + 1 < 51 {
                    assert!(g.values[i + 1][j] > g.values[i][j]);
                }
            }
        }
    }

    #[test]
    fn synth_examples() {
        let lin = synth_curve(
            CurveFamily::Linear {
                p0: 0.5,
                slope: 0.4,
            },
            11,
        )
        .unwrap();
        assert_eq!(lin.samples().len(), 11);
        assert_eq!(lin.samples()[0], (0.0, 0.5));
        assert_abs_diff_eq!(lin.samples()[10].1, 0.9, epsilon = 1e-15);

        let sat = synth_curve(
            CurveFamily::SaturatingExp {
                p0: 0.5,
                p_max: 1.0,
                rate: 3.0,
            },
            1001,
        )
        .unwrap();
        assert_eq!(sat.initial(), 0.5);
        assert_abs_diff_eq!(
            sat.eval(1.0).unwrap(),
            0.5 + 0.5 * (1.0 - (-3.0f64).exp()),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(sat.eval(1.0).unwrap(), 0.9751, epsilon = 1e-4);

        let fam = CurveFamily::KinkedLinear {
            p0: 0.5,
            slope: 2.0,
            cap: 1.0,
        };
        assert_eq!(fam.kink(), Some(0.25));
        let k = synth_curve(
            CurveFamily::KinkedLinear {
                p0: 0.3,
                slope: 1.7,
                cap: 0.9,
            },
            11,
        )
        .unwrap();
        assert_eq!(k.samples().len(), 12);
        assert!(synth_curve(
            CurveFamily::Linear {
                p0: 0.8,
                slope: 0.5
            },
            11
        )
        .is_err());
        assert!(synth_curve(
            CurveFamily::Linear {
                p0: 0.8,
                slope: 0.1
            },
            1
        )
        .is_err());
    }
}
