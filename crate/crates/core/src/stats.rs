//! Group statistics: median splits and two-sample t-tests.
//!
//! The two-sided p-value of a t statistic with `ν` degrees of freedom is
//! `I_x(ν/2, 1/2)` with `x = ν / (ν + t²)`, where `I` is the regularized
//! incomplete beta function. `I` is evaluated with the modified Lentz
//! continued fraction.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{PeprError, Result};
use crate::resource::RunRecord;

const CF_MAX_ITER: usize = 10_000;
const CF_EPS: f64 = 1e-16;
const CF_TINY: f64 = 1e-300;

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < CF_TINY {
        d = CF_TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(PeprError::InvalidArgument(format!(
            "beta parameters must be positive, got ({a}, {b})"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(PeprError::OutOfUnitRange {
            name: "x",
            value: x,
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    // the continued fraction converges fastest below the mean of the distribution
    let value = if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Two-sided p-value of a Student-t statistic.
pub fn student_t_two_sided(t: f64, df: f64) -> Result<f64> {
    if df.is_nan() || df <= 0.0 {
        return Err(PeprError::InvalidArgument(format!(
            "degrees of freedom must be positive, got {df}"
        )));
    }
    if t.is_nan() {
        return Err(PeprError::NonFinite("t statistic"));
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_variance(values: &[f64], mean: f64) -> f64 {
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64
}

/// Median: middle value for odd counts, mean of the middle two for even.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(PeprError::Empty("values"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(PeprError::NonFinite("value"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Ok(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub label: String,
    pub values: Vec<f64>,
}

impl Group {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    pub group_a: Group,
    pub group_b: Group,
    pub median_a: f64,
    pub median_b: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub t_statistic: f64,
    pub degrees_of_freedom: f64,
    pub p_value: f64,
    pub paired: bool,
    /// Both groups had zero variance; `p` follows the zero-variance
    /// convention instead of the t distribution.
    pub degenerate: bool,
}

/// Welch's unequal-variance two-sided t-test.
pub fn welch_t_test(sample_a: &[f64], sample_b: &[f64]) -> Result<GroupComparison> {
    welch_groups(
        Group::new("a", sample_a.to_vec()),
        Group::new("b", sample_b.to_vec()),
    )
}

fn check_sample(values: &[f64], min: usize) -> Result<()> {
    if values.len() < min {
        return Err(PeprError::Degenerate(format!(
            "need at least {min} values per group, got {}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(PeprError::NonFinite("sample value"));
    }
    Ok(())
}

pub fn welch_groups(group_a: Group, group_b: Group) -> Result<GroupComparison> {
    check_sample(&group_a.values, 2)?;
    check_sample(&group_b.values, 2)?;
    let (a, b) = (&group_a.values, &group_b.values);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (sample_variance(a, ma), sample_variance(b, mb));
    let (sa, sb) = (va / na, vb / nb);
    let se2 = sa + sb;

    let (t, df, p, degenerate) = if se2 == 0.0 {
        let df = na + nb - 2.0;
        if ma == mb {
            (0.0, df, 1.0, true)
        } else {
            let t = if ma > mb {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            };
            (t, df, 0.0, true)
        }
    } else {
        let t = (ma - mb) / se2.sqrt();
        let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
        (t, df, student_t_two_sided(t, df)?, false)
    };
    Ok(GroupComparison {
        median_a: median(a)?,
        median_b: median(b)?,
        mean_a: ma,
        mean_b: mb,
        group_a,
        group_b,
        t_statistic: t,
        degrees_of_freedom: df,
        p_value: p,
        paired: false,
        degenerate,
    })
}

/// Paired two-sided t-test on `a[i] - b[i]`.
pub fn paired_t_test(group_a: Group, group_b: Group) -> Result<GroupComparison> {
    check_sample(&group_a.values, 2)?;
    check_sample(&group_b.values, 2)?;
    if group_a.values.len() != group_b.values.len() {
        return Err(PeprError::InvalidArgument(format!(
            "paired test needs equal group sizes, got {} and {}",
            group_a.values.len(),
            group_b.values.len()
        )));
    }
    let diffs: Vec<f64> = group_a
        .values
        .iter()
        .zip(&group_b.values)
        .map(|(x, y)| x - y)
        .collect();
    let n = diffs.len() as f64;
    let md = mean(&diffs);
    let vd = sample_variance(&diffs, md);
    let df = n - 1.0;
    let (t, p, degenerate) = if vd == 0.0 {
        if md == 0.0 {
            (0.0, 1.0, true)
        } else {
            (md.signum() * f64::INFINITY, 0.0, true)
        }
    } else {
        let t = md / (vd / n).sqrt();
        (t, student_t_two_sided(t, df)?, false)
    };
    Ok(GroupComparison {
        median_a: median(&group_a.values)?,
        median_b: median(&group_b.values)?,
        mean_a: mean(&group_a.values),
        mean_b: mean(&group_b.values),
        group_a,
        group_b,
        t_statistic: t,
        degrees_of_freedom: df,
        p_value: p,
        paired: true,
        degenerate,
    })
}

/// Items split at the median of a key: `small` holds keys `<= threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct MedianSplit<T> {
    pub threshold: f64,
    pub small: Vec<T>,
    pub large: Vec<T>,
}

pub fn median_split_by<T: Clone>(
    items: &[T],
    key: impl Fn(&T) -> Option<f64>,
) -> Result<MedianSplit<T>> {
    if items.len() < 2 {
        return Err(PeprError::InvalidArgument(format!(
            "median split needs at least 2 items, got {}",
            items.len()
        )));
    }
    let keys = items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            key(item)
                .ok_or_else(|| PeprError::InvalidArgument(format!("item {i} has no key value")))
        })
        .collect::<Result<Vec<_>>>()?;
    let threshold = median(&keys)?;
    let (mut small, mut large) = (Vec::new(), Vec::new());
    for (item, k) in items.iter().zip(keys) {
        if k <= threshold {
            small.push(item.clone());
        } else {
            large.push(item.clone());
        }
    }
    Ok(MedianSplit {
        threshold,
        small,
        large,
    })
}

/// Median split of runs on their trainable-parameter count.
pub fn median_split(records: &[RunRecord]) -> Result<MedianSplit<RunRecord>> {
    median_split_by(records, |r| r.tags().params_millions)
}
