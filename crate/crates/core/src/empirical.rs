//! Non-parametric estimation of the quantile, vitality, and persistence
//! functions from sample data.
//!
//! The empirical quantile is the left-continuous step function
//! `Q_n(u) = X_(k)` with `k = ceil(n u)`; vitality is the mean of the order
//! statistics above the threshold, and the persistence estimate is their
//! ratio. Variability comes from the bootstrap; no closed-form variance is
//! attempted.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::persistence::PersistenceCurve;
use crate::rng;

/// Sorted, strictly positive observations for one study arm.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleArm {
    values: Vec<f64>,
    label: String,
}

impl SampleArm {
    /// Builds an arm from raw observations: sorts them and rejects
    /// non-finite, non-positive, or too-few inputs.
    pub fn new(mut values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Domain(format!(
                "an arm needs at least 2 observations, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v <= 0.0) {
            return Err(Error::Domain(format!(
                "observations must be positive and finite, found {bad}"
            )));
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self { values, label: label.into() })
    }

    /// Constructor for already-sorted positive values (bootstrap hot path).
    pub(crate) fn from_sorted_unchecked(values: Vec<f64>, label: impl Into<String>) -> Self {
        Self { values, label: label.into() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// The 1-based order-statistic index k = ceil(n u), adjusted so it satisfies
/// the defining step rule (k-1)/n < u <= k/n despite floating-point rounding
/// in the product n * u.
pub(crate) fn tail_index(n: usize, u: f64) -> usize {
    let nf = n as f64;
    let mut k = (nf * u).ceil() as usize;
    k = k.clamp(1, n);
    while k > 1 && u <= (k - 1) as f64 / nf {
        k -= 1;
    }
    while k < n && u > k as f64 / nf {
        k += 1;
    }
    k
}

fn check_u_estimation(u: f64) -> Result<()> {
    if u > 0.0 && u <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("u must be in (0, 1], got {u}")))
    }
}

/// Q_n(u) = X_(k) with k = ceil(n u), for u in (0, 1].
pub fn empirical_quantile(arm: &SampleArm, u: f64) -> Result<f64> {
    check_u_estimation(u)?;
    let k = tail_index(arm.len(), u);
    Ok(arm.values[k - 1])
}

/// V_n(u): the mean of the n - k order statistics above the threshold.
pub fn empirical_vitality(arm: &SampleArm, u: f64) -> Result<f64> {
    check_u_estimation(u)?;
    let n = arm.len();
    let k = tail_index(n, u);
    if k >= n {
        return Err(Error::TailEmpty { k, n });
    }
    let tail = &arm.values[k..];
    Ok(tail.iter().sum::<f64>() / tail.len() as f64)
}

/// The persistence estimate V_n(u) / Q_n(u), always >= 1.
pub fn empirical_qepf(arm: &SampleArm, u: f64) -> Result<f64> {
    let threshold = empirical_quantile(arm, u)?;
    if threshold <= 0.0 {
        return Err(Error::ZeroThreshold);
    }
    Ok(empirical_vitality(arm, u)? / threshold)
}

/// Pointwise persistence estimates over a grid. Every grid point must be
/// feasible (k < n); infeasible points are rejected before any evaluation.
pub fn empirical_curve(arm: &SampleArm, u_grid: &[f64]) -> Result<PersistenceCurve> {
    let n = arm.len();
    for &u in u_grid {
        check_u_estimation(u)?;
        let k = tail_index(n, u);
        if k >= n {
            return Err(Error::TailEmpty { k, n });
        }
    }
    let values = u_grid
        .iter()
        .map(|&u| empirical_qepf(arm, u))
        .collect::<Result<Vec<f64>>>()?;
    PersistenceCurve::new(u_grid.to_vec(), values, arm.label())
}

/// Percentile bootstrap interval for the persistence estimate at one u.
///
/// Resamples the arm with replacement B times; degenerate resamples with an
/// all-equal upper tail are kept (the estimate 1 is a legitimate value).
/// Deterministic for a given seed.
pub fn bootstrap_pointwise_ci(
    arm: &SampleArm,
    u: f64,
    b: usize,
    level: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    if b < 200 {
        return Err(Error::Config(format!("bootstrap needs B >= 200 replicates, got {b}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!("confidence level must be in (0, 1), got {level}")));
    }
    // Fail fast if the point itself is infeasible.
    empirical_qepf(arm, u)?;

    let n = arm.len();
    let mut stats: Vec<f64> = (0..b)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rng::rng_from_seed(rng::derive_seed(seed, &[0xC1, rep as u64]));
            let mut resample: Vec<f64> =
                (0..n).map(|_| arm.values[rng.random_range(0..n)]).collect();
            resample.sort_unstable_by(f64::total_cmp);
            let boot = SampleArm::from_sorted_unchecked(resample, arm.label());
            // k < n holds at fixed n, so this cannot fail.
            empirical_qepf(&boot, u).expect("resample of feasible point stays feasible")
        })
        .collect();
    stats.sort_unstable_by(f64::total_cmp);

    let lo_ix = tail_index(b, (1.0 - level) / 2.0);
    let hi_ix = tail_index(b, (1.0 + level) / 2.0);
    Ok((stats[lo_ix - 1], stats[hi_ix - 1]))
}

/// Parses arm data from CSV text.
///
/// Two dialects: one numeric value per line, or a `group,value` file with a
/// mandatory header row. Values must be positive ('.' decimal separator);
/// offending rows are rejected with their line numbers. Arms are returned in
/// order of first appearance.
pub fn read_arms_csv(text: &str) -> Result<Vec<SampleArm>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (first_no, first) = lines
        .next()
        .ok_or_else(|| Error::Parse("input file contains no data".into()))?;

    let normalized: String = first
        .to_ascii_lowercase()
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect();
    let grouped = normalized == "group,value";

    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    let mut push = |line: usize, group: &str, raw: &str| -> Result<()> {
        let value: f64 = raw.trim().parse().map_err(|_| Error::Ingest {
            line,
            reason: format!("`{}` is not a number", raw.trim()),
        })?;
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::Ingest {
                line,
                reason: format!("observations must be positive and finite, got {value}"),
            });
        }
        match groups.iter_mut().find(|(g, _)| g == group) {
            Some((_, vs)) => vs.push(value),
            None => groups.push((group.to_string(), vec![value])),
        }
        Ok(())
    };

    if grouped {
        for (line_no, line) in lines {
            let (group, raw) = line.split_once(',').ok_or_else(|| Error::Ingest {
                line: line_no,
                reason: "expected two columns `group,value`".into(),
            })?;
            let group = group.trim();
            if group.is_empty() {
                return Err(Error::Ingest { line: line_no, reason: "empty group name".into() });
            }
            push(line_no, group, raw)?;
        }
    } else {
        push(first_no, "sample", first)?;
        for (line_no, line) in lines {
            push(line_no, "sample", line)?;
        }
    }

    groups
        .into_iter()
        .map(|(label, values)| {
            SampleArm::new(values, &label).map_err(|e| {
                Error::Parse(format!("group `{label}`: {e}"))
            })
        })
        .collect()
}
